#include "ecudn/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>

#include "ecudn/errors.hpp"
#include "ecudn/parallel.hpp"
#include "ecudn/rng.hpp"

namespace ecudn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::vector<double>> kTwoSbsGainsDb = {{10.0, 1.0}, {2.0, 20.0}};

std::vector<std::size_t> range_step(std::size_t first, std::size_t last, std::size_t step) {
    std::vector<std::size_t> out;
    for (std::size_t v = first; v <= last; v += step) out.push_back(v);
    return out;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += format_number(values[i]);
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string half_width_text(const Estimate& e) { return e.half_width ? format_number(*e.half_width) : ""; }

// Outcome of one fallible computation inside a sweep cell.
struct Status {
    std::string text = "ok";
    bool ok() const { return text == "ok"; }
};

template <class Fn>
Status guarded(Fn&& fn) {
    try {
        fn();
        return {};
    } catch (const InfeasibleError&) {
        return {"infeasible"};
    } catch (const QuadratureError& e) {
        return {std::string("quadrature_error: ") + e.what()};
    } catch (const std::exception& e) {
        return {std::string("error: ") + e.what()};
    }
}

NetworkTraffic uniform_traffic(const TrafficModel& t, std::size_t n) { return NetworkTraffic(n, t); }

LinkGainMatrix layout_gains(const ExperimentConfig& c, std::size_t n_sbs, std::size_t index,
                            const RadioParams& radio) {
    return link_gains(build_layout_with_retry(n_sbs, c.area_side, c.candidate_ues, radio,
                                              layout_seed(c.seed, n_sbs, index)));
}

SolverConfig solver_for(const ExperimentConfig& c, InterferenceModel model) {
    SolverConfig s = c.solver;
    s.model = model;
    return s;
}

SimConfig sim_with_seed(const ExperimentConfig& c, std::uint64_t seed) {
    SimConfig s = c.sim;
    s.seed = seed;
    s.q_threshold = c.q_threshold;
    s.delay_bound = c.delay_bound;
    return s;
}

std::vector<double> solve_violations(const LinkGainMatrix& gains, const NetworkTraffic& traffic,
                                     const ExperimentConfig& c, InterferenceModel model, Status& status) {
    std::vector<double> out(gains.size(), kNaN);
    status = guarded([&] {
        const SolveResult r = model == InterferenceModel::Full
                                  ? solve_qos_exponents_full_interference(gains, traffic, solver_for(c, model))
                                  : solve_qos_exponents(gains, traffic, solver_for(c, model));
        for (std::size_t n = 0; n < gains.size(); ++n)
            out[n] = queue_violation_prob(r.theta_star[n], traffic[n], c.q_threshold);
        if (!r.converged) throw std::runtime_error("solver did not converge");
    });
    return out;
}

std::vector<double> max_rates(const LinkGainMatrix& gains, const NetworkTraffic& traffic, double d,
                              const ExperimentConfig& c, InterferenceModel model) {
    const std::vector<double> dv(gains.size(), d);
    if (model == InterferenceModel::Unsaturated) return max_arrival_rates(dv, traffic, gains, solver_for(c, model));
    std::vector<double> out(gains.size());
    for (std::size_t n = 0; n < gains.size(); ++n) {
        const double theta = solve_theta_given_d_full_interference(n, dv, traffic, gains, solver_for(c, model));
        out[n] = max_arrival_rate(n, dv, traffic, theta);
    }
    return out;
}

std::vector<double> initial_strategy(const ExperimentConfig& c, std::size_t n) {
    if (c.p_init.size() == 1) return std::vector<double>(n, c.p_init.front());
    if (c.p_init.size() != n) throw DomainError("p_init must have one entry or one per SBS");
    return c.p_init;
}

double total_rate(std::span<const double> p, const NetworkTraffic& traffic) {
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) s += p[n] * traffic[n].mean_size / traffic[n].slot;
    return s;
}

bool all_qos_feasible(std::span<const double> p, std::span<const double> theta, const NetworkTraffic& traffic,
                      const LinkGainMatrix& gains, const EcOptions& ec) {
    for (std::size_t n = 0; n < p.size(); ++n) {
        const double c = game_capacity(n, p, theta, traffic, gains, ec);
        if (!qos_feasible(p[n], c, theta[n], traffic[n].mean_size, traffic[n].slot)) return false;
    }
    return true;
}

void require_nonempty(bool nonempty, const char* what) {
    if (!nonempty) throw DomainError(std::string(what) + " must be nonempty");
}

template <class T>
void read_if(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

InterferenceModel interference_model_from_string(const std::string& s) {
    if (s == "unsaturated") return InterferenceModel::Unsaturated;
    if (s == "full" || s == "full_interference") return InterferenceModel::Full;
    throw DomainError("unknown interference model: " + s);
}

std::uint64_t layout_seed(std::uint64_t master, std::size_t n_sbs, std::size_t index) {
    return derive_seed(derive_seed(master, n_sbs), index);
}

NetworkLayout build_layout_with_retry(std::size_t n_sbs, double area_side, std::size_t candidate_ues,
                                      const RadioParams& radio, std::uint64_t seed, std::size_t attempts) {
    std::uint64_t s = seed;
    for (std::size_t a = 0; a < attempts; ++a) {
        try {
            return build_layout(n_sbs, area_side, candidate_ues, radio, s);
        } catch (const LayoutError&) {
            s = derive_seed(seed, a + 1);
        }
    }
    throw LayoutError("no layout with a served UE for every SBS after " + std::to_string(attempts) + " attempts");
}

LinkGainMatrix network_gains(const ExperimentConfig& c) {
    if (!c.gains_db.empty()) return LinkGainMatrix::from_db(c.gains_db, c.radio.bandwidth_hz);
    return layout_gains(c, c.n_sbs, 0, c.radio);
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> ids = {"fig2", "fig3", "fig4", "fig5", "fig6", "custom"};
    if (!ids.count(experiment)) throw DomainError("unknown experiment: " + experiment);
    radio.validate();
    traffic.validate();
    solver.validate();
    sim.validate();
    if (!(area_side > 0.0)) throw DomainError("area_side must be positive");
    if (!(q_threshold >= 0.0)) throw DomainError("q_threshold must be non-negative");
    if (layouts < 1) throw DomainError("layouts must be at least 1");
    for (double d : d_values)
        if (!(d > 0.0 && d < 1.0)) throw DomainError("d values must lie in (0, 1)");
    for (std::size_t n : densities)
        if (n < 1) throw DomainError("densities must be at least 1");
    for (double q : baselines)
        if (!(q >= 0.0 && q <= 1.0)) throw DomainError("baseline probabilities must lie in [0, 1]");

    if (experiment == "fig2") {
        if (gains_db.size() != 2) throw DomainError("fig2 needs a 2x2 gain matrix");
        if (sweep != "mean_size" && sweep != "p") throw DomainError("fig2 sweep must be mean_size or p");
        require_nonempty(!sweep_values.empty(), "sweep_values");
    } else if (experiment == "fig3") {
        require_nonempty(!densities.empty(), "densities");
    } else if (experiment == "fig4" || experiment == "fig5") {
        require_nonempty(!densities.empty(), "densities");
        require_nonempty(!d_values.empty(), "d_values");
    } else if (experiment == "fig6") {
        require_nonempty(!densities.empty(), "densities");
        require_nonempty(!p_init.empty(), "p_init");
        if (!(theta > 0.0 && theta * traffic.mean_size < 1.0)) throw DomainError("theta must lie in (0, 1/L)");
    } else if (experiment == "custom") {
        static const std::set<std::string> entries = {"solve", "max_rate", "simulate", "game"};
        if (!entries.count(entry)) throw DomainError("unknown custom entry: " + entry);
        interference_model_from_string(model);
        if (!grid.is_object()) throw DomainError("grid must be an object of axis value lists");
    }
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "fig2") {
        c.gains_db = kTwoSbsGainsDb;
        c.sweep_values = {100, 250, 500, 1000, 1500, 2000, 2500, 3000};
        c.sim.runs = 200;
        c.sim.slots = 20000;
    } else if (experiment == "fig3") {
        c.densities = {1, 2, 4, 6, 8, 10, 12};
        c.layouts = 4;
        c.sim.runs = 20;
        c.sim.slots = 20000;
    } else if (experiment == "fig4") {
        c.densities = {8};
        c.layouts = 10;
        c.d_values = {0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    } else if (experiment == "fig5") {
        c.densities = range_step(2, 20, 2);
        c.layouts = 10;
        c.d_values = {0.1, 0.3, 0.5};
    } else if (experiment == "fig6") {
        c.radio.bandwidth_hz = 1e5;
        c.theta = 1e-3;
        c.densities = range_step(2, 20, 2);
        c.layouts = 5;
        c.p_init = {0.2};
        c.baselines = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    } else if (experiment == "custom") {
        c.gains_db = kTwoSbsGainsDb;
        c.sim.runs = 20;
        c.sim.slots = 20000;
    } else {
        throw DomainError("unknown experiment: " + experiment);
    }
    return c;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("experiment config must be a JSON object");
    static const std::set<std::string> known = {
        "experiment", "seed",     "gains_db", "radio",     "area_side", "candidate_ues", "layouts",
        "densities",  "traffic",  "q_threshold", "delay_bound", "sweep", "sweep_values", "d_values",
        "theta",      "p_init",   "baselines", "solver",   "sim",       "game",          "entry",
        "model",      "d",        "n_sbs",    "grid",      "jobs"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw DomainError("unknown config key: " + key);

    ExperimentConfig c = default_config(j.value("experiment", std::string("fig2")));
    read_if(j, "seed", c.seed);
    read_if(j, "gains_db", c.gains_db);
    // a network size without an explicit matrix asks for a random layout
    if (j.contains("n_sbs") && !j.contains("gains_db")) c.gains_db.clear();
    if (j.contains("radio")) c.radio = radio_from_json(j.at("radio"));
    read_if(j, "area_side", c.area_side);
    read_if(j, "candidate_ues", c.candidate_ues);
    read_if(j, "layouts", c.layouts);
    read_if(j, "densities", c.densities);
    if (j.contains("traffic")) c.traffic = traffic_from_json(j.at("traffic"));
    read_if(j, "q_threshold", c.q_threshold);
    read_if(j, "delay_bound", c.delay_bound);
    read_if(j, "sweep", c.sweep);
    read_if(j, "sweep_values", c.sweep_values);
    read_if(j, "d_values", c.d_values);
    read_if(j, "theta", c.theta);
    read_if(j, "p_init", c.p_init);
    read_if(j, "baselines", c.baselines);
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        read_if(s, "relative_residual", c.solver.relative_residual);
        read_if(s, "max_iterations", c.solver.max_iterations);
        read_if(s, "epsilon_guard", c.solver.epsilon_guard);
        read_if(s, "theta_rel_tol", c.solver.theta_rel_tol);
        read_if(s, "restore_brackets", c.solver.restore_brackets);
        read_if(s, "quadrature_rel_tol", c.solver.ec.quadrature.rel_tol);
    }
    if (j.contains("sim")) c.sim = sim_config_from_json(j.at("sim"), c.sim);
    if (j.contains("game")) {
        const json& g = j.at("game");
        read_if(g, "tol", c.game.tol);
        read_if(g, "max_iter", c.game.max_iter);
        if (g.contains("schedule")) {
            const auto s = g.at("schedule").get<std::string>();
            if (s == "simultaneous") c.game.schedule = UpdateSchedule::Simultaneous;
            else if (s == "sequential") c.game.schedule = UpdateSchedule::Sequential;
            else throw DomainError("unknown game schedule: " + s);
        }
    }
    read_if(j, "entry", c.entry);
    read_if(j, "model", c.model);
    read_if(j, "d", c.d);
    read_if(j, "n_sbs", c.n_sbs);
    if (j.contains("grid")) c.grid = j.at("grid");
    read_if(j, "jobs", c.jobs);
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c) {
    json solver = {{"relative_residual", c.solver.relative_residual},
                   {"max_iterations", c.solver.max_iterations},
                   {"epsilon_guard", c.solver.epsilon_guard},
                   {"theta_rel_tol", c.solver.theta_rel_tol},
                   {"restore_brackets", c.solver.restore_brackets},
                   {"quadrature_rel_tol", c.solver.ec.quadrature.rel_tol}};
    json sim = to_json(c.sim);
    sim.erase("seed");  // per-cell seeds are derived from the master seed
    sim.erase("q_threshold_bits");
    sim.erase("delay_bound_s");
    return {{"experiment", c.experiment},
            {"seed", c.seed},
            {"gains_db", c.gains_db},
            {"radio", to_json(c.radio)},
            {"area_side", c.area_side},
            {"candidate_ues", c.candidate_ues},
            {"layouts", c.layouts},
            {"densities", c.densities},
            {"traffic", to_json(c.traffic)},
            {"q_threshold", c.q_threshold},
            {"delay_bound", c.delay_bound},
            {"sweep", c.sweep},
            {"sweep_values", c.sweep_values},
            {"d_values", c.d_values},
            {"theta", c.theta},
            {"p_init", c.p_init},
            {"baselines", c.baselines},
            {"solver", solver},
            {"sim", sim},
            {"game",
             {{"tol", c.game.tol},
              {"max_iter", c.game.max_iter},
              {"schedule", c.game.schedule == UpdateSchedule::Simultaneous ? "simultaneous" : "sequential"}}},
            {"entry", c.entry},
            {"model", c.model},
            {"d", c.d},
            {"n_sbs", c.n_sbs},
            {"grid", c.grid}};
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("no CSV column " + name);
    return static_cast<std::size_t>(it - header.begin());
}

void write_csv(std::ostream& out, const ExperimentConfig& config, const CsvTable& table) {
    out << "# experiment: " << config.experiment << '\n';
    out << "# seed: " << config.seed << '\n';
    out << "# config: " << to_json(config).dump() << '\n';
    auto write_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) write_row(row);
    out << "# cells: " << table.cells << ", failed: " << table.failed_cells << '\n';
}

CsvTable run_fig2(const ExperimentConfig& c) {
    c.validate();
    if (c.gains_db.size() != 2) throw DomainError("fig2 needs a 2x2 gain matrix");
    const auto gains = LinkGainMatrix::from_db(c.gains_db, c.radio.bandwidth_hz);
    const SimConfig sim = sim_with_seed(c, c.seed);

    struct Cell {
        NetworkTraffic traffic;
        std::vector<double> analytic_unsat, analytic_full;
        Status unsat_status, full_status;
        SimStats sim_unsat, sim_full;
    };
    std::vector<Cell> cells(c.sweep_values.size());
    parallel_for(cells.size(), c.jobs, [&](std::size_t i) {
        Cell& cell = cells[i];
        TrafficModel t = c.traffic;
        (c.sweep == "p" ? t.p : t.mean_size) = c.sweep_values[i];
        cell.traffic = uniform_traffic(t, 2);
        cell.analytic_unsat = solve_violations(gains, cell.traffic, c, InterferenceModel::Unsaturated, cell.unsat_status);
        cell.analytic_full = solve_violations(gains, cell.traffic, c, InterferenceModel::Full, cell.full_status);
        const auto unsat_runs = simulate(gains, cell.traffic, sim, InterferenceModel::Unsaturated);
        const auto full_runs = simulate(gains, cell.traffic, sim, InterferenceModel::Full);
        cell.sim_unsat = aggregate(unsat_runs);
        cell.sim_full = aggregate(full_runs);
    });

    CsvTable table;
    table.header = {"sweep_param", "sweep_value", "mean_rate_bps", "ue", "series", "violation", "ci_half_width",
                    "status"};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& cell = cells[i];
        ++table.cells;
        if (!cell.unsat_status.ok() || !cell.full_status.ok()) ++table.failed_cells;
        for (std::size_t ue = 0; ue < 2; ++ue) {
            auto row = [&](const char* series, double value, const std::string& hw, const Status& st) {
                table.rows.push_back({c.sweep, format_number(c.sweep_values[i]),
                                      format_number(cell.traffic[ue].mean_rate()), std::to_string(ue + 1), series,
                                      format_number(value), hw, st.text});
            };
            row("analytic_unsat", cell.analytic_unsat[ue], "", cell.unsat_status);
            row("sim_unsat", cell.sim_unsat.sbs[ue].violation.mean, half_width_text(cell.sim_unsat.sbs[ue].violation),
                {});
            row("analytic_full", cell.analytic_full[ue], "", cell.full_status);
            row("sim_full", cell.sim_full.sbs[ue].violation.mean, half_width_text(cell.sim_full.sbs[ue].violation),
                {});
        }
    }
    return table;
}

CsvTable run_fig3(const ExperimentConfig& c) {
    c.validate();
    struct Cell {
        std::size_t n_sbs = 0;
        std::size_t layout = 0;
        Status layout_status, unsat_status, full_status;
        std::vector<double> analytic_unsat, analytic_full;
        SimStats sim_unsat, sim_full;
        std::vector<double> run_avg_unsat, run_avg_full;  // per-run mean over SBSs
    };
    std::vector<Cell> cells;
    for (std::size_t n : c.densities)
        for (std::size_t l = 0; l < c.layouts; ++l) cells.push_back({n, l, {}, {}, {}, {}, {}, {}, {}, {}, {}});

    parallel_for(cells.size(), c.jobs, [&](std::size_t i) {
        Cell& cell = cells[i];
        std::optional<LinkGainMatrix> gains;
        cell.layout_status = guarded([&] { gains = layout_gains(c, cell.n_sbs, cell.layout, c.radio); });
        if (!cell.layout_status.ok()) return;
        const auto traffic = uniform_traffic(c.traffic, cell.n_sbs);
        cell.analytic_unsat = solve_violations(*gains, traffic, c, InterferenceModel::Unsaturated, cell.unsat_status);
        cell.analytic_full = solve_violations(*gains, traffic, c, InterferenceModel::Full, cell.full_status);
        const SimConfig sim = sim_with_seed(c, derive_seed(layout_seed(c.seed, cell.n_sbs, cell.layout), 1));
        auto run_avg = [&](const std::vector<RunStats>& runs) {
            std::vector<double> out;
            for (const auto& r : runs) {
                double s = 0.0;
                for (const auto& b : r.sbs) s += b.violation;
                out.push_back(s / static_cast<double>(r.sbs.size()));
            }
            return out;
        };
        const auto unsat_runs = simulate(*gains, traffic, sim, InterferenceModel::Unsaturated);
        const auto full_runs = simulate(*gains, traffic, sim, InterferenceModel::Full);
        cell.sim_unsat = aggregate(unsat_runs);
        cell.sim_full = aggregate(full_runs);
        cell.run_avg_unsat = run_avg(unsat_runs);
        cell.run_avg_full = run_avg(full_runs);
    });

    CsvTable table;
    table.header = {"n_sbs", "layout", "sbs", "series", "violation", "ci_half_width", "status"};
    for (std::size_t n : c.densities) {
        std::vector<double> an_unsat, an_full, pooled_unsat, pooled_full;
        std::size_t used_unsat = 0, used_full = 0;
        for (const Cell& cell : cells) {
            if (cell.n_sbs != n) continue;
            ++table.cells;
            const std::string layout = std::to_string(cell.layout);
            if (!cell.layout_status.ok()) {
                ++table.failed_cells;
                table.rows.push_back({std::to_string(n), layout, "", "layout", "nan", "", cell.layout_status.text});
                continue;
            }
            if (!cell.unsat_status.ok() || !cell.full_status.ok()) ++table.failed_cells;
            for (std::size_t s = 0; s < n; ++s) {
                auto row = [&](const char* series, double v, const std::string& hw, const Status& st) {
                    table.rows.push_back(
                        {std::to_string(n), layout, std::to_string(s + 1), series, format_number(v), hw, st.text});
                };
                row("analytic_unsat", cell.analytic_unsat[s], "", cell.unsat_status);
                row("sim_unsat", cell.sim_unsat.sbs[s].violation.mean,
                    half_width_text(cell.sim_unsat.sbs[s].violation), {});
                row("analytic_full", cell.analytic_full[s], "", cell.full_status);
                row("sim_full", cell.sim_full.sbs[s].violation.mean, half_width_text(cell.sim_full.sbs[s].violation),
                    {});
            }
            // Averages pool only layouts with an analytic solution, so both
            // series of a model cover the same networks.
            if (cell.unsat_status.ok()) {
                ++used_unsat;
                an_unsat.insert(an_unsat.end(), cell.analytic_unsat.begin(), cell.analytic_unsat.end());
                pooled_unsat.insert(pooled_unsat.end(), cell.run_avg_unsat.begin(), cell.run_avg_unsat.end());
            }
            if (cell.full_status.ok()) {
                ++used_full;
                an_full.insert(an_full.end(), cell.analytic_full.begin(), cell.analytic_full.end());
                pooled_full.insert(pooled_full.end(), cell.run_avg_full.begin(), cell.run_avg_full.end());
            }
        }
        auto summary = [&](const char* series, double v, const std::string& hw, std::size_t used) {
            const std::string status = used == c.layouts ? "ok"
                                       : used == 0       ? "infeasible"
                                                         : "partial " + std::to_string(used) + "/" +
                                                               std::to_string(c.layouts);
            table.rows.push_back({std::to_string(n), "all", "all", series, format_number(v), hw, status});
        };
        const Estimate su = estimate(pooled_unsat), sf = estimate(pooled_full);
        summary("analytic_unsat", mean_of(an_unsat), "", used_unsat);
        summary("sim_unsat", used_unsat ? su.mean : kNaN, half_width_text(su), used_unsat);
        summary("analytic_full", mean_of(an_full), "", used_full);
        summary("sim_full", used_full ? sf.mean : kNaN, half_width_text(sf), used_full);
    }
    return table;
}

namespace {

// Shared by the d-sweep and density-sweep rate figures.
CsvTable max_rate_table(const ExperimentConfig& c) {
    c.validate();
    const InterferenceModel models[] = {InterferenceModel::Unsaturated, InterferenceModel::Full};
    struct Cell {
        std::size_t n_sbs = 0;
        std::size_t layout = 0;
        // [d][model] -> per-SBS rates; empty on failure
        std::vector<std::array<std::vector<double>, 2>> rates;
        std::vector<std::array<Status, 2>> status;
    };
    std::vector<Cell> cells;
    for (std::size_t n : c.densities)
        for (std::size_t l = 0; l < c.layouts; ++l) cells.push_back({n, l, {}, {}});

    parallel_for(cells.size(), c.jobs, [&](std::size_t i) {
        Cell& cell = cells[i];
        cell.rates.resize(c.d_values.size());
        cell.status.resize(c.d_values.size());
        std::optional<LinkGainMatrix> gains;
        const Status layout_status = guarded([&] { gains = layout_gains(c, cell.n_sbs, cell.layout, c.radio); });
        const auto traffic = uniform_traffic(c.traffic, cell.n_sbs);
        for (std::size_t k = 0; k < c.d_values.size(); ++k)
            for (std::size_t m = 0; m < 2; ++m) {
                if (!layout_status.ok()) {
                    cell.status[k][m] = layout_status;
                    continue;
                }
                cell.status[k][m] =
                    guarded([&] { cell.rates[k][m] = max_rates(*gains, traffic, c.d_values[k], c, models[m]); });
            }
    });

    CsvTable table;
    table.header = {"n_sbs",       "d",       "model",   "total_rate_bps", "total_ci_half_width", "per_sbs_rate_bps",
                    "per_sbs_ci_half_width", "layouts", "failed_layouts", "status"};
    for (std::size_t n : c.densities)
        for (std::size_t k = 0; k < c.d_values.size(); ++k)
            for (std::size_t m = 0; m < 2; ++m) {
                std::vector<double> totals;
                std::size_t failed = 0;
                for (const Cell& cell : cells) {
                    if (cell.n_sbs != n) continue;
                    if (!cell.status[k][m].ok()) {
                        ++failed;
                        continue;
                    }
                    const auto& r = cell.rates[k][m];
                    totals.push_back(std::accumulate(r.begin(), r.end(), 0.0));
                }
                std::vector<double> per_sbs;
                for (double t : totals) per_sbs.push_back(t / static_cast<double>(n));
                const Estimate et = estimate(totals), ep = estimate(per_sbs);
                ++table.cells;
                if (totals.empty()) ++table.failed_cells;
                table.rows.push_back({std::to_string(n), format_number(c.d_values[k]), to_string(models[m]),
                                      format_number(totals.empty() ? kNaN : et.mean), half_width_text(et),
                                      format_number(per_sbs.empty() ? kNaN : ep.mean), half_width_text(ep),
                                      std::to_string(c.layouts), std::to_string(failed),
                                      totals.empty() ? "infeasible" : "ok"});
            }
    return table;
}

}  // namespace

CsvTable run_fig4(const ExperimentConfig& c) { return max_rate_table(c); }

CsvTable run_fig5(const ExperimentConfig& c) { return max_rate_table(c); }

CsvTable run_fig6(const ExperimentConfig& c) {
    c.validate();
    struct Baseline {
        double total_rate = 0.0, total_utility = 0.0;
        bool feasible = false;
    };
    struct Cell {
        std::size_t n_sbs = 0;
        std::size_t layout = 0;
        Status status;
        GameState state;
        bool ne_feasible = false;
        NetworkTraffic traffic;
        std::vector<Baseline> baselines;
    };
    std::vector<Cell> cells;
    for (std::size_t n : c.densities)
        for (std::size_t l = 0; l < c.layouts; ++l) cells.push_back({n, l, {}, {}, false, {}, {}});

    GameOptions options = c.game;
    options.jobs = 1;
    parallel_for(cells.size(), c.jobs, [&](std::size_t i) {
        Cell& cell = cells[i];
        cell.status = guarded([&] {
            const auto gains = layout_gains(c, cell.n_sbs, cell.layout, c.radio);
            cell.traffic = uniform_traffic(c.traffic, cell.n_sbs);
            const std::vector<double> theta(cell.n_sbs, c.theta);
            cell.state = find_ne(theta, cell.traffic, gains, initial_strategy(c, cell.n_sbs), options);
            cell.ne_feasible = all_qos_feasible(cell.state.p, theta, cell.traffic, gains, options.ec);
            for (double q : c.baselines) {
                const std::vector<double> p(cell.n_sbs, q);
                cell.baselines.push_back({total_rate(p, cell.traffic), total_utility(p, theta, cell.traffic),
                                          all_qos_feasible(p, theta, cell.traffic, gains, options.ec)});
            }
        });
    });

    CsvTable table;
    table.header = {"kind",          "n_sbs",        "layout",    "iteration", "strategy", "mean_p",
                    "total_rate_bps", "total_utility", "max_change", "qos_feasible", "status"};
    auto yes_no = [](bool b) { return std::string(b ? "true" : "false"); };
    for (std::size_t n : c.densities) {
        std::vector<double> ne_rate, ne_util;
        std::vector<std::vector<double>> base_util(c.baselines.size()), base_rate(c.baselines.size());
        std::vector<std::size_t> base_feasible(c.baselines.size(), 0);
        std::size_t ok_layouts = 0;
        for (const Cell& cell : cells) {
            if (cell.n_sbs != n) continue;
            ++table.cells;
            const std::string ns = std::to_string(n), ls = std::to_string(cell.layout);
            if (!cell.status.ok()) {
                ++table.failed_cells;
                table.rows.push_back({"ne", ns, ls, "", "ne", "nan", "nan", "nan", "", "", cell.status.text});
                continue;
            }
            ++ok_layouts;
            if (cell.layout == 0) {
                for (const auto& e : cell.state.trace)
                    table.rows.push_back({"trace", ns, ls, std::to_string(e.iteration), "best_response",
                                          format_number(mean_of(e.p)), format_number(total_rate(e.p, cell.traffic)),
                                          format_number(e.total_utility),
                                          e.max_change ? format_number(*e.max_change) : "", "", "ok"});
            }
            const double rate = total_rate(cell.state.p, cell.traffic);
            const double util = cell.state.trace.back().total_utility;
            if (!cell.state.converged) ++table.failed_cells;
            table.rows.push_back({"ne", ns, ls, std::to_string(cell.state.iterations), "ne",
                                  format_number(mean_of(cell.state.p)), format_number(rate), format_number(util),
                                  format_number(cell.state.trace.back().max_change.value_or(0.0)),
                                  yes_no(cell.ne_feasible), cell.state.converged ? "ok" : "not_converged"});
            ne_rate.push_back(rate);
            ne_util.push_back(util);
            for (std::size_t b = 0; b < c.baselines.size(); ++b) {
                const Baseline& base = cell.baselines[b];
                table.rows.push_back({"baseline", ns, ls, "", "uniform_" + format_number(c.baselines[b]),
                                      format_number(c.baselines[b]), format_number(base.total_rate),
                                      format_number(base.total_utility), "", yes_no(base.feasible), "ok"});
                base_util[b].push_back(base.total_utility);
                base_rate[b].push_back(base.total_rate);
                if (base.feasible) ++base_feasible[b];
            }
        }
        const std::string ns = std::to_string(n);
        const std::string status = ok_layouts ? "ok" : "failed";
        table.rows.push_back({"summary", ns, "all", "", "ne", "", format_number(mean_of(ne_rate)),
                              format_number(mean_of(ne_util)), "", "", status});
        for (std::size_t b = 0; b < c.baselines.size(); ++b) {
            // qos_feasible here is the fraction of layouts where the baseline meets every constraint
            const double frac =
                ok_layouts ? static_cast<double>(base_feasible[b]) / static_cast<double>(ok_layouts) : kNaN;
            table.rows.push_back({"summary", ns, "all", "", "uniform_" + format_number(c.baselines[b]),
                                  format_number(c.baselines[b]), format_number(mean_of(base_rate[b])),
                                  format_number(mean_of(base_util[b])), "", format_number(frac), status});
        }
    }
    return table;
}

CsvTable run_custom(const ExperimentConfig& c) {
    c.validate();
    static const std::set<std::string> numeric_axes = {"p",     "mean_size", "d",           "theta", "bandwidth_hz",
                                                       "n_sbs", "layout",    "q_threshold", "seed"};
    std::vector<std::string> axes;
    std::vector<std::vector<json>> values;
    for (const auto& [key, list] : c.grid.items()) {
        if (key != "model" && !numeric_axes.count(key)) throw DomainError("unknown grid axis: " + key);
        if (!list.is_array()) throw DomainError("grid axis " + key + " must be a list");
        axes.push_back(key);
        values.emplace_back(list.begin(), list.end());
    }

    std::size_t total = axes.empty() ? 0 : 1;
    for (const auto& v : values) total *= v.size();

    CsvTable table;
    table.header = {"cell"};
    table.header.insert(table.header.end(), axes.begin(), axes.end());
    table.header.push_back("status");
    if (c.entry == "solve")
        for (const char* h : {"theta_star", "violation", "idle_probability", "capacity_bps", "iterations", "converged"})
            table.header.push_back(h);
    else if (c.entry == "max_rate")
        for (const char* h : {"rate_bps", "total_rate_bps"}) table.header.push_back(h);
    else if (c.entry == "simulate")
        for (const char* h : {"violation", "violation_ci_half_width", "busy_fraction", "mean_queue_bits"})
            table.header.push_back(h);
    else
        for (const char* h : {"p", "total_utility", "iterations", "converged"}) table.header.push_back(h);
    const std::size_t n_outputs = table.header.size() - axes.size() - 2;

    std::vector<std::vector<std::string>> rows(total);
    std::vector<bool> failed(total, false);
    parallel_for(total, c.jobs, [&](std::size_t cell) {
        // mixed-radix decode, last axis fastest
        std::vector<json> point(axes.size());
        std::size_t rest = cell;
        for (std::size_t a = axes.size(); a-- > 0;) {
            point[a] = values[a][rest % values[a].size()];
            rest /= values[a].size();
        }
        ExperimentConfig cc = c;
        std::optional<std::size_t> layout_index;
        std::vector<std::string> row = {std::to_string(cell)};
        for (std::size_t a = 0; a < axes.size(); ++a) {
            row.push_back(point[a].is_string() ? point[a].get<std::string>() : format_number(point[a].get<double>()));
        }
        std::vector<std::string> outputs;
        const Status status = guarded([&] {
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const std::string& axis = axes[a];
                const json& v = point[a];
                if (axis == "model") cc.model = v.get<std::string>();
                else if (axis == "p") cc.traffic.p = v.get<double>();
                else if (axis == "mean_size") cc.traffic.mean_size = v.get<double>();
                else if (axis == "d") cc.d = v.get<double>();
                else if (axis == "theta") cc.theta = v.get<double>();
                else if (axis == "bandwidth_hz") cc.radio.bandwidth_hz = v.get<double>();
                else if (axis == "n_sbs") cc.n_sbs = v.get<std::size_t>();
                else if (axis == "layout") layout_index = v.get<std::size_t>();
                else if (axis == "q_threshold") cc.q_threshold = v.get<double>();
                else if (axis == "seed") cc.seed = v.get<std::uint64_t>();
            }
            cc.traffic.validate();
            const InterferenceModel model = interference_model_from_string(cc.model);
            const bool use_layout = c.gains_db.empty() || layout_index || c.grid.contains("n_sbs");
            const LinkGainMatrix gains = use_layout ? layout_gains(cc, cc.n_sbs, layout_index.value_or(0), cc.radio)
                                                    : LinkGainMatrix::from_db(cc.gains_db, cc.radio.bandwidth_hz);
            const std::size_t n = gains.size();
            const auto traffic = uniform_traffic(cc.traffic, n);
            if (c.entry == "solve") {
                const SolveResult r = model == InterferenceModel::Full
                                          ? solve_qos_exponents_full_interference(gains, traffic, solver_for(cc, model))
                                          : solve_qos_exponents(gains, traffic, solver_for(cc, model));
                std::vector<double> viol;
                for (std::size_t k = 0; k < n; ++k)
                    viol.push_back(queue_violation_prob(r.theta_star[k], traffic[k], cc.q_threshold));
                outputs = {join(r.theta_star), join(viol),         join(r.idle_profile.idle),
                           join(r.capacity),   std::to_string(r.iterations), r.converged ? "true" : "false"};
                if (!r.converged) throw std::runtime_error("solver did not converge");
            } else if (c.entry == "max_rate") {
                if (!(cc.d > 0.0 && cc.d < 1.0)) throw DomainError("d must lie in (0, 1)");
                const auto rates = max_rates(gains, traffic, cc.d, cc, model);
                outputs = {join(rates), format_number(std::accumulate(rates.begin(), rates.end(), 0.0))};
            } else if (c.entry == "simulate") {
                const SimStats s = aggregate(simulate(gains, traffic, sim_with_seed(cc, cc.seed), model));
                std::vector<double> v, hw, busy, queue;
                for (const auto& b : s.sbs) {
                    v.push_back(b.violation.mean);
                    hw.push_back(b.violation.half_width.value_or(kNaN));
                    busy.push_back(b.busy_fraction.mean);
                    queue.push_back(b.mean_queue.mean);
                }
                outputs = {join(v), join(hw), join(busy), join(queue)};
            } else {
                const std::vector<double> theta(n, cc.theta);
                GameOptions options = cc.game;
                options.jobs = 1;
                const GameState g = find_ne(theta, traffic, gains, initial_strategy(cc, n), options);
                outputs = {join(g.p), format_number(total_utility(g.p, theta, traffic)), std::to_string(g.iterations),
                           g.converged ? "true" : "false"};
                if (!g.converged) throw std::runtime_error("best-response iteration did not converge");
            }
        });
        outputs.resize(n_outputs);
        row.push_back(status.text);
        row.insert(row.end(), outputs.begin(), outputs.end());
        rows[cell] = std::move(row);
        failed[cell] = !status.ok();
    });

    table.rows = std::move(rows);
    table.cells = total;
    table.failed_cells = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), true));
    return table;
}

CsvTable run_experiment(const ExperimentConfig& c) {
    if (c.experiment == "fig2") return run_fig2(c);
    if (c.experiment == "fig3") return run_fig3(c);
    if (c.experiment == "fig4") return run_fig4(c);
    if (c.experiment == "fig5") return run_fig5(c);
    if (c.experiment == "fig6") return run_fig6(c);
    if (c.experiment == "custom") return run_custom(c);
    throw DomainError("unknown experiment: " + c.experiment);
}

}  // namespace ecudn
