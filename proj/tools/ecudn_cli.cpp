// Command-line front end: single-shot solve/simulate/game runs and the
// reproducible figure sweeps.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "ecudn/errors.hpp"
#include "ecudn/experiments.hpp"
#include "ecudn/serialize.hpp"

using namespace ecudn;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::optional<std::uint64_t> runs;
    std::optional<std::uint64_t> slots;
    std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
    cmd->add_option("--out", o.out_path, "output file (stdout when omitted)");
    cmd->add_option("--runs", o.runs, "simulation replications (overrides the config)");
    cmd->add_option("--slots", o.slots, "slots per replication (overrides the config)");
    cmd->add_option("--jobs", o.jobs, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
}

ExperimentConfig load_config(const CommonOptions& o, const std::string& experiment) {
    json j = json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw std::runtime_error("cannot open " + o.config_path);
        j = json::parse(in, nullptr, true, true);
    }
    if (j.contains("experiment") && j.at("experiment").get<std::string>() != experiment)
        throw DomainError("config is for experiment '" + j.at("experiment").get<std::string>() + "', not '" +
                          experiment + "'");
    j["experiment"] = experiment;
    if (o.seed) j["seed"] = *o.seed;
    if (o.runs) j["sim"]["runs"] = *o.runs;
    if (o.slots) j["sim"]["slots"] = *o.slots;
    j["jobs"] = o.jobs;
    return config_from_json(j);
}

// Writes to --out or stdout.
template <class Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    write(out);
}

NetworkTraffic traffic_for(const ExperimentConfig& c, std::size_t n) { return NetworkTraffic(n, c.traffic); }

SimConfig sim_for(const ExperimentConfig& c) {
    SimConfig s = c.sim;
    s.seed = c.seed;
    s.q_threshold = c.q_threshold;
    s.delay_bound = c.delay_bound;
    return s;
}

void cmd_solve(const CommonOptions& o) {
    const ExperimentConfig c = load_config(o, "custom");
    const LinkGainMatrix gains = network_gains(c);
    const NetworkTraffic traffic = traffic_for(c, gains.size());
    SolverConfig solver = c.solver;
    solver.model = interference_model_from_string(c.model);
    const SolveResult r = solver.model == InterferenceModel::Full
                              ? solve_qos_exponents_full_interference(gains, traffic, solver)
                              : solve_qos_exponents(gains, traffic, solver);
    json report = solve_report(gains, traffic, solver, r);
    json viol = json::array();
    for (std::size_t n = 0; n < gains.size(); ++n)
        viol.push_back(queue_violation_prob(r.theta_star[n], traffic[n], c.q_threshold));
    report["result"]["queue_violation"] = viol;
    report["input"]["q_threshold_bits"] = c.q_threshold;
    emit(o.out_path, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
}

void cmd_simulate(const CommonOptions& o, const std::string& raw_out, const std::string& from_raw) {
    const ExperimentConfig c = load_config(o, "custom");
    std::vector<RunStats> runs;
    json input = json::object();
    if (!from_raw.empty()) {
        std::ifstream in(from_raw);
        if (!in) throw std::runtime_error("cannot open " + from_raw);
        runs = read_runs_jsonl(in);
        if (runs.empty()) throw DomainError(from_raw + " holds no runs");
        input["raw"] = from_raw;
    } else {
        const LinkGainMatrix gains = network_gains(c);
        const NetworkTraffic traffic = traffic_for(c, gains.size());
        const SimConfig sim = sim_for(c);
        runs = simulate(gains, traffic, sim, interference_model_from_string(c.model), c.jobs);
        json t = json::array();
        for (const auto& x : traffic) t.push_back(to_json(x));
        input = {{"gains", to_json(gains)}, {"traffic", t}, {"sim", to_json(sim)}, {"model", c.model}};
    }
    if (!raw_out.empty()) {
        std::ofstream out(raw_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + raw_out);
        write_runs_jsonl(out, runs);
    }
    const json report = {{"input", input}, {"result", to_json(aggregate(runs))}};
    emit(o.out_path, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
}

void cmd_game(const CommonOptions& o, bool trace_only) {
    const ExperimentConfig c = load_config(o, "custom");
    const LinkGainMatrix gains = network_gains(c);
    const std::size_t n = gains.size();
    const NetworkTraffic traffic = traffic_for(c, n);
    const std::vector<double> theta(n, c.theta);
    std::vector<double> p0 = c.p_init.size() == 1 ? std::vector<double>(n, c.p_init.front()) : c.p_init;
    GameOptions options = c.game;
    options.jobs = c.jobs;
    const GameState s = find_ne(theta, traffic, gains, p0, options);
    if (trace_only) {
        emit(o.out_path, [&](std::ostream& out) { out << trace_csv(s); });
        return;
    }
    const json report = {{"input", {{"gains", to_json(gains)}, {"theta", theta}, {"p_init", p0}}},
                         {"result",
                          {{"p", s.p},
                           {"utilities", s.utilities},
                           {"total_utility", total_utility(s.p, theta, traffic)},
                           {"iterations", s.iterations},
                           {"converged", s.converged}}}};
    emit(o.out_path, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
}

void cmd_experiment(const CommonOptions& o, const std::string& experiment) {
    const ExperimentConfig c = load_config(o, experiment);
    const CsvTable table = run_experiment(c);
    emit(o.out_path, [&](std::ostream& out) { write_csv(out, c, table); });
    if (table.failed_cells) std::cerr << table.failed_cells << " of " << table.cells << " cells failed\n";
}

void cmd_layout(const CommonOptions& o) {
    const ExperimentConfig c = load_config(o, "custom");
    const NetworkLayout layout = build_layout_with_retry(c.n_sbs, c.area_side, c.candidate_ues, c.radio,
                                                         layout_seed(c.seed, c.n_sbs, 0));
    const json report = {{"layout", to_json(layout)}, {"gains", to_json(link_gains(layout))}};
    emit(o.out_path, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective-capacity analysis and simulation of small-cell networks with unsaturated traffic"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string raw_out, from_raw, figure;
    bool trace_only = false;

    auto* solve = app.add_subcommand("solve", "solve the coupled QoS exponents of a network");
    add_common(solve, common);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo queue simulation");
    add_common(sim, common);
    sim->add_option("--raw-out", raw_out, "write per-run statistics as JSON lines");
    sim->add_option("--from-raw", from_raw, "aggregate previously written per-run statistics")
        ->check(CLI::ExistingFile);

    auto* game = app.add_subcommand("game", "best-response iteration to a Nash equilibrium");
    add_common(game, common);
    game->add_flag("--trace", trace_only, "emit the iteration trace as CSV");

    auto* fig = app.add_subcommand("figure", "run a figure sweep and write CSV");
    add_common(fig, common);
    fig->add_option("name", figure, "fig2 | fig3 | fig4 | fig5 | fig6")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6"}));

    auto* custom = app.add_subcommand("custom", "run a parameter grid and write CSV");
    add_common(custom, common);

    auto* layout = app.add_subcommand("layout", "draw a random network layout");
    add_common(layout, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) cmd_solve(common);
        else if (sim->parsed()) cmd_simulate(common, raw_out, from_raw);
        else if (game->parsed()) cmd_game(common, trace_only);
        else if (fig->parsed()) cmd_experiment(common, figure);
        else if (custom->parsed()) cmd_experiment(common, "custom");
        else if (layout->parsed()) cmd_layout(common);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
