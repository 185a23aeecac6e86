#include "ecudn/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>

#include "ecudn/errors.hpp"

namespace ecudn {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int precision = 10; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

namespace {

// JSON has no NaN; raw statistics use null for "undefined".
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json points_to_json(const std::vector<Point>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x, p.y});
    return arr;
}

std::vector<Point> points_from_json(const json& j) {
    std::vector<Point> out;
    for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return out;
}

}  // namespace

const char* to_string(InterferenceModel m) {
    return m == InterferenceModel::Full ? "full_interference" : "unsaturated";
}

json to_json(const RadioParams& r) {
    return {{"tx_power_dbm", r.tx_power_dbm},         {"noise_density_dbm_hz", r.noise_density_dbm_hz},
            {"bandwidth_hz", r.bandwidth_hz},         {"pathloss_offset_db", r.pathloss_offset_db},
            {"pathloss_slope_db", r.pathloss_slope_db}, {"min_distance_m", r.min_distance_m}};
}

RadioParams radio_from_json(const json& j) {
    RadioParams r;
    r.tx_power_dbm = j.value("tx_power_dbm", r.tx_power_dbm);
    r.noise_density_dbm_hz = j.value("noise_density_dbm_hz", r.noise_density_dbm_hz);
    r.bandwidth_hz = j.value("bandwidth_hz", r.bandwidth_hz);
    r.pathloss_offset_db = j.value("pathloss_offset_db", r.pathloss_offset_db);
    r.pathloss_slope_db = j.value("pathloss_slope_db", r.pathloss_slope_db);
    r.min_distance_m = j.value("min_distance_m", r.min_distance_m);
    r.validate();
    return r;
}

json to_json(const NetworkLayout& layout) {
    return {{"area_side", layout.area_side},
            {"radio", to_json(layout.radio)},
            {"sbs_positions", points_to_json(layout.sbs_positions)},
            {"served_ue_positions", points_to_json(layout.served_ue_positions)}};
}

NetworkLayout layout_from_json(const json& j) {
    NetworkLayout layout;
    layout.area_side = j.at("area_side").get<double>();
    layout.radio = radio_from_json(j.value("radio", json::object()));
    layout.sbs_positions = points_from_json(j.at("sbs_positions"));
    layout.served_ue_positions = points_from_json(j.at("served_ue_positions"));
    layout.validate();
    return layout;
}

json to_json(const LinkGainMatrix& gains) {
    return {{"n", gains.size()},
            {"bandwidth_hz", gains.bandwidth()},
            {"convention", "beta_bar[j][n]: mean SNR from SBS j at the UE served by SBS n (linear)"},
            {"beta_bar", gains.rows()}};
}

LinkGainMatrix gains_from_json(const json& j) {
    const double bandwidth = j.at("bandwidth_hz").get<double>();
    if (j.contains("beta_bar_db"))
        return LinkGainMatrix::from_db(j.at("beta_bar_db").get<std::vector<std::vector<double>>>(), bandwidth);
    return LinkGainMatrix::from_linear(j.at("beta_bar").get<std::vector<std::vector<double>>>(), bandwidth);
}

json to_json(const TrafficModel& t) { return {{"p", t.p}, {"mean_size_bits", t.mean_size}, {"slot_s", t.slot}}; }

TrafficModel traffic_from_json(const json& j) {
    TrafficModel t;
    t.p = j.value("p", t.p);
    t.mean_size = j.value("mean_size_bits", t.mean_size);
    t.slot = j.value("slot_s", t.slot);
    t.validate();
    return t;
}

json to_json(const SolverConfig& c) {
    json j = {{"relative_residual", c.relative_residual}, {"max_iterations", c.max_iterations},
              {"epsilon_guard", c.epsilon_guard},         {"theta_rel_tol", c.theta_rel_tol},
              {"restore_brackets", c.restore_brackets},   {"model", to_string(c.model)},
              {"quadrature_rel_tol", c.ec.quadrature.rel_tol}};
    if (c.start) j["start"] = *c.start;
    return j;
}

json to_json(const SolveResult& r) {
    return {{"model", to_string(r.model)},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"evaluations", r.evaluations},
            {"bracket_restores", r.bracket_restores},
            {"at_guard", r.at_guard},
            {"theta_star", r.theta_star},
            {"residuals", r.residuals},
            {"tolerances", r.tolerances},
            {"effective_capacity", r.capacity},
            {"effective_bandwidth", r.bandwidth},
            {"idle_probability", r.idle_profile.idle},
            {"nonempty_probability", r.idle_profile.eta}};
}

json solve_report(const LinkGainMatrix& gains, const NetworkTraffic& traffic, const SolverConfig& config,
                  const SolveResult& result) {
    json t = json::array();
    for (const auto& x : traffic) t.push_back(to_json(x));
    return {{"input", {{"gains", to_json(gains)}, {"traffic", t}, {"solver", to_json(config)}}},
            {"result", to_json(result)}};
}

json to_json(const SimConfig& c) {
    return {{"slots", c.slots},
            {"runs", c.runs},
            {"warmup", c.effective_warmup()},
            {"seed", c.seed},
            {"q_threshold_bits", c.q_threshold},
            {"delay_bound_s", c.delay_bound},
            {"record_sinr", c.record_sinr},
            {"sinr_reservoir", c.sinr_reservoir}};
}

SimConfig sim_config_from_json(const json& j, SimConfig base) {
    base.slots = j.value("slots", base.slots);
    base.runs = j.value("runs", base.runs);
    if (j.contains("warmup")) base.warmup = j.at("warmup").get<std::uint64_t>();
    base.seed = j.value("seed", base.seed);
    base.q_threshold = j.value("q_threshold_bits", base.q_threshold);
    base.delay_bound = j.value("delay_bound_s", base.delay_bound);
    base.record_sinr = j.value("record_sinr", base.record_sinr);
    base.sinr_reservoir = j.value("sinr_reservoir", base.sinr_reservoir);
    return base;
}

json to_json(const RunStats& r) {
    json sbs = json::array();
    for (const auto& s : r.sbs) {
        json e = {{"violation", s.violation},
                  {"mean_queue", s.mean_queue},
                  {"mean_delay", number_or_null(s.mean_delay)},
                  {"delay_violation", number_or_null(s.delay_violation)},
                  {"busy_fraction", s.busy_fraction},
                  {"throughput", s.throughput},
                  {"arrived_bits", s.arrived_bits},
                  {"served_bits", s.served_bits},
                  {"final_queue", s.final_queue}};
        if (!s.sinr.empty()) e["sinr"] = s.sinr;
        sbs.push_back(std::move(e));
    }
    return {{"run", r.run_index}, {"sbs", sbs}};
}

RunStats run_stats_from_json(const json& j) {
    RunStats r;
    r.run_index = j.at("run").get<std::uint64_t>();
    for (const auto& e : j.at("sbs")) {
        SbsRunStats s;
        s.violation = e.at("violation").get<double>();
        s.mean_queue = e.at("mean_queue").get<double>();
        s.mean_delay = number_or_nan(e.at("mean_delay"));
        s.delay_violation = number_or_nan(e.at("delay_violation"));
        s.busy_fraction = e.at("busy_fraction").get<double>();
        s.throughput = e.at("throughput").get<double>();
        s.arrived_bits = e.at("arrived_bits").get<double>();
        s.served_bits = e.at("served_bits").get<double>();
        s.final_queue = e.at("final_queue").get<double>();
        if (e.contains("sinr")) s.sinr = e.at("sinr").get<std::vector<double>>();
        r.sbs.push_back(std::move(s));
    }
    return r;
}

json to_json(const Estimate& e) {
    return {{"mean", number_or_null(e.mean)},
            {"ci_half_width", e.half_width ? number_or_null(*e.half_width) : json(nullptr)},
            {"samples", e.samples}};
}

json to_json(const SimStats& s) {
    json sbs = json::array();
    for (const auto& b : s.sbs)
        sbs.push_back({{"violation", to_json(b.violation)},
                       {"mean_queue_bits", to_json(b.mean_queue)},
                       {"mean_delay_slots", to_json(b.mean_delay)},
                       {"delay_violation", to_json(b.delay_violation)},
                       {"busy_fraction", to_json(b.busy_fraction)},
                       {"idle_fraction", to_json(b.idle_fraction)},
                       {"throughput_bps", to_json(b.throughput)}});
    return {{"runs", s.runs}, {"sbs", sbs}};
}

void write_runs_jsonl(std::ostream& out, const std::vector<RunStats>& runs) {
    for (const auto& r : runs) out << to_json(r).dump() << '\n';
}

std::vector<RunStats> read_runs_jsonl(std::istream& in) {
    std::vector<RunStats> runs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        runs.push_back(run_stats_from_json(json::parse(line)));
    }
    return runs;
}

}  // namespace ecudn
