#pragma once

// JSON documents for layouts, gain matrices, solver results and raw simulation
// runs, plus the number formatting shared by every CSV writer.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ecudn/analytics.hpp"
#include "ecudn/model.hpp"
#include "ecudn/sim.hpp"
#include "ecudn/solver.hpp"

namespace ecudn {

using json = nlohmann::json;

/// Shortest round-trip-safe rendering ("%.17g" trimmed); "nan"/"inf" for non-finite values.
std::string format_number(double v);

/// Quotes a CSV field when it contains a comma, quote or newline (RFC 4180).
std::string csv_field(const std::string& s);

json to_json(const RadioParams& r);
RadioParams radio_from_json(const json& j);

json to_json(const NetworkLayout& layout);
NetworkLayout layout_from_json(const json& j);

json to_json(const LinkGainMatrix& gains);
LinkGainMatrix gains_from_json(const json& j);

json to_json(const TrafficModel& t);
TrafficModel traffic_from_json(const json& j);

json to_json(const SolverConfig& c);
json to_json(const SolveResult& r);

/// Solver result together with every input needed to reproduce it.
json solve_report(const LinkGainMatrix& gains, const NetworkTraffic& traffic, const SolverConfig& config,
                  const SolveResult& result);

json to_json(const SimConfig& c);
SimConfig sim_config_from_json(const json& j, SimConfig base = {});

json to_json(const RunStats& r);
RunStats run_stats_from_json(const json& j);

json to_json(const Estimate& e);
json to_json(const SimStats& s);

/// One JSON object per line.
void write_runs_jsonl(std::ostream& out, const std::vector<RunStats>& runs);
std::vector<RunStats> read_runs_jsonl(std::istream& in);

const char* to_string(InterferenceModel m);

}  // namespace ecudn
