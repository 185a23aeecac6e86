#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "ecudn/errors.hpp"
#include "ecudn/rng.hpp"
#include "ecudn/serialize.hpp"

using namespace ecudn;

TEST_CASE("numbers render compactly and round-trip") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(100.0) == "100");
    CHECK(format_number(-2.5e-7) == "-2.5e-07");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    RandomStream rng(5, 0, StreamPurpose::Sampling);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(200)) - 100);
        CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("CSV fields are quoted only when needed") {
    CHECK(csv_field("ok") == "ok");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("layout and gains round-trip") {
    const NetworkLayout layout = build_layout(4, 500.0, 300, RadioParams{}, 17);
    const json j = to_json(layout);
    const NetworkLayout back = layout_from_json(json::parse(j.dump()));
    REQUIRE(back.size() == layout.size());
    for (std::size_t n = 0; n < layout.size(); ++n) {
        CHECK(back.sbs_positions[n].x == layout.sbs_positions[n].x);
        CHECK(back.served_ue_positions[n].y == layout.served_ue_positions[n].y);
    }
    CHECK(back.radio.bandwidth_hz == layout.radio.bandwidth_hz);

    const LinkGainMatrix g = link_gains(layout);
    const LinkGainMatrix g2 = gains_from_json(json::parse(to_json(g).dump()));
    CHECK(g2.rows() == g.rows());
    CHECK(g2.bandwidth() == g.bandwidth());

    const json db = {{"beta_bar_db", {{10.0, 1.0}, {2.0, 20.0}}}, {"bandwidth_hz", 1e6}};
    const auto g3 = gains_from_json(db);
    CHECK(g3.desired(1) == doctest::Approx(100.0));
    CHECK(g3.from_to(1, 0) == doctest::Approx(std::pow(10.0, 0.2)));
    CHECK_THROWS(gains_from_json(json{{"bandwidth_hz", 1e6}}));
}

TEST_CASE("traffic and simulation settings round-trip") {
    const TrafficModel t{0.35, 1234.5, 2e-3};
    const auto t2 = traffic_from_json(to_json(t));
    CHECK(t2.p == t.p);
    CHECK(t2.mean_size == t.mean_size);
    CHECK(t2.slot == t.slot);

    SimConfig c;
    c.runs = 12;
    c.slots = 3456;
    c.warmup = 7;
    c.record_sinr = true;
    const SimConfig c2 = sim_config_from_json(to_json(c));
    CHECK(c2.runs == 12);
    CHECK(c2.slots == 3456);
    CHECK(c2.warmup == std::optional<std::uint64_t>{7});
    CHECK(c2.record_sinr);
    CHECK(sim_config_from_json(json{{"runs", 3}}, c).slots == 3456);
}

TEST_CASE("raw runs survive a JSON-lines round trip") {
    const auto g = LinkGainMatrix::from_db({{10.0, 1.0}, {2.0, 20.0}}, 1e6);
    const NetworkTraffic traffic(2, TrafficModel{0.2, 500.0, 1e-3});
    SimConfig cfg;
    cfg.runs = 3;
    cfg.slots = 1000;
    const auto runs = simulate(g, traffic, cfg);
    std::stringstream buf;
    write_runs_jsonl(buf, runs);
    const auto back = read_runs_jsonl(buf);
    REQUIRE(back.size() == runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        CHECK(back[r].run_index == runs[r].run_index);
        for (std::size_t n = 0; n < 2; ++n) {
            CHECK(back[r].sbs[n].violation == runs[r].sbs[n].violation);
            CHECK(back[r].sbs[n].served_bits == runs[r].sbs[n].served_bits);
        }
    }
    const auto a = aggregate(runs), b = aggregate(back);
    CHECK(to_json(a).dump() == to_json(b).dump());

    RunStats empty;
    empty.sbs.resize(1);
    empty.sbs[0].mean_delay = std::numeric_limits<double>::quiet_NaN();
    const auto j = to_json(empty);
    CHECK(j.dump().find("null") != std::string::npos);
    CHECK(std::isnan(run_stats_from_json(j).sbs[0].mean_delay));
}

TEST_CASE("solver report echoes its inputs") {
    const auto g = LinkGainMatrix::from_db({{10.0, 1.0}, {2.0, 20.0}}, 1e6);
    const NetworkTraffic traffic(2, TrafficModel{});
    const SolverConfig cfg;
    const auto r = solve_qos_exponents(g, traffic, cfg);
    const json rep = solve_report(g, traffic, cfg, r);
    CHECK(rep.at("result").at("theta_star").get<std::vector<double>>() == r.theta_star);
    CHECK(rep.at("result").at("converged").get<bool>());
    CHECK(gains_from_json(rep.at("input").at("gains")).rows() == g.rows());
    CHECK(rep.at("input").at("traffic").size() == 2);
    CHECK(std::string(to_string(InterferenceModel::Full)) == "full_interference");
}
