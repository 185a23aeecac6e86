#include "doctest.h"

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ecudn/errors.hpp"
#include "ecudn/experiments.hpp"

using namespace ecudn;

namespace {

std::string csv_text(const ExperimentConfig& c) {
    std::ostringstream out;
    write_csv(out, c, run_experiment(c));
    return out.str();
}

ExperimentConfig quick(const std::string& id) {
    ExperimentConfig c = default_config(id);
    c.sim.runs = 4;
    c.sim.slots = 2000;
    return c;
}

double cell(const CsvTable& t, std::size_t row, const std::string& col) {
    return std::stod(t.rows[row][t.column(col)]);
}

}  // namespace

TEST_CASE("configuration parsing") {
    const auto c = config_from_json(json::parse(R"({"experiment": "fig4", "d_values": [0.2], "solver": {"relative_residual": 1e-4}})"));
    CHECK(c.d_values == std::vector<double>{0.2});
    CHECK(c.solver.relative_residual == 1e-4);
    CHECK(c.densities == std::vector<std::size_t>{8});
    CHECK_THROWS_AS(config_from_json(json{{"experiment", "fig9"}}), DomainError);
    CHECK_THROWS(config_from_json(json{{"experiment", "fig2"}, {"no_such_key", 1}}));
    CHECK_THROWS_AS(config_from_json(json{{"experiment", "fig4"}, {"d_values", {1.5}}}), DomainError);

    const json echoed = to_json(c);
    CHECK_FALSE(echoed.contains("jobs"));
    const auto again = config_from_json(echoed);
    CHECK(to_json(again) == echoed);
}

TEST_CASE("layout seeds and retries are deterministic") {
    CHECK(layout_seed(1, 8, 0) == layout_seed(1, 8, 0));
    CHECK(layout_seed(1, 8, 0) != layout_seed(1, 8, 1));
    CHECK(layout_seed(1, 8, 0) != layout_seed(1, 10, 0));
    const auto a = build_layout_with_retry(12, 500.0, 1000, RadioParams{}, 99);
    const auto b = build_layout_with_retry(12, 500.0, 1000, RadioParams{}, 99);
    CHECK(a.sbs_positions[5].x == b.sbs_positions[5].x);
    CHECK_THROWS_AS(build_layout_with_retry(50, 500.0, 60, RadioParams{}, 1, 3), LayoutError);
}

TEST_CASE("fig2 table shape and ordering") {
    auto c = quick("fig2");
    c.sweep_values = {100, 1000};
    const auto t = run_fig2(c);
    CHECK(t.rows.size() == 2 * 2 * 4);
    CHECK(t.failed_cells == 0);
    for (std::size_t r = 0; r < t.rows.size(); r += 4) {
        CHECK(t.rows[r][t.column("series")] == "analytic_unsat");
        CHECK(t.rows[r + 3][t.column("series")] == "sim_full");
        // full interference never helps
        CHECK(cell(t, r + 2, "violation") >= cell(t, r, "violation"));
    }
    CHECK(t.rows.back()[t.column("sweep_value")] == "1000");
}

TEST_CASE("fig3 trends on a small sweep") {
    auto c = quick("fig3");
    c.densities = {1, 2, 4, 8};
    c.layouts = 2;
    const auto t = run_fig3(c);
    std::map<std::string, std::vector<double>> agg;
    std::vector<std::string> n1;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r][t.column("layout")] != "all") continue;
        const std::string series = t.rows[r][t.column("series")];
        if (t.rows[r][t.column("n_sbs")] == "1") n1.push_back(t.rows[r][t.column("violation")]);
        else agg[series].push_back(cell(t, r, "violation"));
    }
    REQUIRE(n1.size() == 4);
    CHECK(n1[0] == n1[2]);
    CHECK(n1[1] == n1[3]);
    for (std::size_t i = 1; i < agg["analytic_unsat"].size(); ++i)
        CHECK(agg["analytic_unsat"][i] <= agg["analytic_unsat"][i - 1]);
    for (std::size_t i = 0; i < agg["analytic_unsat"].size(); ++i)
        CHECK(agg["analytic_full"][i] >= agg["analytic_unsat"][i]);
}

TEST_CASE("fig4 has one row per requirement and model") {
    auto c = default_config("fig4");
    c.layouts = 2;
    c.d_values = {0.001, 0.5};
    const auto t = run_fig4(c);
    REQUIRE(t.rows.size() == 4);
    const double u_small = cell(t, 0, "total_rate_bps"), f_small = cell(t, 1, "total_rate_bps");
    const double u_large = cell(t, 2, "total_rate_bps"), f_large = cell(t, 3, "total_rate_bps");
    CHECK(t.rows[0][t.column("model")] == "unsaturated");
    CHECK(t.rows[1][t.column("model")] == "full_interference");
    CHECK(std::fabs(u_small - f_small) <= 0.02 * f_small);
    CHECK(u_large > f_large);
    CHECK(u_small >= f_small);
}

TEST_CASE("fig5 trends") {
    auto c = default_config("fig5");
    c.layouts = 3;
    c.densities = {2, 6, 12};
    c.d_values = {0.1, 0.5};
    const auto t = run_fig5(c);
    std::map<std::pair<double, std::string>, std::vector<double>> rate;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        rate[{cell(t, r, "d"), t.rows[r][t.column("model")]}].push_back(cell(t, r, "per_sbs_rate_bps"));
    const auto& u1 = rate[{0.1, "unsaturated"}];
    const auto& f1 = rate[{0.1, "full_interference"}];
    const auto& u5 = rate[{0.5, "unsaturated"}];
    REQUIRE(u1.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(u5[i] < u1[i]);
    CHECK(u1[2] - f1[2] > u1[0] - f1[0]);
}

TEST_CASE("fig6 traces and equilibrium totals") {
    const auto c = default_config("fig6");
    const auto t = run_fig6(c);
    std::map<std::size_t, std::vector<double>> change;
    std::vector<double> density, total;
    std::map<std::size_t, double> ne;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string kind = row[t.column("kind")];
        const std::size_t n = std::stoul(row[t.column("n_sbs")]);
        if (kind == "trace" && !row[t.column("max_change")].empty()) change[n].push_back(cell(t, r, "max_change"));
        if (kind == "summary" && row[t.column("strategy")] == "ne") {
            ne[n] = cell(t, r, "total_utility");
            density.push_back(static_cast<double>(n));
            total.push_back(cell(t, r, "total_rate_bps"));
        }
        if (kind == "summary" && row[t.column("strategy")] != "ne" && cell(t, r, "qos_feasible") == 1.0)
            CHECK(cell(t, r, "total_utility") <= ne.at(n) * (1 + 1e-9));
    }
    for (const auto& [n, ch] : change) {
        CHECK(ch.back() <= c.game.tol);
        for (std::size_t i = 1; i < ch.size(); ++i) CHECK(ch[i] <= ch[i - 1]);
    }
    // least-squares line through the upper half of the density sweep
    const std::size_t start = density.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double m = static_cast<double>(density.size() - start);
    for (std::size_t i = start; i < density.size(); ++i) {
        sx += density[i];
        sy += total[i];
        sxx += density[i] * density[i];
        sxy += density[i] * total[i];
        syy += total[i] * total[i];
    }
    const double cov = sxy - sx * sy / m, vx = sxx - sx * sx / m, vy = syy - sy * sy / m;
    CHECK(cov * cov / (vx * vy) >= 0.98);
}

TEST_CASE("custom grids") {
    auto c = quick("custom");
    SUBCASE("empty grid gives a header-only table") {
        c.grid = json::object();
        const auto t = run_custom(c);
        CHECK(t.rows.empty());
        CHECK(t.cells == 0);
        const std::string text = csv_text(c);
        CHECK(text.find("cell,status,theta_star") != std::string::npos);
        CHECK(text.find("# cells: 0, failed: 0") != std::string::npos);
    }
    SUBCASE("a single cell matches the direct call") {
        c.grid = {{"mean_size", {500}}};
        const auto t = run_custom(c);
        REQUIRE(t.rows.size() == 1);
        const NetworkTraffic traffic(2, TrafficModel{0.2, 500.0, 1e-3});
        const auto r = solve_qos_exponents(network_gains(c), traffic, c.solver);
        CHECK(t.rows[0][t.column("theta_star")] == format_number(r.theta_star[0]) + ";" + format_number(r.theta_star[1]));
        CHECK(t.rows[0][t.column("status")] == "ok");
    }
    SUBCASE("mixed-radix expansion with the last axis fastest") {
        c.entry = "max_rate";
        c.grid = {{"d", {0.1, 0.5}}, {"model", {"unsaturated", "full"}}};
        const auto t = run_custom(c);
        REQUIRE(t.rows.size() == 4);
        CHECK(t.rows[1][t.column("d")] == "0.1");
        CHECK(t.rows[1][t.column("model")] == "full");
        CHECK(cell(t, 1, "total_rate_bps") <= cell(t, 0, "total_rate_bps"));
    }
    SUBCASE("failed cells are marked and counted") {
        c.grid = {{"mean_size", {100, 1e5}}};
        const auto t = run_custom(c);
        REQUIRE(t.rows.size() == 2);
        CHECK(t.failed_cells == 1);
        CHECK(t.rows[1][t.column("status")] == "infeasible");
    }
    SUBCASE("unknown axes are rejected") {
        c.grid = {{"colour", {1}}};
        CHECK_THROWS_AS(run_custom(c), DomainError);
    }
}

TEST_CASE("output is independent of the thread count") {
    auto c = quick("fig2");
    c.sweep_values = {100, 2000};
    const std::string serial = csv_text(c);
    c.jobs = 3;
    CHECK(csv_text(c) == serial);
    CHECK(serial.rfind("# experiment: fig2\n# seed: 1\n# config: ", 0) == 0);

    auto g = quick("custom");
    g.entry = "simulate";
    g.grid = {{"p", {0.1, 0.3}}, {"seed", {1, 2}}};
    const std::string one = csv_text(g);
    g.jobs = 2;
    CHECK(csv_text(g) == one);
}
