#include "doctest.h"

#include <cmath>
#include <vector>

#include "ecudn/errors.hpp"
#include "ecudn/solver.hpp"
#include "oracles.hpp"

using namespace ecudn;

namespace {

const LinkGainMatrix kTwoSbs = LinkGainMatrix::from_db({{10.0, 1.0}, {2.0, 20.0}}, 1e6);

// ln(p/(1 - theta L) + 1 - p)/(theta T_s), written out independently of the library.
double eb(const TrafficModel& t, double theta) {
    return std::log(t.p / (1.0 - theta * t.mean_size) + 1.0 - t.p) / (theta * t.slot);
}

std::vector<double> idle_of(const std::vector<double>& theta, const NetworkTraffic& traffic) {
    std::vector<double> idle(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) idle[j] = theta[j] * traffic[j].mean_size * (1.0 - traffic[j].p);
    return idle;
}

}  // namespace

TEST_CASE("single SBS reduces to a scalar root that matches a grid scan") {
    const auto g = LinkGainMatrix::from_db({{12.0}}, 1e6);
    const NetworkTraffic traffic = {TrafficModel{0.3, 800.0, 1e-3}};
    const auto r = solve_qos_exponents(g, traffic);
    REQUIRE(r.converged);

    const double upper = 1.0 / traffic[0].mean_size;
    auto gap = [&](double th) { return oracle::ec_by_tail(0, th, g, {1.0}, 1e-3) - eb(traffic[0], th); };
    const int points = 400;
    double lo = 0.0, hi = 0.0;
    for (int i = 1; i < points; ++i) {
        const double a = upper * i / points, b = upper * (i + 1) / points * (1 - 1e-9);
        if (gap(a) > 0.0 && gap(b) <= 0.0) {
            lo = a;
            hi = b;
            break;
        }
    }
    REQUIRE(hi > 0.0);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    CHECK(r.theta_star[0] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-4));
}

TEST_CASE("two-SBS instance converges and its residuals re-evaluate independently") {
    const NetworkTraffic traffic(2, TrafficModel{0.2, 100.0, 1e-3});
    const auto r = solve_qos_exponents(kTwoSbs, traffic);
    REQUIRE(r.converged);
    const auto idle = idle_of(r.theta_star, traffic);
    for (std::size_t n = 0; n < 2; ++n) {
        CHECK(r.theta_star[n] > 0.0);
        CHECK(r.theta_star[n] * traffic[n].mean_size < 1.0);
        CHECK(r.residuals[n] <= r.tolerances[n]);
        CHECK(r.tolerances[n] == doctest::Approx(1e-3 * 20000.0));
        const double c = oracle::ec_by_tail(n, r.theta_star[n], kTwoSbs, idle, 1e-3);
        CHECK(std::fabs(c - eb(traffic[n], r.theta_star[n])) <= r.tolerances[n] * 1.01);
        CHECK(r.idle_profile.idle[n] == doctest::Approx(idle[n]));
    }
    // the stronger link sustains a larger exponent
    CHECK(r.theta_star[1] > r.theta_star[0]);
}

TEST_CASE("symmetric instance gives identical exponents") {
    const auto g = LinkGainMatrix::from_db({{15.0, 3.0}, {3.0, 15.0}}, 1e6);
    const NetworkTraffic traffic(2, TrafficModel{0.2, 500.0, 1e-3});
    SolverConfig cfg;
    cfg.model = InterferenceModel::Unsaturated;
    const auto r = solve_qos_exponents(g, traffic, cfg);
    CHECK(r.theta_star[0] == r.theta_star[1]);
    std::vector<double> d(3, 0.4);
    const auto g3 = LinkGainMatrix::from_db({{20, 5, 5}, {5, 20, 5}, {5, 5, 20}}, 1e6);
    const NetworkTraffic t3(3, TrafficModel{});
    const auto th0 = solve_theta_given_d(0, d, t3, g3), th2 = solve_theta_given_d(2, d, t3, g3);
    CHECK(th0 == th2);
}

TEST_CASE("bisection brackets keep their signs and shrink") {
    RandomStream rng(21, 0, StreamPurpose::Sampling);
    const auto g = oracle::random_gains(rng, 4, 1e6, 10.0, 30.0, -10.0, 5.0);
    const NetworkTraffic traffic(4, TrafficModel{0.2, 600.0, 1e-3});
    SolverConfig cfg;
    std::vector<double> width(4, 1.0 / 600.0);
    std::size_t steps = 0, violations = 0;
    cfg.observer = [&](const BisectionStep& s) {
        ++steps;
        const double th = s.theta[s.sbs];
        if (s.capacity > s.bandwidth ? s.lower != th : s.upper != th) ++violations;
        if (s.upper - s.lower > width[s.sbs] * (1 + 1e-12)) ++violations;
        width[s.sbs] = s.upper - s.lower;
    };
    const auto r = solve_qos_exponents(g, traffic, cfg);
    CHECK(r.converged);
    CHECK(steps > 0);
    CHECK(violations == 0);
}

TEST_CASE("randomized feasible instances converge") {
    RandomStream rng(31, 0, StreamPurpose::Sampling);
    for (int i = 0; i < 6; ++i) {
        const std::size_t n = 2 + rng.below(5);
        const auto g = oracle::random_gains(rng, n, 1e6, 5.0, 30.0, -10.0, 5.0);
        NetworkTraffic traffic(n);
        for (auto& t : traffic) t = TrafficModel{0.1 + 0.3 * rng.uniform(), 50.0 + 500.0 * rng.uniform(), 1e-3};
        const auto r = solve_qos_exponents(g, traffic);
        CHECK(r.converged);
        const auto idle = idle_of(r.theta_star, traffic);
        for (std::size_t k = 0; k < n; ++k) {
            const double c = ec_n_sbs(k, r.theta_star[k], g, idle, 1e-3);
            CHECK(std::fabs(c - effective_bandwidth(traffic[k], r.theta_star[k])) <= r.tolerances[k]);
        }
    }
}

TEST_CASE("very strong links approach the exponent pole") {
    const NetworkTraffic traffic(2, TrafficModel{});
    SUBCASE("root just below the pole") {
        const auto g = LinkGainMatrix::from_db({{70.0, -20.0}, {-20.0, 10.0}}, 1e6);
        const auto r = solve_qos_exponents(g, traffic);
        CHECK(r.converged);
        CHECK(r.theta_star[0] * 100.0 < 1.0);
        CHECK(r.theta_star[0] * 100.0 > 1.0 - 1e-6);
        CHECK(r.residuals[0] <= r.tolerances[0]);
        CHECK_FALSE(r.at_guard[0]);
    }
    SUBCASE("capacity still exceeds the bandwidth at the guard") {
        const auto g = LinkGainMatrix::from_db({{110.0, -20.0}, {-20.0, 10.0}}, 1e6);
        const auto r = solve_qos_exponents(g, traffic);
        CHECK(r.converged);
        CHECK(r.at_guard[0]);
        CHECK_FALSE(r.at_guard[1]);
        CHECK(r.capacity[0] > r.bandwidth[0]);
        CHECK(r.residuals[1] <= r.tolerances[1]);
    }
}

TEST_CASE("overloaded queues are reported as infeasible") {
    const auto g = LinkGainMatrix::from_db({{0.0, -3.0}, {-3.0, 20.0}}, 1e6);
    const NetworkTraffic traffic(2, TrafficModel{0.5, 4000.0, 1e-3});  // 2 Mbit/s offered
    try {
        solve_qos_exponents(g, traffic);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(e.sbs() == std::vector<std::size_t>{0});
    }
}

TEST_CASE("maximum arrival rate for a given requirement") {
    const NetworkTraffic traffic(2, TrafficModel{});
    const std::vector<double> d = {0.3, 0.3};
    const double th = solve_theta_given_d(0, d, traffic, kTwoSbs);
    // both sides of the defining equation change sign around the root
    auto gap = [&](double x) {
        const std::vector<double> idle = {0.3 * 0.8, 0.3 * 0.8};
        return x * 1e-3 * ec_n_sbs(0, x, kTwoSbs, idle, 1e-3) - std::log(0.2 / 0.7 + 0.8);
    };
    CHECK(gap(th * (1 - 1e-6)) < 0.0);
    CHECK(gap(th * (1 + 1e-6)) > 0.0);

    CHECK(max_arrival_rate(0, d, traffic, th) == doctest::Approx(0.3 * 0.2 / (th * 1e-3)));
    NetworkTraffic doubled = traffic;
    doubled[0].p = 0.4;
    CHECK(max_arrival_rate(0, d, doubled, th) == doctest::Approx(2.0 * max_arrival_rate(0, d, traffic, th)));

    SUBCASE("vanishing requirement drives the exponent to zero") {
        const std::vector<double> tiny = {1e-6, 1e-6};
        CHECK(solve_theta_given_d(0, tiny, traffic, kTwoSbs) < 1e-6);
    }
    SUBCASE("full interference never allows more traffic") {
        for (double dv : {0.01, 0.2, 0.5, 0.9}) {
            const std::vector<double> dd = {dv, dv};
            for (std::size_t n = 0; n < 2; ++n) {
                const double a = solve_theta_given_d(n, dd, traffic, kTwoSbs);
                const double b = solve_theta_given_d_full_interference(n, dd, traffic, kTwoSbs);
                CHECK(max_arrival_rate(n, dd, traffic, b) <= max_arrival_rate(n, dd, traffic, a) * (1 + 1e-9));
            }
        }
    }
    SUBCASE("weaker interference never lowers the rate") {
        RandomStream rng(41, 0, StreamPurpose::Sampling);
        for (int i = 0; i < 10; ++i) {
            const std::size_t n = 2 + rng.below(4);
            auto rows = oracle::random_gains(rng, n, 1e6).rows();
            const NetworkTraffic t(n, TrafficModel{});
            const std::vector<double> dd(n, 0.1 + 0.8 * rng.uniform());
            const double before = max_arrival_rates(dd, t, LinkGainMatrix::from_linear(rows, 1e6))[0];
            rows[1][0] *= 0.5;
            const double after = max_arrival_rates(dd, t, LinkGainMatrix::from_linear(rows, 1e6))[0];
            CHECK(after >= before * (1 - 1e-9));
        }
    }
    CHECK_THROWS_AS(solve_theta_given_d(0, std::vector<double>{1.0, 0.5}, traffic, kTwoSbs), DomainError);
}

TEST_CASE("full-interference solver") {
    const NetworkTraffic traffic(2, TrafficModel{0.2, 1000.0, 1e-3});
    const auto u = solve_qos_exponents(kTwoSbs, traffic);
    const auto f = solve_qos_exponents_full_interference(kTwoSbs, traffic);
    REQUIRE(f.converged);
    for (std::size_t n = 0; n < 2; ++n) {
        CHECK(f.theta_star[n] < u.theta_star[n]);
        CHECK(queue_violation_prob(f.theta_star[n], traffic[n], 10.0) >
              queue_violation_prob(u.theta_star[n], traffic[n], 10.0));
        CHECK(f.idle_profile.idle[n] == 0.0);
    }
    const auto single = LinkGainMatrix::from_db({{15.0}}, 1e6);
    const NetworkTraffic one = {TrafficModel{}};
    CHECK(solve_qos_exponents(single, one).theta_star == solve_qos_exponents_full_interference(single, one).theta_star);
}
