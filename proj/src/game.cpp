#include "ecudn/game.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecudn/errors.hpp"
#include "ecudn/parallel.hpp"
#include "ecudn/serialize.hpp"

namespace ecudn {

namespace {

void check_exponent(double theta, double mean_size) {
    if (!(theta > 0.0)) throw DomainError("game: QoS exponent must be positive");
    if (!(theta * mean_size < 1.0)) throw DomainError("game: theta * mean_size must be below 1");
}

void check_inputs(std::span<const double> theta, const NetworkTraffic& traffic, const LinkGainMatrix& gains) {
    validate_traffic(traffic, gains.size());
    if (theta.size() != gains.size()) throw DomainError("game: exponent vector size mismatch");
    for (std::size_t n = 0; n < theta.size(); ++n) check_exponent(theta[n], traffic[n].mean_size);
}

}  // namespace

double utility(double p, double theta, double mean_size, double slot) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("utility: strategy must lie in [0, 1]");
    check_exponent(theta, mean_size);
    return mean_size * p / (theta * slot);
}

double best_response_unclamped(double capacity, double theta, double mean_size, double slot) {
    check_exponent(theta, mean_size);
    const double d = theta * mean_size;
    return std::expm1(theta * slot * capacity) * (1.0 - d) / d;
}

double best_response_from_capacity(double capacity, double theta, double mean_size, double slot) {
    return std::clamp(best_response_unclamped(capacity, theta, mean_size, slot), 0.0, 1.0);
}

double game_capacity(std::size_t n, std::span<const double> p, std::span<const double> theta,
                     const NetworkTraffic& traffic, const LinkGainMatrix& gains, const EcOptions& ec) {
    if (p.size() != gains.size()) throw DomainError("game: strategy vector size mismatch");
    std::vector<double> idle(gains.size(), 0.0);
    for (std::size_t j = 0; j < gains.size(); ++j) {
        if (j == n) continue;
        if (!(p[j] >= 0.0 && p[j] <= 1.0)) throw DomainError("game: peer strategy outside [0, 1]");
        idle[j] = theta[j] * traffic[j].mean_size * (1.0 - p[j]);
    }
    return ec_n_sbs(n, theta[n], gains, std::span<const double>(idle), traffic[n].slot, ec);
}

double best_response(std::size_t n, std::span<const double> p, std::span<const double> theta,
                     const NetworkTraffic& traffic, const LinkGainMatrix& gains, const EcOptions& ec) {
    check_inputs(theta, traffic, gains);
    if (n >= gains.size()) throw DomainError("best_response: SBS index out of range");
    const double c = game_capacity(n, p, theta, traffic, gains, ec);
    return best_response_from_capacity(c, theta[n], traffic[n].mean_size, traffic[n].slot);
}

bool qos_feasible(double p, double capacity, double theta, double mean_size, double slot) {
    // A_n is increasing in p, so the constraint is p <= the unclamped best response.
    const double limit = best_response_unclamped(capacity, theta, mean_size, slot);
    return p <= limit * (1.0 + 1e-12);
}

double total_utility(std::span<const double> p, std::span<const double> theta, const NetworkTraffic& traffic) {
    double sum = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n)
        sum += utility(p[n], theta[n], traffic[n].mean_size, traffic[n].slot);
    return sum;
}

GameState find_ne(std::span<const double> theta, const NetworkTraffic& traffic, const LinkGainMatrix& gains,
                  std::span<const double> p_init, const GameOptions& options) {
    check_inputs(theta, traffic, gains);
    if (!(options.tol > 0.0)) throw DomainError("find_ne: tolerance must be positive");
    const std::size_t n_sbs = gains.size();
    if (p_init.size() != n_sbs) throw DomainError("find_ne: initial profile size mismatch");
    for (double v : p_init)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("find_ne: initial strategies must lie in [0, 1]");

    GameState state;
    std::vector<double> p(p_init.begin(), p_init.end());
    state.trace.push_back({0, p, std::nullopt, total_utility(p, theta, traffic)});

    std::vector<double> next(n_sbs);
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        if (options.schedule == UpdateSchedule::Simultaneous) {
            parallel_for(n_sbs, options.jobs,
                         [&](std::size_t n) { next[n] = best_response(n, p, theta, traffic, gains, options.ec); });
        } else {
            next = p;
            for (std::size_t n = 0; n < n_sbs; ++n)
                next[n] = best_response(n, next, theta, traffic, gains, options.ec);
        }
        double change = 0.0;
        for (std::size_t n = 0; n < n_sbs; ++n) change = std::max(change, std::fabs(next[n] - p[n]));
        p = next;
        state.trace.push_back({it, p, change, total_utility(p, theta, traffic)});
        state.iterations = it;
        if (change <= options.tol) {
            state.converged = true;
            break;
        }
    }
    state.p = p;
    state.utilities.resize(n_sbs);
    for (std::size_t n = 0; n < n_sbs; ++n)
        state.utilities[n] = utility(p[n], theta[n], traffic[n].mean_size, traffic[n].slot);
    return state;
}

std::string trace_csv(const GameState& state) {
    std::ostringstream out;
    const std::size_t n_sbs = state.trace.empty() ? 0 : state.trace.front().p.size();
    out << "iteration";
    for (std::size_t n = 0; n < n_sbs; ++n) out << ",p_" << (n + 1);
    out << ",max_change,total_utility\n";
    for (const auto& e : state.trace) {
        out << e.iteration;
        for (double v : e.p) out << ',' << format_number(v);
        out << ',' << (e.max_change ? format_number(*e.max_change) : std::string()) << ','
            << format_number(e.total_utility) << '\n';
    }
    return out.str();
}

}  // namespace ecudn
