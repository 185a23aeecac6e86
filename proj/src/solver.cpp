#include "ecudn/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ecudn/errors.hpp"

namespace ecudn {

void SolverConfig::validate() const {
    if (!(relative_residual > 0.0)) throw DomainError("solver residual tolerance must be positive");
    if (!(epsilon_guard > 0.0 && epsilon_guard < 1.0)) throw DomainError("epsilon_guard must lie in (0, 1)");
    if (!(theta_rel_tol > 0.0)) throw DomainError("theta_rel_tol must be positive");
    if (max_iterations == 0) throw DomainError("max_iterations must be positive");
}

IdleProfile idle_profile_for(std::span<const double> theta, const NetworkTraffic& traffic, InterferenceModel model) {
    if (model == InterferenceModel::Full) return IdleProfile::always_busy(theta.size());
    return IdleProfile::from_exponents(theta, traffic);
}

SolveResult solve_qos_exponents(const LinkGainMatrix& gains, const NetworkTraffic& traffic,
                                const SolverConfig& config) {
    config.validate();
    const std::size_t n_sbs = gains.size();
    validate_traffic(traffic, n_sbs);
    const double slot = traffic.front().slot;

    SolveResult result;
    result.model = config.model;

    std::vector<double> lower(n_sbs, 0.0);
    std::vector<double> upper_init(n_sbs);
    std::vector<double> tol(n_sbs);
    for (std::size_t n = 0; n < n_sbs; ++n) {
        upper_init[n] = (1.0 - config.epsilon_guard) / traffic[n].mean_size;
        tol[n] = config.relative_residual * traffic[n].mean_rate();
        if (!(tol[n] > 0.0)) throw DomainError("SBS " + std::to_string(n) + " has no traffic; residual scale is zero");
    }
    std::vector<double> upper = upper_init;

    auto capacity_at = [&](std::size_t n, const std::vector<double>& theta) {
        ++result.evaluations;
        const auto idle = idle_profile_for(theta, traffic, config.model);
        return ec_n_sbs(n, theta[n], gains, std::span<const double>(idle.idle), slot, config.ec);
    };

    // Stability: with theta_n -> 0 the EB tends to the mean rate, and C_n is
    // largest when every peer is as idle as the model admits.
    {
        std::vector<double> probe = upper_init;
        std::vector<std::size_t> bad;
        for (std::size_t n = 0; n < n_sbs; ++n) {
            probe[n] = config.epsilon_guard / traffic[n].mean_size;
            if (!(capacity_at(n, probe) > traffic[n].mean_rate())) bad.push_back(n);
            probe[n] = upper_init[n];
        }
        if (!bad.empty()) {
            std::string list;
            for (std::size_t b : bad) list += (list.empty() ? "" : ", ") + std::to_string(b);
            throw InfeasibleError("queue unstable (EC below mean arrival rate) at SBS " + list, bad);
        }
    }

    std::vector<double> theta(n_sbs);
    if (config.start) {
        if (config.start->size() != n_sbs) throw DomainError("solver start vector size mismatch");
        for (std::size_t n = 0; n < n_sbs; ++n) {
            theta[n] = (*config.start)[n];
            if (!(theta[n] > 0.0 && theta[n] < upper_init[n]))
                throw DomainError("solver start exponent outside (0, (1-guard)/L)");
        }
    } else {
        for (std::size_t n = 0; n < n_sbs; ++n) theta[n] = 0.5 * (lower[n] + upper[n]);
    }

    std::vector<double> cap(n_sbs), eb(n_sbs), res(n_sbs);
    std::vector<bool> at_guard(n_sbs, false);
    auto evaluate_residuals = [&] {
        bool ok = true;
        for (std::size_t n = 0; n < n_sbs; ++n) {
            cap[n] = capacity_at(n, theta);
            eb[n] = effective_bandwidth(traffic[n], theta[n]);
            res[n] = std::fabs(cap[n] - eb[n]);
            at_guard[n] = res[n] > tol[n] && cap[n] > eb[n] &&
                          upper_init[n] - theta[n] <= config.theta_rel_tol * upper_init[n];
            ok = ok && (res[n] <= tol[n] || at_guard[n]);
        }
        return ok;
    };

    bool converged = evaluate_residuals();
    std::size_t sweep = 0;
    while (!converged && sweep < config.max_iterations) {
        ++sweep;
        for (std::size_t n = 0; n < n_sbs; ++n) {
            const double c = capacity_at(n, theta);
            const double a = effective_bandwidth(traffic[n], theta[n]);
            if (c > a)
                lower[n] = theta[n];
            else
                upper[n] = theta[n];
            if (config.observer) config.observer({sweep, n, theta, c, a, lower[n], upper[n]});
            theta[n] = 0.5 * (lower[n] + upper[n]);
        }
        converged = evaluate_residuals();
        if (converged || !config.restore_brackets) continue;
        for (std::size_t n = 0; n < n_sbs; ++n) {
            const double width = upper[n] - lower[n];
            if (res[n] <= tol[n] || at_guard[n] || width > 8.0 * std::numeric_limits<double>::epsilon() * upper_init[n]) continue;
            if (cap[n] > eb[n])
                upper[n] = upper_init[n];
            else
                lower[n] = 0.0;
            ++result.bracket_restores;
        }
    }

    result.theta_star = theta;
    result.residuals = res;
    result.tolerances = tol;
    result.capacity = cap;
    result.bandwidth = eb;
    result.iterations = sweep;
    result.at_guard = at_guard;
    result.converged = converged;
    result.idle_profile = idle_profile_for(theta, traffic, config.model);
    return result;
}

double solve_theta_given_d(std::size_t n, std::span<const double> d, const NetworkTraffic& traffic,
                           const LinkGainMatrix& gains, const SolverConfig& config) {
    config.validate();
    const std::size_t n_sbs = gains.size();
    validate_traffic(traffic, n_sbs);
    if (n >= n_sbs) throw DomainError("solve_theta_given_d: SBS index out of range");
    if (d.size() != n_sbs) throw DomainError("solve_theta_given_d: requirement vector size mismatch");
    for (double dj : d)
        if (!(dj > 0.0 && dj < 1.0)) throw DomainError("every requirement d_j must lie in (0, 1)");

    const double slot = traffic.front().slot;
    std::vector<double> idle(n_sbs, 0.0);
    if (config.model == InterferenceModel::Unsaturated)
        for (std::size_t j = 0; j < n_sbs; ++j) idle[j] = d[j] * (1.0 - traffic[j].p);

    const double target = std::log1p(traffic[n].p * d[n] / (1.0 - d[n]));
    auto excess = [&](double theta) {
        return log_mgf_service(n, theta, gains, std::span<const double>(idle), slot, config.ec) - target;
    };
    auto infeasible = [&] {
        return InfeasibleError("no sign change bracketing theta for SBS " + std::to_string(n) + " at d = " +
                                   std::to_string(d[n]),
                               {n});
    };
    if (!(target > 0.0)) throw infeasible();

    double lo = d[n] / traffic[n].mean_size;
    double hi = lo;
    int expansions = 0;
    while (excess(lo) >= 0.0) {
        lo *= 0.5;
        if (++expansions > 400) throw infeasible();
    }
    while (excess(hi) < 0.0) {
        hi *= 2.0;
        if (++expansions > 400 || !std::isfinite(hi)) throw infeasible();
    }
    while (hi - lo > config.theta_rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double max_arrival_rate(std::size_t n, std::span<const double> d, const NetworkTraffic& traffic,
                        double theta_star_n) {
    if (n >= d.size() || n >= traffic.size()) throw DomainError("max_arrival_rate: SBS index out of range");
    if (!(theta_star_n > 0.0)) throw DomainError("max_arrival_rate: theta* must be positive");
    return d[n] * traffic[n].p / (theta_star_n * traffic[n].slot);
}

std::vector<double> max_arrival_rates(std::span<const double> d, const NetworkTraffic& traffic,
                                      const LinkGainMatrix& gains, const SolverConfig& config) {
    std::vector<double> out(gains.size());
    for (std::size_t n = 0; n < gains.size(); ++n)
        out[n] = max_arrival_rate(n, d, traffic, solve_theta_given_d(n, d, traffic, gains, config));
    return out;
}

SolveResult solve_qos_exponents_full_interference(const LinkGainMatrix& gains, const NetworkTraffic& traffic,
                                                  SolverConfig config) {
    config.model = InterferenceModel::Full;
    return solve_qos_exponents(gains, traffic, config);
}

double solve_theta_given_d_full_interference(std::size_t n, std::span<const double> d,
                                             const NetworkTraffic& traffic, const LinkGainMatrix& gains,
                                             SolverConfig config) {
    config.model = InterferenceModel::Full;
    return solve_theta_given_d(n, d, traffic, gains, config);
}

}  // namespace ecudn
