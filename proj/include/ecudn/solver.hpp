#pragma once

// Coupled QoS-exponent fixed point (A_n(theta_n) = C_n(theta)) by interleaved
// per-coordinate bisection, and the per-SBS maximum arrival rate for a given
// normalized QoS requirement d.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "ecudn/analytics.hpp"
#include "ecudn/model.hpp"

namespace ecudn {

/// One coordinate update of the bisection sweep, reported to an observer.
struct BisectionStep {
    std::size_t sweep = 0;
    std::size_t sbs = 0;
    std::vector<double> theta;  ///< exponents at which C_n was evaluated
    double capacity = 0.0;      ///< C_n(theta)
    double bandwidth = 0.0;     ///< A_n(theta_n)
    double lower = 0.0;         ///< bracket after the update
    double upper = 0.0;
};

struct SolverConfig {
    /// Stopping residual per SBS, relative to its mean arrival rate.
    double relative_residual = 1e-3;
    std::size_t max_iterations = 500;
    /// Keeps theta strictly inside (0, 1/L): upper bracket = (1 - guard)/L.
    double epsilon_guard = 1e-12;
    /// Relative bracket width that ends a scalar bisection.
    double theta_rel_tol = 1e-10;
    /// Starting exponents; the bracket midpoint when empty.
    std::optional<std::vector<double>> start;
    /// Re-open a coordinate's bracket when it has collapsed onto a point that
    /// is not a root because the peers moved its root outside.
    bool restore_brackets = true;
    InterferenceModel model = InterferenceModel::Unsaturated;
    EcOptions ec;
    std::function<void(const BisectionStep&)> observer;

    void validate() const;
};

struct SolveResult {
    std::vector<double> theta_star;
    std::vector<double> residuals;   ///< |C_n - A_n| at theta_star
    std::vector<double> tolerances;  ///< per-SBS stopping residual
    std::vector<double> capacity;    ///< C_n(theta_star)
    std::vector<double> bandwidth;   ///< A_n(theta_star_n)
    std::size_t iterations = 0;      ///< completed sweeps
    std::size_t evaluations = 0;     ///< EC evaluations
    std::size_t bracket_restores = 0;
    /// SBSs whose capacity still exceeds the bandwidth at the upper bracket
    /// end; their exponent is reported there, a lower bound on the root.
    std::vector<bool> at_guard;
    bool converged = false;
    InterferenceModel model = InterferenceModel::Unsaturated;
    IdleProfile idle_profile;  ///< profile the EC was evaluated with at theta_star
};

/// Idle profile implied by exponents under an interference model.
IdleProfile idle_profile_for(std::span<const double> theta, const NetworkTraffic& traffic, InterferenceModel model);

/// Coupled fixed point. Throws InfeasibleError listing SBSs whose EC, even at
/// a vanishing exponent and with the most favourable peer idleness, does not
/// exceed the mean arrival rate.
SolveResult solve_qos_exponents(const LinkGainMatrix& gains, const NetworkTraffic& traffic,
                                const SolverConfig& config = {});

/// Solves theta_n*T_s*C_n(theta_n; P_j = d_j(1 - p_j)) = ln(p_n/(1 - d_n) + 1 - p_n)
/// by scalar bisection. Throws InfeasibleError if no sign change is found.
double solve_theta_given_d(std::size_t n, std::span<const double> d, const NetworkTraffic& traffic,
                           const LinkGainMatrix& gains, const SolverConfig& config = {});

/// mu_n = d_n p_n / (theta*_n T_s).
double max_arrival_rate(std::size_t n, std::span<const double> d, const NetworkTraffic& traffic,
                        double theta_star_n);

/// Per-SBS maximum arrival rates for a common requirement vector.
std::vector<double> max_arrival_rates(std::span<const double> d, const NetworkTraffic& traffic,
                                      const LinkGainMatrix& gains, const SolverConfig& config = {});

/// Full-interference counterparts (every peer always active).
SolveResult solve_qos_exponents_full_interference(const LinkGainMatrix& gains, const NetworkTraffic& traffic,
                                                  SolverConfig config = {});
double solve_theta_given_d_full_interference(std::size_t n, std::span<const double> d,
                                             const NetworkTraffic& traffic, const LinkGainMatrix& gains,
                                             SolverConfig config = {});

}  // namespace ecudn
