#pragma once

// Non-cooperative traffic-saturation game: each SBS picks its arrival
// probability p_n to maximize L_n p_n / (theta_n T_s) subject to its QoS
// constraint A_n(p_n) <= C_n(p_-n). Peers' strategies enter C_n through their
// idle probabilities P_j = theta_j L_j (1 - p_j).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecudn/analytics.hpp"
#include "ecudn/model.hpp"

namespace ecudn {

enum class UpdateSchedule {
    Simultaneous,  ///< Jacobi: every SBS responds to the previous profile
    Sequential,    ///< Gauss-Seidel: SBSs respond in index order to the latest profile
};

struct GameOptions {
    double tol = 1e-6;
    std::size_t max_iter = 1000;
    UpdateSchedule schedule = UpdateSchedule::Simultaneous;
    std::size_t jobs = 1;
    EcOptions ec;
};

struct TraceEntry {
    std::size_t iteration = 0;
    std::vector<double> p;
    std::optional<double> max_change;  ///< empty for the initial profile
    double total_utility = 0.0;
};

struct GameState {
    std::vector<double> p;
    std::vector<double> utilities;
    std::vector<TraceEntry> trace;
    std::size_t iterations = 0;
    bool converged = false;
};

/// U_n = L_n p_n / (theta_n T_s).
double utility(double p, double theta, double mean_size, double slot);

/// Largest p_n meeting the QoS constraint for a given capacity, before clamping:
/// (exp(theta T_s C) - 1)(1 - theta L)/(theta L).
double best_response_unclamped(double capacity, double theta, double mean_size, double slot);

/// Clamped to [0, 1].
double best_response_from_capacity(double capacity, double theta, double mean_size, double slot);

/// C_n when the peers play p (p[n] is ignored).
double game_capacity(std::size_t n, std::span<const double> p, std::span<const double> theta,
                     const NetworkTraffic& traffic, const LinkGainMatrix& gains, const EcOptions& ec = {});

/// Best response of SBS n to the peers' strategies in p (p[n] is ignored).
double best_response(std::size_t n, std::span<const double> p, std::span<const double> theta,
                     const NetworkTraffic& traffic, const LinkGainMatrix& gains, const EcOptions& ec = {});

/// A_n(p_n) <= C_n with the exponent held at theta_n.
bool qos_feasible(double p, double capacity, double theta, double mean_size, double slot);

/// Best-response iteration from p_init until the largest coordinate change is
/// at most tol, or max_iter iterations.
GameState find_ne(std::span<const double> theta, const NetworkTraffic& traffic, const LinkGainMatrix& gains,
                  std::span<const double> p_init, const GameOptions& options = {});

double total_utility(std::span<const double> p, std::span<const double> theta, const NetworkTraffic& traffic);

/// CSV rows "iteration,p_1,...,p_N,max_change,total_utility".
std::string trace_csv(const GameState& state);

}  // namespace ecudn
