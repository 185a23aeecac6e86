#pragma once

// Effective bandwidth / effective capacity framework for SBS queues fed by
// Bernoulli arrivals with exponentially sized payloads.
//
// Units: QoS exponents in 1/bit, sizes in bits, rates in bit/s, slot in
// seconds. The physical-layer rate is B*log2(1 + SINR); every logarithm in the
// EB/EC expressions is natural.

#include <cstddef>
#include <span>
#include <vector>

#include "ecudn/model.hpp"
#include "ecudn/quadrature.hpp"

namespace ecudn {

/// Arrival process of one SBS.
struct TrafficModel {
    double p = 0.2;           ///< per-slot arrival probability
    double mean_size = 100.0; ///< mean payload per arrival (bits)
    double slot = 1e-3;       ///< slot duration (s)

    double mean_rate() const { return p * mean_size / slot; }
    void validate() const;
};

using NetworkTraffic = std::vector<TrafficModel>;

/// Validates every entry and checks that all SBSs share one slot duration.
void validate_traffic(const NetworkTraffic& traffic, std::size_t n_sbs);

struct QosSpec {
    double theta = 1e-3;        ///< QoS exponent (1/bit)
    double q_threshold = 10.0;  ///< queue threshold (bits)
    double delay_bound = 0.01;  ///< delay bound (s)

    /// Normalized requirement theta * mean_size.
    double d(const TrafficModel& traffic) const { return theta * traffic.mean_size; }
    void validate(const TrafficModel& traffic) const;
};

/// Steady-state idle probabilities P_n and nonempty-buffer probabilities eta_n.
struct IdleProfile {
    std::vector<double> idle;
    std::vector<double> eta;

    std::size_t size() const { return idle.size(); }

    /// P_n = theta_n * L_n * (1 - p_n), eta_n = 1 - theta_n * L_n.
    static IdleProfile from_exponents(std::span<const double> theta, const NetworkTraffic& traffic);
    /// Same with d_n = theta_n * L_n given directly.
    static IdleProfile from_requirements(std::span<const double> d, const NetworkTraffic& traffic);
    /// Every SBS always backlogged: P = 0, eta = 1 (full-interference model).
    static IdleProfile always_busy(std::size_t n);
    /// Arbitrary idle probabilities; eta is set as if no arrivals occurred (eta = 1 - P).
    static IdleProfile from_idle(std::vector<double> idle);

    void validate() const;
};

struct EcOptions {
    quad::Options quadrature{1e-8, 0.0, 4000};
    /// Relative size below which the neglected tail of an improper integral
    /// must fall.
    double tail_rel = 1e-16;
};

/// A_n(theta) = ln(p/(1 - theta*L) + 1 - p) / (theta*T_s).
double effective_bandwidth(const TrafficModel& traffic, double theta);

/// SINR density when the peer SBS is idle (exponential with mean beta11).
double pdf_sinr_type1(double beta11, double x);
/// SINR density when the single peer SBS interferes with mean SNR beta21.
double pdf_sinr_type2(double beta11, double beta21, double x);

/// Two-SBS EC of `own` via the SINR densities: mixture of the idle-peer and
/// active-peer densities weighted by the peer idle probability.
double ec_two_sbs(double theta, const LinkGainMatrix& gains, std::size_t own, double peer_idle_prob,
                  double slot, const EcOptions& options = {});

/// N-SBS EC of SBS n from the single-integral form with per-interferer
/// idle/active factors. The integral over t in (0, 1] is evaluated after the
/// substitution t = exp(-theta*B*T_s*w), on w in [0, W]; W is doubled until the
/// bound on the neglected tail falls below tail_rel times the integral.
double ec_n_sbs(std::size_t n, double theta, const LinkGainMatrix& gains, std::span<const double> idle,
                double slot, const EcOptions& options = {});
double ec_n_sbs(std::size_t n, double theta, const LinkGainMatrix& gains, const IdleProfile& idle,
                double slot, const EcOptions& options = {});

/// -ln E[exp(-theta * r * T_s)], i.e. theta*T_s*C_n. Monotone increasing in theta.
double log_mgf_service(std::size_t n, double theta, const LinkGainMatrix& gains, std::span<const double> idle,
                       double slot, const EcOptions& options = {});

/// P_n = theta* * L * (1 - p).
double idle_probability(double theta_star, const TrafficModel& traffic);

/// Pr{Q > Q_th} ~ (1 - theta* L) exp(-theta* Q_th).
double queue_violation_prob(double theta_star, const TrafficModel& traffic, double q_threshold);

/// Delay-violation probability expressed through d = theta* L.
double delay_violation_prob(double d, double p, double delay_bound, double slot);

/// Clamps a probability to [0, 1]; for reporting boundaries only.
double clamp_probability(double x);

}  // namespace ecudn
