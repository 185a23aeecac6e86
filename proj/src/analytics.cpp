#include "ecudn/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ecudn/errors.hpp"

namespace ecudn {

namespace {

void require_theta(double theta, const char* who) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw DomainError(std::string(who) + ": QoS exponent must be positive and finite");
}

void require_slot(double slot) {
    if (!(slot > 0.0) || !std::isfinite(slot)) throw DomainError("slot duration must be positive");
}

void require_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

struct Interferer {
    double beta;    // mean SNR at the victim UE
    double active;  // 1 - idle probability
};

// Sum over interferers of ln((1 - P_j)/(1 + s*beta_j) + P_j), written as
// log1p(-(1 - P_j) * s*beta_j / (1 + s*beta_j)) so that it stays accurate for
// small s and well defined for s = inf.
double log_interference_factor(double s, const std::vector<Interferer>& interferers) {
    double acc = 0.0;
    for (const auto& i : interferers) {
        const double sb = s * i.beta;
        const double ratio = std::isinf(sb) ? 1.0 : sb / (1.0 + sb);
        acc += std::log1p(-i.active * ratio);
    }
    return acc;
}

// Integrates f over [0, inf) by splitting at geometric breakpoints starting
// from `first`, and extending the range by doubling until
// exp(log_tail(W)) <= tail_rel * integral.
template <class F, class Tail>
double integrate_to_infinity(F&& f, double first, Tail&& log_tail, const EcOptions& options, const char* what) {
    double end = first;
    int doublings = 0;
    while (log_tail(end) > -40.0 && doublings < 2100) {
        end *= 2.0;
        ++doublings;
    }
    const auto bp = quad::geometric_breakpoints(first, end);
    const auto head = quad::integrate(f, std::span<const double>(bp), options.quadrature);
    if (!head.converged)
        throw QuadratureError(std::string(what) + ": quadrature did not converge (estimate " +
                                  std::to_string(head.value) + ", error " + std::to_string(head.error) + ")",
                              head.value, head.error);
    double total = head.value;
    double error = head.error;
    if (!(total > 0.0))
        throw QuadratureError(std::string(what) + ": integral vanished numerically", total, error);
    while (log_tail(end) > std::log(options.tail_rel * total)) {
        if (++doublings > 2200)
            throw QuadratureError(std::string(what) + ": tail truncation point not found", total, error);
        const auto seg = quad::integrate(f, end, 2.0 * end, options.quadrature);
        if (!seg.converged)
            throw QuadratureError(std::string(what) + ": tail segment did not converge", total + seg.value,
                                  error + seg.error);
        total += seg.value;
        error += seg.error;
        end *= 2.0;
    }
    return total;
}

// Both representations of the service transform E[exp(-theta r T_s)]:
// `complement` = 1 - E and `expectation` = E. Only one of them is computed by
// quadrature, whichever keeps full relative precision; the outer logarithm is
// then taken as -log1p(-complement) or -log(expectation).
double neg_log_from_complement_or_expectation(double complement, auto&& expectation_fn, const char* what) {
    if (complement <= 0.5) return -std::log1p(-complement);
    const double e = expectation_fn();
    if (!(e > 0.0))
        throw QuadratureError(std::string(what) + ": argument of the outer logarithm is not positive", e, 0.0);
    return -std::log(e);
}

}  // namespace

void TrafficModel::validate() const {
    require_probability(p, "arrival probability");
    if (!(mean_size > 0.0) || !std::isfinite(mean_size)) throw DomainError("mean packet size must be positive");
    require_slot(slot);
}

void validate_traffic(const NetworkTraffic& traffic, std::size_t n_sbs) {
    if (traffic.size() != n_sbs)
        throw DomainError("traffic has " + std::to_string(traffic.size()) + " entries for " +
                          std::to_string(n_sbs) + " SBSs");
    for (const auto& t : traffic) {
        t.validate();
        if (t.slot != traffic.front().slot) throw DomainError("all SBSs must share one slot duration");
    }
}

void QosSpec::validate(const TrafficModel& traffic) const {
    require_theta(theta, "QosSpec");
    if (!(q_threshold >= 0.0)) throw DomainError("queue threshold must be non-negative");
    if (!(delay_bound >= 0.0)) throw DomainError("delay bound must be non-negative");
    const double dn = d(traffic);
    if (!(dn > 0.0 && dn < 1.0)) throw DomainError("theta * mean_size must lie in (0, 1)");
}

IdleProfile IdleProfile::from_exponents(std::span<const double> theta, const NetworkTraffic& traffic) {
    if (theta.size() != traffic.size()) throw DomainError("exponent/traffic size mismatch");
    std::vector<double> d(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) d[i] = theta[i] * traffic[i].mean_size;
    return from_requirements(d, traffic);
}

IdleProfile IdleProfile::from_requirements(std::span<const double> d, const NetworkTraffic& traffic) {
    if (d.size() != traffic.size()) throw DomainError("requirement/traffic size mismatch");
    IdleProfile out;
    out.idle.resize(d.size());
    out.eta.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        out.eta[i] = 1.0 - d[i];
        out.idle[i] = d[i] * (1.0 - traffic[i].p);
    }
    out.validate();
    return out;
}

IdleProfile IdleProfile::always_busy(std::size_t n) {
    return IdleProfile{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
}

IdleProfile IdleProfile::from_idle(std::vector<double> idle) {
    IdleProfile out;
    out.eta.resize(idle.size());
    for (std::size_t i = 0; i < idle.size(); ++i) out.eta[i] = 1.0 - idle[i];
    out.idle = std::move(idle);
    out.validate();
    return out;
}

void IdleProfile::validate() const {
    if (idle.size() != eta.size()) throw DomainError("idle profile size mismatch");
    for (std::size_t i = 0; i < idle.size(); ++i) {
        if (!(idle[i] >= 0.0 && idle[i] <= 1.0))
            throw DomainError("idle probability of SBS " + std::to_string(i) + " out of [0, 1]: " +
                              std::to_string(idle[i]));
        if (!(eta[i] >= 0.0 && eta[i] <= 1.0))
            throw DomainError("nonempty-buffer probability of SBS " + std::to_string(i) + " out of [0, 1]");
    }
}

double effective_bandwidth(const TrafficModel& traffic, double theta) {
    traffic.validate();
    require_theta(theta, "effective_bandwidth");
    const double d = theta * traffic.mean_size;
    if (!(d < 1.0)) throw DomainError("effective_bandwidth: theta * mean_size must be below 1 (EB pole)");
    // ln(p/(1-d) + 1 - p) = ln(1 + p*d/(1-d))
    return std::log1p(traffic.p * d / (1.0 - d)) / (theta * traffic.slot);
}

double pdf_sinr_type1(double beta11, double x) {
    if (!(beta11 > 0.0)) throw DomainError("pdf_sinr_type1: beta11 must be positive");
    if (x < 0.0) return 0.0;
    return std::exp(-x / beta11) / beta11;
}

double pdf_sinr_type2(double beta11, double beta21, double x) {
    if (!(beta11 > 0.0) || !(beta21 > 0.0)) throw DomainError("pdf_sinr_type2: mean SNRs must be positive");
    if (x < 0.0) return 0.0;
    const double denom = beta11 + beta21 * x;
    return (1.0 / denom + beta11 * beta21 / (denom * denom)) * std::exp(-x / beta11);
}

double ec_two_sbs(double theta, const LinkGainMatrix& gains, std::size_t own, double peer_idle_prob, double slot,
                  const EcOptions& options) {
    require_theta(theta, "ec_two_sbs");
    require_slot(slot);
    require_probability(peer_idle_prob, "peer idle probability");
    if (gains.size() != 2 || own > 1) throw DomainError("ec_two_sbs needs a 2x2 gain matrix");
    const std::size_t peer = 1 - own;
    const double beta11 = gains.desired(own);
    const double beta21 = gains.from_to(peer, own);
    // exp(-theta B T_s log2(1 + x)) = (1 + x)^(-k)
    const double k = theta * gains.bandwidth() * slot / std::numbers::ln2;

    // The SINR densities carry the envelope exp(-x/beta11); beyond x_max it is
    // below tail_rel.
    const double x_max = beta11 * std::log(1.0 / options.tail_rel);
    const double first = std::min({beta11, beta11 / beta21, 1.0, 1.0 / k}) / 4.0;
    const auto bp = quad::geometric_breakpoints(first, x_max);
    const std::span<const double> breaks(bp);

    auto run = [&](auto&& f) {
        const auto r = quad::integrate(f, breaks, options.quadrature);
        if (!r.converged)
            throw QuadratureError("ec_two_sbs: quadrature did not converge (estimate " + std::to_string(r.value) +
                                      ", error " + std::to_string(r.error) + ")",
                                  r.value, r.error);
        return r.value;
    };
    auto weight_complement = [k](double x) { return -std::expm1(-k * std::log1p(x)); };
    auto weight = [k](double x) { return std::exp(-k * std::log1p(x)); };

    const double w_idle = peer_idle_prob;
    const double w_busy = 1.0 - peer_idle_prob;
    double complement = 0.0;
    if (w_idle > 0.0)
        complement += w_idle * run([&](double x) { return weight_complement(x) * pdf_sinr_type1(beta11, x); });
    if (w_busy > 0.0)
        complement +=
            w_busy * run([&](double x) { return weight_complement(x) * pdf_sinr_type2(beta11, beta21, x); });

    const double neg_log = neg_log_from_complement_or_expectation(
        complement,
        [&] {
            double e = 0.0;
            if (w_idle > 0.0) e += w_idle * run([&](double x) { return weight(x) * pdf_sinr_type1(beta11, x); });
            if (w_busy > 0.0)
                e += w_busy * run([&](double x) { return weight(x) * pdf_sinr_type2(beta11, beta21, x); });
            return e;
        },
        "ec_two_sbs");
    return neg_log / (theta * slot);
}

double log_mgf_service(std::size_t n, double theta, const LinkGainMatrix& gains, std::span<const double> idle,
                       double slot, const EcOptions& options) {
    require_theta(theta, "ec_n_sbs");
    require_slot(slot);
    if (n >= gains.size()) throw DomainError("ec_n_sbs: SBS index out of range");
    if (idle.size() != gains.size()) throw DomainError("ec_n_sbs: idle profile size mismatch");

    const double beta_nn = gains.desired(n);
    std::vector<Interferer> interferers;
    double first = std::log2(1.0 + beta_nn);
    for (std::size_t j = 0; j < gains.size(); ++j) {
        if (j == n) continue;
        require_probability(idle[j], "idle probability");
        if (idle[j] >= 1.0) continue;
        const double beta = gains.from_to(j, n);
        interferers.push_back({beta, 1.0 - idle[j]});
        first = std::min(first, std::log2(1.0 + beta_nn / beta));
    }

    // t = exp(-kappa w)  =>  s(w) = (2^w - 1)/beta_nn, dt = kappa exp(-kappa w) dw.
    const double kappa = theta * gains.bandwidth() * slot;
    first = std::min(first, 1.0 / kappa) / 4.0;
    auto s_of = [beta_nn](double w) { return std::expm1(w * std::numbers::ln2) / beta_nn; };

    // 1 - E[.] = int_0^inf kappa e^{-kappa w} e^{-s} prod(.) dw
    auto complement_integrand = [&](double w) {
        const double s = s_of(w);
        return kappa * std::exp(-kappa * w - s + log_interference_factor(s, interferers));
    };
    auto complement_tail = [&](double w) { return -kappa * w - s_of(w); };
    const double complement =
        integrate_to_infinity(complement_integrand, first, complement_tail, options, "ec_n_sbs");

    return neg_log_from_complement_or_expectation(
        complement,
        [&] {
            auto integrand = [&](double w) {
                const double s = s_of(w);
                return kappa * std::exp(-kappa * w) * -std::expm1(-s + log_interference_factor(s, interferers));
            };
            auto tail = [&](double w) { return -kappa * w; };
            return integrate_to_infinity(integrand, first, tail, options, "ec_n_sbs");
        },
        "ec_n_sbs");
}

double ec_n_sbs(std::size_t n, double theta, const LinkGainMatrix& gains, std::span<const double> idle, double slot,
                const EcOptions& options) {
    return log_mgf_service(n, theta, gains, idle, slot, options) / (theta * slot);
}

double ec_n_sbs(std::size_t n, double theta, const LinkGainMatrix& gains, const IdleProfile& idle, double slot,
                const EcOptions& options) {
    idle.validate();
    return ec_n_sbs(n, theta, gains, std::span<const double>(idle.idle), slot, options);
}

double idle_probability(double theta_star, const TrafficModel& traffic) {
    traffic.validate();
    require_theta(theta_star, "idle_probability");
    const double d = theta_star * traffic.mean_size;
    if (!(d < 1.0)) throw DomainError("idle_probability: theta* * mean_size must be below 1");
    return d * (1.0 - traffic.p);
}

double queue_violation_prob(double theta_star, const TrafficModel& traffic, double q_threshold) {
    traffic.validate();
    require_theta(theta_star, "queue_violation_prob");
    if (!(q_threshold >= 0.0)) throw DomainError("queue threshold must be non-negative");
    const double d = theta_star * traffic.mean_size;
    if (!(d < 1.0)) throw DomainError("queue_violation_prob: theta* * mean_size must be below 1");
    return (1.0 - d) * std::exp(-theta_star * q_threshold);
}

double delay_violation_prob(double d, double p, double delay_bound, double slot) {
    if (!(d > 0.0 && d < 1.0)) throw DomainError("delay_violation_prob: d must lie in (0, 1)");
    require_probability(p, "arrival probability");
    if (!(delay_bound >= 0.0)) throw DomainError("delay bound must be non-negative");
    require_slot(slot);
    return (1.0 - d) * std::exp(-std::log1p(p * d / (1.0 - d)) * delay_bound / slot);
}

double clamp_probability(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace ecudn
