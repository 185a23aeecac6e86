#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's quadrature and integral forms: expectations are taken either by
// plain Monte Carlo or by composite Simpson rules over the SINR tail
// probability, Pr{SINR > y} = exp(-y/b_nn) * prod_j (P_j + (1 - P_j)/(1 + y b_jn/b_nn)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "ecudn/model.hpp"
#include "ecudn/rng.hpp"

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    if (intervals % 2) ++intervals;
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Closed-form CDF of b11*h1/(b21*h2 + 1) for unit-mean exponential h1, h2.
inline double type2_cdf(double b11, double b21, double x) {
    return 1.0 - b11 * std::exp(-x / b11) / (b11 + b21 * x);
}

/// Kolmogorov-Smirnov statistic of samples against a continuous CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - i / n, (i + 1) / n - f});
    }
    return d;
}

/// 1% critical value of the KS statistic for large n.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// 1 - E[(1+SINR)^-k] by integration by parts over the SINR tail probability,
/// on v = ln(1+y): M = k * int_0^inf exp(-k v) Pr{SINR > e^v - 1} dv.
inline double complement_by_tail(std::size_t n, double k, const ecudn::LinkGainMatrix& g,
                                  const std::vector<double>& idle, int intervals = 40000) {
    const double bnn = g.desired(n);
    auto tail = [&](double y) {
        double pr = std::exp(-y / bnn);
        for (std::size_t j = 0; j < g.size(); ++j)
            if (j != n) pr *= idle[j] + (1.0 - idle[j]) / (1.0 + y * g.from_to(j, n) / bnn);
        return pr;
    };
    // exp(-k v) and exp(-y/bnn) both bound the integrand; stop where either is < 1e-17
    const double v_end = std::min(std::log1p(40.0 * bnn), 40.0 / k);
    return k * simpson([&](double v) { return std::exp(-k * v) * tail(std::expm1(v)); }, 0.0, v_end, intervals);
}

/// Effective capacity from the tail-probability route.
inline double ec_by_tail(std::size_t n, double theta, const ecudn::LinkGainMatrix& g, const std::vector<double>& idle,
                         double slot, int intervals = 40000) {
    const double k = theta * g.bandwidth() * slot / std::numbers::ln2;
    const double m = complement_by_tail(n, k, g, idle, intervals);
    return -std::log1p(-m) / (theta * slot);
}

/// Effective capacity by enumerating every active set of the peers, weighting
/// it by its probability and Monte Carlo averaging exp(-theta T_s r) within it.
/// Fading draws are shared across sets.
inline double ec_by_enumeration(std::size_t n, double theta, const ecudn::LinkGainMatrix& g,
                                const std::vector<double>& idle, double slot, std::size_t draws_per_set,
                                std::uint64_t seed) {
    const std::size_t size = g.size();
    std::vector<std::size_t> peers;
    for (std::size_t j = 0; j < size; ++j)
        if (j != n) peers.push_back(j);
    const std::size_t sets = std::size_t{1} << peers.size();
    std::vector<double> sums(sets, 0.0);
    ecudn::RandomStream rng(seed, n, ecudn::StreamPurpose::Sampling);
    ecudn::FadingDraw h(size);
    std::vector<bool> mask(size);
    const double kappa = theta * g.bandwidth() * slot;
    for (std::size_t d = 0; d < draws_per_set; ++d) {
        h.resample(rng);
        for (std::size_t s = 0; s < sets; ++s) {
            for (std::size_t i = 0; i < peers.size(); ++i) mask[peers[i]] = (s >> i) & 1u;
            const double gamma = ecudn::sinr_masked(g, n, mask, h);
            sums[s] += std::exp(-kappa * std::log2(1.0 + gamma));
        }
    }
    double e = 0.0;
    for (std::size_t s = 0; s < sets; ++s) {
        double w = 1.0;
        for (std::size_t i = 0; i < peers.size(); ++i)
            w *= ((s >> i) & 1u) ? 1.0 - idle[peers[i]] : idle[peers[i]];
        e += w * sums[s] / static_cast<double>(draws_per_set);
    }
    return -std::log(e) / (theta * slot);
}

/// Monte Carlo mean of B log2(1 + SINR) with peers independently active.
inline double mean_rate_mc(std::size_t n, const ecudn::LinkGainMatrix& g, const std::vector<double>& idle,
                           std::size_t draws, std::uint64_t seed) {
    ecudn::RandomStream rng(seed, 0, ecudn::StreamPurpose::Sampling);
    ecudn::FadingDraw h(g.size());
    std::vector<bool> mask(g.size());
    double acc = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        h.resample(rng);
        for (std::size_t j = 0; j < g.size(); ++j) mask[j] = rng.uniform() >= idle[j];
        acc += std::log2(1.0 + ecudn::sinr_masked(g, n, mask, h));
    }
    return g.bandwidth() * acc / static_cast<double>(draws);
}

/// Random positive gain matrix with log-uniform entries; desired links in
/// [desired_lo, desired_hi] dB, cross links in [cross_lo, cross_hi] dB.
inline ecudn::LinkGainMatrix random_gains(ecudn::RandomStream& rng, std::size_t n, double bandwidth,
                                          double desired_lo = 0.0, double desired_hi = 30.0,
                                          double cross_lo = -10.0, double cross_hi = 10.0) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t m = 0; m < n; ++m) {
            const double lo = j == m ? desired_lo : cross_lo, hi = j == m ? desired_hi : cross_hi;
            rows[j][m] = lo + (hi - lo) * rng.uniform();
        }
    return ecudn::LinkGainMatrix::from_db(rows, bandwidth);
}

}  // namespace oracle
