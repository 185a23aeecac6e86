#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval
// partitioned by caller-supplied breakpoints. Error estimation follows the
// QUADPACK qk15 heuristic.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ecudn::quad {

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_intervals = 4000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {

// Kronrod abscissae; odd indices are the embedded Gauss nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
};

template <class F>
Segment gk15(F& f, double a, double b, int& evaluations) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::fabs(half);

    const double fc = f(center);
    double res_gauss = fc * kGaussWeights[3];
    double res_kronrod = fc * kKronrodWeights[7];
    double res_abs = std::fabs(res_kronrod);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kNodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double sum = f1[j] + f2[j];
        res_kronrod += kKronrodWeights[j] * sum;
        res_abs += kKronrodWeights[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
        if (j % 2 == 1) res_gauss += kGaussWeights[j / 2] * sum;
    }
    evaluations += 15;

    const double mean = 0.5 * res_kronrod;
    double res_asc = kKronrodWeights[7] * std::fabs(fc - mean);
    for (int j = 0; j < 7; ++j)
        res_asc += kKronrodWeights[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));

    const double value = res_kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    double error = std::fabs((res_kronrod - res_gauss) * half);
    if (res_asc != 0.0 && error != 0.0)
        error = res_asc * std::min(1.0, std::pow(200.0 * error / res_asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
        error = std::max(50.0 * eps * res_abs, error);
    return {a, b, value, error};
}

}  // namespace detail

/// Integrates f over [breakpoints.front(), breakpoints.back()]. Each initial
/// segment is refined by bisection of the worst-error interval until the
/// summed error estimate meets max(abs_tol, rel_tol * |value|).
template <class F>
Result integrate(F&& f, std::span<const double> breakpoints, const Options& opt = {}) {
    Result out;
    if (breakpoints.size() < 2) return out;

    auto by_error = [](const detail::Segment& l, const detail::Segment& r) { return l.error < r.error; };
    std::vector<detail::Segment> heap;
    std::vector<detail::Segment> frozen;
    heap.reserve(static_cast<std::size_t>(opt.max_intervals) + 1);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (breakpoints[i + 1] == breakpoints[i]) continue;
        heap.push_back(detail::gk15(f, breakpoints[i], breakpoints[i + 1], out.evaluations));
    }
    std::make_heap(heap.begin(), heap.end(), by_error);

    auto totals = [&](double& value, double& error) {
        value = 0.0;
        error = 0.0;
        for (const auto& s : heap) { value += s.value; error += s.error; }
        for (const auto& s : frozen) { value += s.value; error += s.error; }
    };

    double value = 0.0;
    double error = 0.0;
    totals(value, error);
    while (true) {
        if (error <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(value))) {
            out.converged = true;
            break;
        }
        if (heap.empty()) break;
        if (static_cast<int>(heap.size() + frozen.size()) >= opt.max_intervals) break;

        std::pop_heap(heap.begin(), heap.end(), by_error);
        const detail::Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            frozen.push_back(worst);
            continue;
        }
        const auto left = detail::gk15(f, worst.a, mid, out.evaluations);
        const auto right = detail::gk15(f, mid, worst.b, out.evaluations);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
    }
    totals(value, error);
    out.value = value;
    out.error = error;
    out.intervals = static_cast<int>(heap.size() + frozen.size());
    if (!out.converged) out.converged = error <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(value));
    return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    const std::array<double, 2> bp{a, b};
    return integrate(std::forward<F>(f), std::span<const double>(bp), opt);
}

/// Breakpoints 0, first, 2*first, 4*first, ... up to and including `end`.
inline std::vector<double> geometric_breakpoints(double first, double end) {
    std::vector<double> bp{0.0};
    if (!(end > 0.0)) return bp;
    double x = first > 0.0 ? std::min(first, end) : end;
    while (x < end) {
        bp.push_back(x);
        x *= 2.0;
    }
    bp.push_back(end);
    return bp;
}

}  // namespace ecudn::quad
