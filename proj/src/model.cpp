#include "ecudn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ecudn/errors.hpp"
#include "ecudn/rng.hpp"

namespace ecudn {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double RadioParams::noise_dbm() const { return noise_density_dbm_hz + 10.0 * std::log10(bandwidth_hz); }

double RadioParams::pathloss_db(double distance_m) const {
    if (!(distance_m > 0.0))
        throw DomainError("path loss is singular at distance " + std::to_string(distance_m) + " m");
    return pathloss_offset_db + pathloss_slope_db * std::log10(std::max(distance_m, min_distance_m));
}

void RadioParams::validate() const {
    if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be positive");
    if (!(min_distance_m > 0.0)) throw DomainError("minimum distance must be positive");
    if (!std::isfinite(tx_power_dbm) || !std::isfinite(noise_density_dbm_hz) ||
        !std::isfinite(pathloss_offset_db) || !std::isfinite(pathloss_slope_db))
        throw DomainError("radio parameters must be finite");
}

void NetworkLayout::validate() const {
    radio.validate();
    if (!(area_side > 0.0)) throw DomainError("area side must be positive");
    if (sbs_positions.empty()) throw DomainError("layout has no SBS");
    if (served_ue_positions.size() != sbs_positions.size())
        throw DomainError("layout needs exactly one served UE per SBS");
    auto inside = [&](const Point& p) { return p.x >= 0.0 && p.x <= area_side && p.y >= 0.0 && p.y <= area_side; };
    if (!std::all_of(sbs_positions.begin(), sbs_positions.end(), inside) ||
        !std::all_of(served_ue_positions.begin(), served_ue_positions.end(), inside))
        throw DomainError("layout position outside the deployment area");
}

LinkGainMatrix LinkGainMatrix::from_linear(const std::vector<std::vector<double>>& rows, double bandwidth_hz) {
    if (rows.empty()) throw DomainError("gain matrix is empty");
    if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be positive");
    LinkGainMatrix g;
    g.n_ = rows.size();
    g.bandwidth_ = bandwidth_hz;
    g.beta_.reserve(g.n_ * g.n_);
    for (const auto& row : rows) {
        if (row.size() != g.n_) throw DomainError("gain matrix must be square");
        for (double v : row) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw DomainError("gain matrix entries must be positive and finite");
            g.beta_.push_back(v);
        }
    }
    return g;
}

LinkGainMatrix LinkGainMatrix::from_db(const std::vector<std::vector<double>>& rows_db, double bandwidth_hz) {
    std::vector<std::vector<double>> rows = rows_db;
    for (auto& row : rows)
        for (double& v : row) v = db_to_linear(v);
    return from_linear(rows, bandwidth_hz);
}

std::vector<std::vector<double>> LinkGainMatrix::rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
    for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t n = 0; n < n_; ++n) out[j][n] = from_to(j, n);
    return out;
}

FadingDraw FadingDraw::sample(std::size_t n, RandomStream& rng) {
    FadingDraw h(n, 0.0);
    h.resample(rng);
    return h;
}

void FadingDraw::resample(RandomStream& rng) {
    for (double& v : h_) v = rng.exponential(1.0);
}

NetworkLayout build_layout(std::size_t n_sbs, double area_side, std::size_t n_candidate_ues,
                           const RadioParams& radio, std::uint64_t seed) {
    if (n_sbs < 1) throw DomainError("need at least one SBS");
    if (n_candidate_ues < n_sbs) throw DomainError("need at least as many candidate UEs as SBSs");
    if (!(area_side > 0.0)) throw DomainError("area side must be positive");
    radio.validate();

    RandomStream rng(seed, 0, StreamPurpose::Layout);
    auto draw_point = [&] {
        const double x = rng.uniform() * area_side;
        const double y = rng.uniform() * area_side;
        return Point{x, y};
    };

    NetworkLayout layout;
    layout.area_side = area_side;
    layout.radio = radio;
    layout.sbs_positions.reserve(n_sbs);
    for (std::size_t i = 0; i < n_sbs; ++i) layout.sbs_positions.push_back(draw_point());

    std::vector<std::vector<Point>> candidates(n_sbs);
    for (std::size_t u = 0; u < n_candidate_ues; ++u) {
        const Point ue = draw_point();
        // Equal transmit power everywhere, so the strongest mean received power
        // is the smallest path loss. Strict comparison keeps the lowest index on ties.
        std::size_t best = 0;
        double best_loss = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_sbs; ++j) {
            const double d = std::max(distance(layout.sbs_positions[j], ue), radio.min_distance_m);
            const double loss = radio.pathloss_db(d);
            if (loss < best_loss) {
                best_loss = loss;
                best = j;
            }
        }
        candidates[best].push_back(ue);
    }

    layout.served_ue_positions.reserve(n_sbs);
    for (std::size_t j = 0; j < n_sbs; ++j) {
        if (candidates[j].empty())
            throw LayoutError("SBS " + std::to_string(j) + " has no associated candidate UE (seed " +
                              std::to_string(seed) + ")");
        layout.served_ue_positions.push_back(candidates[j][rng.below(candidates[j].size())]);
    }
    return layout;
}

LinkGainMatrix link_gains(const NetworkLayout& layout) {
    layout.validate();
    const auto& radio = layout.radio;
    const std::size_t n = layout.size();
    const double noise_dbm = radio.noise_dbm();
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const double d = distance(layout.sbs_positions[j], layout.served_ue_positions[k]);
            rows[j][k] = db_to_linear(radio.tx_power_dbm - radio.pathloss_db(d) - noise_dbm);
        }
    }
    return LinkGainMatrix::from_linear(rows, radio.bandwidth_hz);
}

double sinr_masked(const LinkGainMatrix& gains, std::size_t n, const std::vector<bool>& active,
                   const FadingDraw& fading) {
    double interference = 0.0;
    for (std::size_t j = 0; j < gains.size(); ++j)
        if (j != n && active[j]) interference += gains.from_to(j, n) * fading.at(j, n);
    return gains.desired(n) * fading.at(n, n) / (interference + 1.0);
}

double sinr(const LinkGainMatrix& gains, std::size_t n, std::span<const std::size_t> active_set,
            const FadingDraw& fading) {
    if (n >= gains.size() || fading.size() != gains.size()) throw DomainError("sinr: index or size mismatch");
    std::vector<bool> mask(gains.size(), false);
    for (std::size_t j : active_set) {
        if (j == n) throw DomainError("sinr: active set must exclude the served SBS");
        if (j >= gains.size()) throw DomainError("sinr: active SBS index out of range");
        mask[j] = true;
    }
    return sinr_masked(gains, n, mask, fading);
}

}  // namespace ecudn
