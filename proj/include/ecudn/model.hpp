#pragma once

// Network geometry, mean link gains and instantaneous SINR.
//
// Gain convention: entry (j, n) of a LinkGainMatrix is the mean received SNR
// at the UE served by SBS n from the transmission of SBS j. Row = transmitter,
// column = victim link. The diagonal holds the desired-link mean SNRs.
// Everything here is linear scale except the dB-valued radio parameters, which
// are converted exactly once when a LinkGainMatrix is built.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ecudn {

class RandomStream;

enum class InterferenceModel {
    Unsaturated,  ///< only SBSs with backlog interfere
    Full,         ///< every other SBS always interferes
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point& a, const Point& b);

double db_to_linear(double db);
double linear_to_db(double linear);

struct RadioParams {
    double tx_power_dbm = 23.0;
    double noise_density_dbm_hz = -174.0;
    double bandwidth_hz = 1e6;
    double pathloss_offset_db = 60.0;
    double pathloss_slope_db = 37.6;  ///< dB per decade of distance
    double min_distance_m = 1.0;      ///< distances below this are raised to it

    /// Noise power over the full bandwidth.
    double noise_dbm() const;
    /// Path loss at distance d (meters). Throws DomainError for d <= 0.
    double pathloss_db(double distance_m) const;
    void validate() const;
};

struct NetworkLayout {
    std::vector<Point> sbs_positions;
    std::vector<Point> served_ue_positions;  ///< one per SBS, same order
    double area_side = 500.0;
    RadioParams radio;

    std::size_t size() const { return sbs_positions.size(); }
    void validate() const;
};

class LinkGainMatrix {
public:
    LinkGainMatrix() = default;

    /// rows[j][n] = mean SNR from SBS j at the UE of SBS n (linear).
    static LinkGainMatrix from_linear(const std::vector<std::vector<double>>& rows, double bandwidth_hz);
    static LinkGainMatrix from_db(const std::vector<std::vector<double>>& rows_db, double bandwidth_hz);

    std::size_t size() const { return n_; }
    double bandwidth() const { return bandwidth_; }

    /// Mean SNR from transmitter `from` at the UE served by `served_by`.
    double from_to(std::size_t from, std::size_t served_by) const { return beta_[from * n_ + served_by]; }
    double desired(std::size_t n) const { return from_to(n, n); }

    std::vector<std::vector<double>> rows() const;

private:
    std::size_t n_ = 0;
    double bandwidth_ = 0.0;
    std::vector<double> beta_;
};

/// Squared fading magnitudes |H_{j,n}|^2, same (transmitter, victim) layout.
class FadingDraw {
public:
    FadingDraw() = default;
    explicit FadingDraw(std::size_t n, double value = 1.0) : n_(n), h_(n * n, value) {}

    static FadingDraw sample(std::size_t n, RandomStream& rng);

    std::size_t size() const { return n_; }
    double at(std::size_t from, std::size_t served_by) const { return h_[from * n_ + served_by]; }
    double& at(std::size_t from, std::size_t served_by) { return h_[from * n_ + served_by]; }

    /// Overwrites every entry with fresh unit-mean exponential draws.
    void resample(RandomStream& rng);

private:
    std::size_t n_ = 0;
    std::vector<double> h_;
};

/// SBSs are placed uniformly in [0, area_side]^2 together with
/// n_candidate_ues UEs. Each UE associates with the SBS of strongest mean
/// received power (lowest index on ties); every SBS then serves one UE drawn
/// uniformly from its associated candidates. Throws LayoutError when an SBS
/// receives no candidate.
NetworkLayout build_layout(std::size_t n_sbs, double area_side, std::size_t n_candidate_ues,
                           const RadioParams& radio, std::uint64_t seed);

/// Builds the mean-SNR matrix for a layout. Throws DomainError on a zero
/// transmitter-receiver distance.
LinkGainMatrix link_gains(const NetworkLayout& layout);

/// SINR of SBS n's link when the SBSs in active_set transmit concurrently.
/// active_set must not contain n.
double sinr(const LinkGainMatrix& gains, std::size_t n, std::span<const std::size_t> active_set,
            const FadingDraw& fading);

/// Same as sinr() with the active set given as a per-SBS mask; mask[n] is ignored.
double sinr_masked(const LinkGainMatrix& gains, std::size_t n, const std::vector<bool>& active,
                   const FadingDraw& fading);

}  // namespace ecudn
