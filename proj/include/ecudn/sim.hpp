#pragma once

// Slot-level Monte Carlo simulation of N coupled FIFO queues whose service
// rates depend on which peers are transmitting.
//
// Slot t: (1) the transmitting set is the SBSs with backlog at slot start
// (every SBS under the full-interference model); (2) fresh Rayleigh block
// fading; (3) each backlogged SBS serves min(Q, B T_s log2(1 + SINR)) bits;
// (4) each SBS receives an exponentially sized arrival with probability p.
// Queue statistics are sampled between (3) and (4), i.e. on the backlog an
// arriving payload finds.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "ecudn/analytics.hpp"
#include "ecudn/model.hpp"

namespace ecudn {

struct SimConfig {
    std::uint64_t slots = 100000;
    std::uint64_t runs = 2000;
    std::optional<std::uint64_t> warmup;  ///< 5% of slots when unset
    std::uint64_t seed = 1;
    double q_threshold = 10.0;  ///< bits
    double delay_bound = 0.01;  ///< seconds, for the delay-tail statistic
    bool record_sinr = false;
    std::size_t sinr_reservoir = 1000;

    std::uint64_t effective_warmup() const { return warmup.value_or(slots / 20); }
    void validate() const;
};

/// Raw per-run, per-SBS statistics.
struct SbsRunStats {
    double violation = 0.0;        ///< fraction of recorded slots with backlog > q_threshold
    double mean_queue = 0.0;       ///< bits
    double mean_delay = 0.0;       ///< slots per departing bit; NaN if nothing departed
    double delay_violation = 0.0;  ///< fraction of departing bits delayed beyond delay_bound; NaN if none
    double busy_fraction = 0.0;    ///< recorded slots that started with backlog
    double throughput = 0.0;       ///< bit/s
    double arrived_bits = 0.0;     ///< whole run, warmup included
    double served_bits = 0.0;      ///< whole run, warmup included
    double final_queue = 0.0;
    std::vector<double> sinr;      ///< reservoir of SINRs seen while transmitting
};

struct RunStats {
    std::uint64_t run_index = 0;
    std::vector<SbsRunStats> sbs;
};

struct Estimate {
    double mean = 0.0;
    std::optional<double> half_width;  ///< 95% normal CI; empty with fewer than two samples
    std::size_t samples = 0;

    bool covers(double value) const {
        return half_width && value >= mean - *half_width && value <= mean + *half_width;
    }
};

struct SbsSummary {
    Estimate violation;
    Estimate mean_queue;
    Estimate mean_delay;
    Estimate delay_violation;
    Estimate busy_fraction;
    Estimate idle_fraction;
    Estimate throughput;
};

struct SimStats {
    std::size_t runs = 0;
    std::vector<SbsSummary> sbs;
    std::vector<std::vector<double>> sinr_samples;  ///< pooled reservoirs per SBS
};

/// Deterministic queue dynamics of the network; randomness is supplied per slot.
class QueueNetwork {
public:
    struct SlotOutcome {
        std::vector<bool> transmitting;  ///< interferer set used this slot
        std::vector<bool> busy;          ///< backlog at slot start
        std::vector<double> sinr;        ///< of backlogged SBSs, 0 otherwise
        std::vector<double> capacity;    ///< bits servable this slot
        std::vector<double> served;
        std::vector<double> backlog_after_service;
        std::vector<double> delay_bit_slots;  ///< sum over departed bits of their delay
        std::vector<double> late_bits;        ///< departed bits with delay > bound
    };

    QueueNetwork(const LinkGainMatrix& gains, const NetworkTraffic& traffic, InterferenceModel model,
                 double delay_bound_slots);

    /// Advances one slot. arrivals[n] is the payload in bits (0 for none).
    const SlotOutcome& step(const FadingDraw& fading, std::span<const double> arrivals);

    std::span<const double> backlog() const { return backlog_; }
    std::uint64_t slot() const { return slot_; }

private:
    struct Chunk {
        std::uint64_t arrival_slot;
        double bits;
    };

    const LinkGainMatrix& gains_;
    const NetworkTraffic& traffic_;
    InterferenceModel model_;
    double delay_bound_slots_;
    std::uint64_t slot_ = 0;
    std::vector<double> backlog_;
    std::vector<std::deque<Chunk>> fifo_;
    SlotOutcome out_;
};

/// One replication; deterministic in (config.seed, run_index).
RunStats run_replication(const LinkGainMatrix& gains, const NetworkTraffic& traffic, const SimConfig& config,
                         std::uint64_t run_index, InterferenceModel model = InterferenceModel::Unsaturated);

/// Same with every peer always transmitting.
RunStats run_full_interference_replication(const LinkGainMatrix& gains, const NetworkTraffic& traffic,
                                           const SimConfig& config, std::uint64_t run_index);

/// Runs config.runs replications on up to `jobs` threads, ordered by run index.
std::vector<RunStats> simulate(const LinkGainMatrix& gains, const NetworkTraffic& traffic, const SimConfig& config,
                               InterferenceModel model = InterferenceModel::Unsaturated, std::size_t jobs = 1);

/// Across-run means with 95% normal-approximation half-widths.
SimStats aggregate(std::span<const RunStats> runs);

Estimate estimate(std::span<const double> values);

/// SINR samples of SBS n with each peer j independently transmitting with
/// probability 1 - idle[j].
std::vector<double> collect_sinr_samples(const LinkGainMatrix& gains, std::size_t n, std::span<const double> idle,
                                         std::size_t draws, std::uint64_t seed);

}  // namespace ecudn
