#include "ecudn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ecudn/errors.hpp"
#include "ecudn/parallel.hpp"
#include "ecudn/rng.hpp"

namespace ecudn {

void SimConfig::validate() const {
    if (runs < 1) throw DomainError("simulation needs at least one run");
    if (!(slots > effective_warmup())) throw DomainError("simulation slots must exceed the warmup");
    if (!(q_threshold >= 0.0)) throw DomainError("queue threshold must be non-negative");
    if (!(delay_bound >= 0.0)) throw DomainError("delay bound must be non-negative");
}

QueueNetwork::QueueNetwork(const LinkGainMatrix& gains, const NetworkTraffic& traffic, InterferenceModel model,
                           double delay_bound_slots)
    : gains_(gains), traffic_(traffic), model_(model), delay_bound_slots_(delay_bound_slots) {
    validate_traffic(traffic, gains.size());
    const std::size_t n = gains.size();
    backlog_.assign(n, 0.0);
    fifo_.resize(n);
    out_.transmitting.assign(n, false);
    out_.busy.assign(n, false);
    out_.sinr.assign(n, 0.0);
    out_.capacity.assign(n, 0.0);
    out_.served.assign(n, 0.0);
    out_.backlog_after_service.assign(n, 0.0);
    out_.delay_bit_slots.assign(n, 0.0);
    out_.late_bits.assign(n, 0.0);
}

const QueueNetwork::SlotOutcome& QueueNetwork::step(const FadingDraw& fading, std::span<const double> arrivals) {
    const std::size_t n_sbs = gains_.size();
    const double bits_per_unit_rate = gains_.bandwidth() * traffic_.front().slot;

    for (std::size_t n = 0; n < n_sbs; ++n) {
        out_.busy[n] = backlog_[n] > 0.0;
        out_.transmitting[n] = model_ == InterferenceModel::Full || out_.busy[n];
    }

    for (std::size_t n = 0; n < n_sbs; ++n) {
        out_.served[n] = 0.0;
        out_.delay_bit_slots[n] = 0.0;
        out_.late_bits[n] = 0.0;
        if (!out_.busy[n]) {
            out_.sinr[n] = 0.0;
            out_.capacity[n] = 0.0;
            continue;
        }
        const double gamma = sinr_masked(gains_, n, out_.transmitting, fading);
        const double capacity = bits_per_unit_rate * std::log2(1.0 + gamma);
        out_.sinr[n] = gamma;
        out_.capacity[n] = capacity;

        auto& q = fifo_[n];
        if (capacity >= backlog_[n]) {
            out_.served[n] = backlog_[n];
            for (const auto& c : q) {
                const double delay = static_cast<double>(slot_ - c.arrival_slot);
                out_.delay_bit_slots[n] += c.bits * delay;
                if (delay > delay_bound_slots_) out_.late_bits[n] += c.bits;
            }
            q.clear();
            backlog_[n] = 0.0;
        } else {
            double remaining = capacity;
            while (remaining > 0.0 && !q.empty()) {
                auto& head = q.front();
                const double take = std::min(head.bits, remaining);
                const double delay = static_cast<double>(slot_ - head.arrival_slot);
                out_.delay_bit_slots[n] += take * delay;
                if (delay > delay_bound_slots_) out_.late_bits[n] += take;
                remaining -= take;
                head.bits -= take;
                if (head.bits <= 0.0) q.pop_front();
            }
            out_.served[n] = capacity;
            backlog_[n] -= capacity;
        }
    }

    for (std::size_t n = 0; n < n_sbs; ++n) {
        out_.backlog_after_service[n] = backlog_[n];
        if (arrivals[n] > 0.0) {
            backlog_[n] += arrivals[n];
            fifo_[n].push_back({slot_, arrivals[n]});
        }
    }
    ++slot_;
    return out_;
}

RunStats run_replication(const LinkGainMatrix& gains, const NetworkTraffic& traffic, const SimConfig& config,
                         std::uint64_t run_index, InterferenceModel model) {
    config.validate();
    const std::size_t n_sbs = gains.size();
    validate_traffic(traffic, n_sbs);
    const double slot = traffic.front().slot;

    RandomStream fading_rng(config.seed, run_index, StreamPurpose::Fading);
    RandomStream arrival_rng(config.seed, run_index, StreamPurpose::Arrivals);
    RandomStream size_rng(config.seed, run_index, StreamPurpose::Sizes);
    RandomStream reservoir_rng(config.seed, run_index, StreamPurpose::SinrReservoir);

    QueueNetwork network(gains, traffic, model, config.delay_bound / slot);
    FadingDraw fading(n_sbs, 0.0);
    std::vector<double> arrivals(n_sbs, 0.0);

    std::vector<double> violations(n_sbs, 0.0), queue_sum(n_sbs, 0.0), busy(n_sbs, 0.0);
    std::vector<double> recorded_served(n_sbs, 0.0), departed(n_sbs, 0.0), delay_sum(n_sbs, 0.0), late(n_sbs, 0.0);
    std::vector<double> arrived_total(n_sbs, 0.0), served_total(n_sbs, 0.0);
    std::vector<std::uint64_t> sinr_seen(n_sbs, 0);

    RunStats stats;
    stats.run_index = run_index;
    stats.sbs.resize(n_sbs);

    const std::uint64_t warmup = config.effective_warmup();
    for (std::uint64_t t = 0; t < config.slots; ++t) {
        fading.resample(fading_rng);
        for (std::size_t n = 0; n < n_sbs; ++n) {
            // Both draws are consumed every slot so paired runs stay aligned.
            const bool arrives = arrival_rng.bernoulli(traffic[n].p);
            const double size = size_rng.exponential(traffic[n].mean_size);
            arrivals[n] = arrives ? size : 0.0;
        }
        const auto& out = network.step(fading, arrivals);
        for (std::size_t n = 0; n < n_sbs; ++n) {
            arrived_total[n] += arrivals[n];
            served_total[n] += out.served[n];
        }
        if (t < warmup) continue;
        for (std::size_t n = 0; n < n_sbs; ++n) {
            const double q = out.backlog_after_service[n];
            if (q > config.q_threshold) violations[n] += 1.0;
            queue_sum[n] += q;
            if (out.busy[n]) busy[n] += 1.0;
            recorded_served[n] += out.served[n];
            departed[n] += out.served[n];
            delay_sum[n] += out.delay_bit_slots[n];
            late[n] += out.late_bits[n];
            if (config.record_sinr && out.busy[n]) {
                auto& reservoir = stats.sbs[n].sinr;
                const std::uint64_t seen = sinr_seen[n]++;
                if (reservoir.size() < config.sinr_reservoir) {
                    reservoir.push_back(out.sinr[n]);
                } else {
                    const std::uint64_t k = reservoir_rng.below(seen + 1);
                    if (k < config.sinr_reservoir) reservoir[k] = out.sinr[n];
                }
            }
        }
    }

    const double recorded = static_cast<double>(config.slots - warmup);
    const auto backlog = network.backlog();
    for (std::size_t n = 0; n < n_sbs; ++n) {
        auto& s = stats.sbs[n];
        s.violation = violations[n] / recorded;
        s.mean_queue = queue_sum[n] / recorded;
        s.busy_fraction = busy[n] / recorded;
        s.throughput = recorded_served[n] / (recorded * slot);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.mean_delay = departed[n] > 0.0 ? delay_sum[n] / departed[n] : nan;
        s.delay_violation = departed[n] > 0.0 ? late[n] / departed[n] : nan;
        s.arrived_bits = arrived_total[n];
        s.served_bits = served_total[n];
        s.final_queue = backlog[n];
    }
    return stats;
}

RunStats run_full_interference_replication(const LinkGainMatrix& gains, const NetworkTraffic& traffic,
                                           const SimConfig& config, std::uint64_t run_index) {
    return run_replication(gains, traffic, config, run_index, InterferenceModel::Full);
}

std::vector<RunStats> simulate(const LinkGainMatrix& gains, const NetworkTraffic& traffic, const SimConfig& config,
                               InterferenceModel model, std::size_t jobs) {
    config.validate();
    std::vector<RunStats> runs(config.runs);
    parallel_for(runs.size(), jobs,
                 [&](std::size_t r) { runs[r] = run_replication(gains, traffic, config, r, model); });
    return runs;
}

Estimate estimate(std::span<const double> values) {
    Estimate e;
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        sum += v;
        ++e.samples;
    }
    if (e.samples == 0) {
        e.mean = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    e.mean = sum / static_cast<double>(e.samples);
    if (e.samples < 2) return e;
    double ss = 0.0;
    for (double v : values)
        if (std::isfinite(v)) ss += (v - e.mean) * (v - e.mean);
    const double sd = std::sqrt(ss / static_cast<double>(e.samples - 1));
    e.half_width = 1.959963984540054 * sd / std::sqrt(static_cast<double>(e.samples));
    return e;
}

SimStats aggregate(std::span<const RunStats> runs) {
    if (runs.empty()) throw DomainError("aggregate needs at least one run");
    std::vector<const RunStats*> ordered;
    ordered.reserve(runs.size());
    for (const auto& r : runs) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const RunStats* a, const RunStats* b) { return a->run_index < b->run_index; });

    const std::size_t n_sbs = ordered.front()->sbs.size();
    SimStats stats;
    stats.runs = runs.size();
    stats.sbs.resize(n_sbs);
    stats.sinr_samples.resize(n_sbs);
    std::vector<double> column(ordered.size());
    auto summarize = [&](std::size_t n, double SbsRunStats::*field) {
        for (std::size_t r = 0; r < ordered.size(); ++r) {
            if (ordered[r]->sbs.size() != n_sbs) throw DomainError("aggregate: runs disagree on network size");
            column[r] = ordered[r]->sbs[n].*field;
        }
        return estimate(column);
    };
    for (std::size_t n = 0; n < n_sbs; ++n) {
        auto& s = stats.sbs[n];
        s.violation = summarize(n, &SbsRunStats::violation);
        s.mean_queue = summarize(n, &SbsRunStats::mean_queue);
        s.mean_delay = summarize(n, &SbsRunStats::mean_delay);
        s.delay_violation = summarize(n, &SbsRunStats::delay_violation);
        s.busy_fraction = summarize(n, &SbsRunStats::busy_fraction);
        s.idle_fraction = s.busy_fraction;
        s.idle_fraction.mean = 1.0 - s.busy_fraction.mean;
        s.throughput = summarize(n, &SbsRunStats::throughput);
        for (const auto* r : ordered)
            stats.sinr_samples[n].insert(stats.sinr_samples[n].end(), r->sbs[n].sinr.begin(), r->sbs[n].sinr.end());
    }
    return stats;
}

std::vector<double> collect_sinr_samples(const LinkGainMatrix& gains, std::size_t n, std::span<const double> idle,
                                         std::size_t draws, std::uint64_t seed) {
    if (draws < 1) throw DomainError("collect_sinr_samples needs at least one draw");
    if (n >= gains.size() || idle.size() != gains.size()) throw DomainError("collect_sinr_samples: size mismatch");
    RandomStream activity(seed, n, StreamPurpose::Sampling);
    RandomStream fading(seed, n, StreamPurpose::Fading);
    std::vector<double> out;
    out.reserve(draws);
    for (std::size_t k = 0; k < draws; ++k) {
        double interference = 0.0;
        for (std::size_t j = 0; j < gains.size(); ++j) {
            if (j == n) continue;
            const bool active = !activity.bernoulli(idle[j]);
            const double h = fading.exponential(1.0);
            if (active) interference += gains.from_to(j, n) * h;
        }
        out.push_back(gains.desired(n) * fading.exponential(1.0) / (interference + 1.0));
    }
    return out;
}

}  // namespace ecudn
