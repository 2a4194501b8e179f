#pragma once

#include <functional>
#include <optional>

#include "rlcache/cache.hpp"
#include "rlcache/file_stats.hpp"
#include "rlcache/policy.hpp"
#include "rlcache/trace.hpp"

namespace rlcache {

struct SimParams {
    Bytes capacity = 0;
    double w_high = 0.95;
    double w_low = 0.75;
    std::optional<Bytes> daily_limit;  // bandwidth gate, disabled by default
    int hit_rate_window = 0;           // 0 = cumulative
};

// Per-request simulation driver. Strictly sequential and tick-ordered; one
// Simulator per run.
class Simulator {
public:
    using Observer = std::function<void(const Trace::Row&, RequestOutcome)>;
    using AdmissionObserver = std::function<void(const Trace::Row&, bool stored)>;
    // Fires right after a policy eviction path (make_room / high watermark)
    // returns, with the occupancy at that point.
    using EvictionEventObserver = std::function<void(Bytes occupancy_after)>;

    Simulator(const SimParams& params, Policy& policy);

    RequestOutcome process(const Trace::Row& req);

    // Variant with an explicit tick claim; rejects out-of-order or duplicate
    // ticks.
    RequestOutcome process(const Trace::Row& req, Tick claimed_tick);

    // Processes a whole trace: every request, day snapshots, final flush.
    void run(const Trace& trace);

    const Cache& cache() const { return cache_; }
    Cache& cache() { return cache_; }
    FileStatsStore& stats() { return stats_; }
    std::uint64_t request_index() const { return request_index_; }
    Day current_day() const { return current_day_; }

    void set_observer(Observer fn) { observer_ = std::move(fn); }
    void set_admission_observer(AdmissionObserver fn) { admission_observer_ = std::move(fn); }
    void set_eviction_event_observer(EvictionEventObserver fn) {
        eviction_event_observer_ = std::move(fn);
    }

private:
    void advance_day_to(Day day);

    Cache cache_;
    FileStatsStore stats_;
    Policy& policy_;
    std::uint64_t request_index_ = 0;
    Day current_day_ = 0;
    Tick expected_tick_ = 0;
    bool finished_ = false;
    Observer observer_;
    AdmissionObserver admission_observer_;
    EvictionEventObserver eviction_event_observer_;
};

}  // namespace rlcache
