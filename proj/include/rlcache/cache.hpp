#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rlcache/types.hpp"

namespace rlcache {

struct CacheEntry {
    Bytes size = 0;
    Tick last_access_tick = 0;
    Tick insertion_tick = 0;
    std::uint32_t access_count = 0;  // requests served since insertion, insertion included
};

// One per-day accounting row; counters are deltas for that day.
struct DayRow {
    Day day = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    Bytes rhd = 0;
    Bytes rhm = 0;
    Bytes wd = 0;
    Bytes dd = 0;
    Bytes occupancy_eod = 0;
    double hit_rate = 0.0;  // cumulative as of end of day
};

// The cache node: stored-file set, watermark bookkeeping, bandwidth gate and
// hit/miss plus data-volume accounting. Policies mutate it only through
// admit/evict so the counters stay consistent.
class Cache {
public:
    Cache(Bytes capacity, double w_high = 0.95, double w_low = 0.75,
          std::optional<Bytes> daily_limit = std::nullopt, int hit_rate_window = 0);

    Bytes capacity() const { return capacity_; }
    Bytes occupancy() const { return occupancy_; }
    double w_high() const { return w_high_; }
    double w_low() const { return w_low_; }
    Bytes high_mark() const { return high_mark_; }
    Bytes low_mark() const { return low_mark_; }
    bool above_high_mark() const { return occupancy_ >= high_mark_; }

    bool contains(FileKey file) const { return stored_.contains(file); }
    const CacheEntry* find(FileKey file) const;
    std::size_t num_stored() const { return stored_.size(); }
    const std::unordered_map<FileKey, CacheEntry>& stored() const { return stored_; }

    // Accounting views.
    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return misses_; }
    std::uint64_t requests() const { return hits_ + misses_; }
    Bytes read_on_hit() const { return rhd_; }
    Bytes read_on_miss() const { return rhm_; }
    Bytes written() const { return wd_; }
    Bytes deleted() const { return dd_; }
    double hit_rate() const;
    double occupancy_fraction() const {
        return capacity_ == 0 ? 0.0 : static_cast<double>(occupancy_) / static_cast<double>(capacity_);
    }

    // Bandwidth gate: true if serving `size` from cache would exceed the
    // enabled daily limit.
    bool gate_blocks(Bytes size) const {
        return daily_limit_ && consumed_today_ + size > *daily_limit_;
    }

    // Request paths; exactly one is called per request by the driver.
    void serve_hit(FileKey file, Tick tick);
    void serve_miss(Bytes size);       // proxy fallback (absent or gated)

    // Inserts a missed file. Requires occupancy + size <= capacity.
    void admit(FileKey file, Bytes size, Tick tick);

    // Removes a stored file; returns its size. DD accounting included.
    Bytes evict(FileKey file);

    // Removes files in `order` until occupancy <= w_low * capacity; no-op
    // below the high watermark. Returns bytes freed.
    Bytes evict_to_low_watermark(const std::vector<FileKey>& order);

    // Removes files in `order` until occupancy <= target. Returns bytes freed.
    Bytes evict_down_to(Bytes target, const std::vector<FileKey>& order);

    // Closes out one day: appends the day's accounting row and resets the
    // bandwidth gate.
    void snapshot_day(Day day);
    const std::vector<DayRow>& daily_rows() const { return daily_; }

private:
    void check_occupancy_invariant() const;

    Bytes capacity_;
    double w_high_, w_low_;
    Bytes high_mark_, low_mark_;
    Bytes occupancy_ = 0;
    std::unordered_map<FileKey, CacheEntry> stored_;

    std::uint64_t hits_ = 0, misses_ = 0;
    Bytes rhd_ = 0, rhm_ = 0, wd_ = 0, dd_ = 0;

    std::optional<Bytes> daily_limit_;
    Bytes consumed_today_ = 0;

    // Rolling hit-rate window (0 = cumulative since run start).
    int hit_rate_window_ = 0;
    std::deque<bool> recent_outcomes_;
    std::uint64_t recent_hits_ = 0;

    std::vector<DayRow> daily_;
    std::uint64_t prev_hits_ = 0, prev_misses_ = 0;
    Bytes prev_rhd_ = 0, prev_rhm_ = 0, prev_wd_ = 0, prev_dd_ = 0;
};

// Eviction orderings shared by the write-everything baselines and the
// watermark fallbacks inside the learning policies.
enum class EvictionKind { lru, lfu, size_big, size_small };

const char* to_string(EvictionKind kind);

// Total order over the cached set: LRU by ascending last access, LFU by
// ascending access count, SizeBig by descending size, SizeSmall by ascending
// size; ties broken by lower insertion tick.
std::vector<FileKey> order_for_eviction(const Cache& cache, EvictionKind kind);

}  // namespace rlcache
