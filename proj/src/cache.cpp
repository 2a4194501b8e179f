#include "rlcache/cache.hpp"

#include <algorithm>

namespace rlcache {

Cache::Cache(Bytes capacity, double w_high, double w_low,
             std::optional<Bytes> daily_limit, int hit_rate_window)
    : capacity_(capacity),
      w_high_(w_high),
      w_low_(w_low),
      daily_limit_(daily_limit),
      hit_rate_window_(hit_rate_window) {
    if (capacity == 0) throw SimError("cache capacity must be positive");
    if (!(w_low >= 0.0 && w_low <= w_high && w_high <= 1.0))
        throw SimError("watermarks must satisfy 0 <= w_low <= w_high <= 1");
    high_mark_ = static_cast<Bytes>(std::ceil(w_high_ * static_cast<double>(capacity_)));
    low_mark_ = static_cast<Bytes>(std::floor(w_low_ * static_cast<double>(capacity_)));
}

const CacheEntry* Cache::find(FileKey file) const {
    auto it = stored_.find(file);
    return it == stored_.end() ? nullptr : &it->second;
}

double Cache::hit_rate() const {
    if (hit_rate_window_ > 0) {
        if (recent_outcomes_.empty()) return 0.0;
        return static_cast<double>(recent_hits_) / static_cast<double>(recent_outcomes_.size());
    }
    const std::uint64_t total = hits_ + misses_;
    return total == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(total);
}

void Cache::serve_hit(FileKey file, Tick tick) {
    auto it = stored_.find(file);
    if (it == stored_.end()) throw SimError("serve_hit on a file that is not stored");
    CacheEntry& e = it->second;
    e.last_access_tick = tick;
    ++e.access_count;
    rhd_ += e.size;
    ++hits_;
    consumed_today_ += e.size;
    if (hit_rate_window_ > 0) {
        recent_outcomes_.push_back(true);
        ++recent_hits_;
        if (recent_outcomes_.size() > static_cast<std::size_t>(hit_rate_window_)) {
            if (recent_outcomes_.front()) --recent_hits_;
            recent_outcomes_.pop_front();
        }
    }
}

void Cache::serve_miss(Bytes size) {
    rhm_ += size;
    ++misses_;
    if (hit_rate_window_ > 0) {
        recent_outcomes_.push_back(false);
        if (recent_outcomes_.size() > static_cast<std::size_t>(hit_rate_window_)) {
            if (recent_outcomes_.front()) --recent_hits_;
            recent_outcomes_.pop_front();
        }
    }
}

void Cache::admit(FileKey file, Bytes size, Tick tick) {
    if (stored_.contains(file)) throw SimError("admit of an already stored file");
    if (occupancy_ + size > capacity_)
        throw SimError("admit would exceed capacity; caller must free space first");
    CacheEntry e;
    e.size = size;
    e.last_access_tick = tick;
    e.insertion_tick = tick;
    e.access_count = 1;
    stored_.emplace(file, e);
    occupancy_ += size;
    wd_ += size;
    check_occupancy_invariant();
}

Bytes Cache::evict(FileKey file) {
    auto it = stored_.find(file);
    if (it == stored_.end()) throw SimError("evict of a file that is not stored");
    const Bytes size = it->second.size;
    stored_.erase(it);
    occupancy_ -= size;
    dd_ += size;
    return size;
}

Bytes Cache::evict_to_low_watermark(const std::vector<FileKey>& order) {
    if (!above_high_mark()) return 0;
    return evict_down_to(low_mark_, order);
}

Bytes Cache::evict_down_to(Bytes target, const std::vector<FileKey>& order) {
    Bytes freed = 0;
    std::size_t i = 0;
    while (occupancy_ > target) {
        if (i >= order.size())
            throw SimError("eviction order exhausted with occupancy still above target "
                           "(policy bug)");
        freed += evict(order[i++]);
    }
    return freed;
}

void Cache::snapshot_day(Day day) {
    DayRow row;
    row.day = day;
    row.hits = hits_ - prev_hits_;
    row.misses = misses_ - prev_misses_;
    row.rhd = rhd_ - prev_rhd_;
    row.rhm = rhm_ - prev_rhm_;
    row.wd = wd_ - prev_wd_;
    row.dd = dd_ - prev_dd_;
    row.occupancy_eod = occupancy_;
    row.hit_rate = hit_rate();
    daily_.push_back(row);
    prev_hits_ = hits_;
    prev_misses_ = misses_;
    prev_rhd_ = rhd_;
    prev_rhm_ = rhm_;
    prev_wd_ = wd_;
    prev_dd_ = dd_;
    consumed_today_ = 0;
}

void Cache::check_occupancy_invariant() const {
    if (occupancy_ > capacity_) throw SimError("occupancy exceeds capacity");
}

const char* to_string(EvictionKind kind) {
    switch (kind) {
    case EvictionKind::lru: return "lru";
    case EvictionKind::lfu: return "lfu";
    case EvictionKind::size_big: return "size-big";
    case EvictionKind::size_small: return "size-small";
    }
    return "?";
}

std::vector<FileKey> order_for_eviction(const Cache& cache, EvictionKind kind) {
    struct Item {
        FileKey file;
        std::uint64_t primary;
        Tick insertion;
    };
    std::vector<Item> items;
    items.reserve(cache.num_stored());
    for (const auto& [file, e] : cache.stored()) {
        std::uint64_t primary = 0;
        switch (kind) {
        case EvictionKind::lru: primary = e.last_access_tick; break;
        case EvictionKind::lfu: primary = e.access_count; break;
        case EvictionKind::size_big: primary = ~e.size; break;  // descending
        case EvictionKind::size_small: primary = e.size; break;
        }
        items.push_back({file, primary, e.insertion_tick});
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.primary != b.primary) return a.primary < b.primary;
        if (a.insertion != b.insertion) return a.insertion < b.insertion;
        return a.file < b.file;
    });
    std::vector<FileKey> order;
    order.reserve(items.size());
    for (const Item& it : items) order.push_back(it.file);
    return order;
}

}  // namespace rlcache
