#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>

#include "rlcache/types.hpp"

namespace rlcache {

// Rolling per-file statistics over a trailing 7-day window.
struct FileStats {
    Bytes size = 0;
    std::uint32_t window_count = 0;  // requests within the window, current one included
    Day delta_days = kNeverSeen;     // days since the previous request, kNeverSeen on first
    std::int64_t delta_ticks = -1;   // ticks since the previous request, -1 on first
    Day last_day = 0;
    Tick last_tick = 0;
    std::uint8_t type_key = 0;

    static constexpr Day kNeverSeen = -1;
};

class FileStatsStore {
public:
    static constexpr Day kWindowDays = 7;

    // Records a request and returns the post-update statistics for the file.
    // delta_days/delta_ticks describe the gap to the previous request.
    FileStats update(FileKey file, Bytes size, std::uint8_t type_key, Day day, Tick tick);

    // Statistics for a tracked file as of `today`, without recording a
    // request: window_count over the trailing window, delta_days since the
    // most recent request. Returns false if the file is not tracked.
    bool observe(FileKey file, Day today, FileStats& out);

    bool tracked(FileKey file) const { return entries_.contains(file); }
    std::size_t size() const { return entries_.size(); }

    // Drops entries that are not cached and have not been requested for a
    // full window. `cached` answers whether a file currently sits in cache.
    void purge(Day today, const std::function<bool(FileKey)>& cached);

private:
    struct Entry {
        Bytes size = 0;
        std::uint8_t type_key = 0;
        std::deque<Day> request_days;  // within the trailing window, oldest first
        Day last_day = 0;
        Tick last_tick = 0;
    };

    static void prune(Entry& e, Day today);

    std::unordered_map<FileKey, Entry> entries_;
};

}  // namespace rlcache
