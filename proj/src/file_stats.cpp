#include "rlcache/file_stats.hpp"

namespace rlcache {

void FileStatsStore::prune(Entry& e, Day today) {
    // Window covers days (today - kWindowDays, today].
    while (!e.request_days.empty() && e.request_days.front() <= today - kWindowDays)
        e.request_days.pop_front();
}

FileStats FileStatsStore::update(FileKey file, Bytes size, std::uint8_t type_key,
                                 Day day, Tick tick) {
    auto [it, inserted] = entries_.try_emplace(file);
    Entry& e = it->second;

    FileStats out;
    out.size = size;
    out.type_key = type_key;
    if (inserted) {
        e.size = size;
        e.type_key = type_key;
        out.delta_days = FileStats::kNeverSeen;
        out.delta_ticks = -1;
    } else {
        out.delta_days = day - e.last_day;
        out.delta_ticks = static_cast<std::int64_t>(tick) - static_cast<std::int64_t>(e.last_tick);
    }
    e.last_day = day;
    e.last_tick = tick;
    e.request_days.push_back(day);
    prune(e, day);
    out.window_count = static_cast<std::uint32_t>(e.request_days.size());
    out.last_day = day;
    out.last_tick = tick;
    return out;
}

bool FileStatsStore::observe(FileKey file, Day today, FileStats& out) {
    auto it = entries_.find(file);
    if (it == entries_.end()) return false;
    Entry& e = it->second;
    prune(e, today);
    out.size = e.size;
    out.type_key = e.type_key;
    out.window_count = static_cast<std::uint32_t>(e.request_days.size());
    out.delta_days = today - e.last_day;
    out.delta_ticks = -1;
    out.last_day = e.last_day;
    out.last_tick = e.last_tick;
    return true;
}

void FileStatsStore::purge(Day today, const std::function<bool(FileKey)>& cached) {
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (it->second.last_day <= today - kWindowDays && !cached(it->first))
            it = entries_.erase(it);
        else
            ++it;
    }
}

}  // namespace rlcache
