#pragma once

#include <filesystem>
#include <string>

#include "rlcache/cache.hpp"
#include "rlcache/file_stats.hpp"
#include "rlcache/trace.hpp"
#include "rlcache/types.hpp"

namespace rlcache {

// A caching policy, driven by the simulator once per request. The driver owns
// ordering: day boundary, statistics update, hit/miss resolution and
// accounting, admission, watermark checks, then after_request.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;

    // Binds the policy to a run's cache and statistics store.
    virtual void bind(Cache& cache, FileStatsStore& stats) {
        cache_ = &cache;
        stats_ = &stats;
    }

    // Called before the request's statistics update, after day boundaries.
    virtual void before_request(const Trace::Row& req) { (void)req; }

    // Admission decision for a missed file that fits in the cache.
    virtual bool admit(const Trace::Row& req, const FileStats& st) = 0;

    // Frees space so that occupancy + needed <= capacity. Called before an
    // admission when the file does not fit as-is.
    virtual void make_room(Bytes needed) = 0;

    // Called right after an insertion pushed occupancy to / past W_high.
    virtual void on_high_watermark() = 0;

    // Called once per request after the outcome is final; request_index is
    // 1-based. Settlement of delayed rewards, periodic eviction triggers and
    // training all live here.
    virtual void after_request(const Trace::Row& req, const FileStats& st,
                               RequestOutcome outcome, std::uint64_t request_index) {
        (void)req; (void)st; (void)outcome; (void)request_index;
    }

    // Called at each day boundary, after the completed day's snapshot.
    virtual void on_day_boundary(Day completed_day) { (void)completed_day; }

    // Called once after the last request.
    virtual void on_run_end() {}

    // Writes policy-specific artifacts (Q-table dumps, network checkpoints).
    virtual void dump_artifacts(const std::filesystem::path& dir) const { (void)dir; }

protected:
    Cache& cache() { return *cache_; }
    FileStatsStore& stats() { return *stats_; }

private:
    Cache* cache_ = nullptr;
    FileStatsStore* stats_ = nullptr;
};

}  // namespace rlcache
