#pragma once

#include <optional>
#include <vector>

#include "rlcache/cache.hpp"
#include "rlcache/trace.hpp"
#include "rlcache/types.hpp"

namespace rlcache {

// Ideal-cache upper bounds: an unlimited write-everything cache with no
// eviction. WD_inf is the bytes of distinct files, RHD_inf the bytes of every
// repeat request.
struct OracleBounds {
    Bytes rhd_inf = 0;
    Bytes wd_inf = 0;
    std::vector<Bytes> daily_rhd_inf;  // per-day deltas
    std::vector<Bytes> daily_wd_inf;
    bool empty_trace = false;
};

OracleBounds infinite_cache_oracle(const Trace& trace);

// Whole-run ratios plus means of per-day ratios. Undefined values (zero
// denominators) are left empty rather than NaN.
struct MetricsReport {
    std::optional<double> throughput;
    std::optional<double> cost;
    std::optional<double> score;
    std::optional<double> daily_mean_throughput;
    std::optional<double> daily_mean_cost;
    std::optional<double> daily_mean_score;
    Bytes rhd = 0, rhm = 0, wd = 0, dd = 0;
    Bytes rhd_inf = 0, wd_inf = 0;
    double hit_rate = 0.0;  // diagnostic only
};

MetricsReport compute_report(const Cache& cache, const OracleBounds& oracle);

}  // namespace rlcache
