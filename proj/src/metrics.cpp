#include "rlcache/metrics.hpp"

#include <unordered_set>

namespace rlcache {

OracleBounds infinite_cache_oracle(const Trace& trace) {
    OracleBounds out;
    out.empty_trace = trace.empty();
    if (trace.empty()) return out;

    const auto days = static_cast<std::size_t>(trace.num_days());
    out.daily_rhd_inf.assign(days, 0);
    out.daily_wd_inf.assign(days, 0);

    std::unordered_set<FileKey> seen;
    seen.reserve(trace.num_files());
    for (const auto& row : trace.rows()) {
        if (seen.insert(row.file).second) {
            out.wd_inf += row.size;
            out.daily_wd_inf[static_cast<std::size_t>(row.day)] += row.size;
        } else {
            out.rhd_inf += row.size;
            out.daily_rhd_inf[static_cast<std::size_t>(row.day)] += row.size;
        }
    }
    return out;
}

MetricsReport compute_report(const Cache& cache, const OracleBounds& oracle) {
    MetricsReport r;
    r.rhd = cache.read_on_hit();
    r.rhm = cache.read_on_miss();
    r.wd = cache.written();
    r.dd = cache.deleted();
    r.rhd_inf = oracle.rhd_inf;
    r.wd_inf = oracle.wd_inf;
    r.hit_rate = cache.hit_rate();

    if (oracle.rhd_inf > 0)
        r.throughput = static_cast<double>(r.rhd) / static_cast<double>(oracle.rhd_inf);
    if (oracle.wd_inf > 0)
        r.cost = static_cast<double>(r.wd + r.dd) / (2.0 * static_cast<double>(oracle.wd_inf));
    if (r.throughput && r.cost && *r.cost > 0.0) r.score = *r.throughput / *r.cost;

    // Daily means: each day's own counters against that day's oracle deltas;
    // days with a zero denominator are skipped.
    double tp_sum = 0.0, cost_sum = 0.0, score_sum = 0.0;
    std::size_t tp_n = 0, cost_n = 0, score_n = 0;
    for (const DayRow& row : cache.daily_rows()) {
        const auto d = static_cast<std::size_t>(row.day);
        const Bytes rhd_inf_d = d < oracle.daily_rhd_inf.size() ? oracle.daily_rhd_inf[d] : 0;
        const Bytes wd_inf_d = d < oracle.daily_wd_inf.size() ? oracle.daily_wd_inf[d] : 0;
        std::optional<double> tp_d, cost_d;
        if (rhd_inf_d > 0) {
            tp_d = static_cast<double>(row.rhd) / static_cast<double>(rhd_inf_d);
            tp_sum += *tp_d;
            ++tp_n;
        }
        if (wd_inf_d > 0) {
            cost_d = static_cast<double>(row.wd + row.dd) / (2.0 * static_cast<double>(wd_inf_d));
            cost_sum += *cost_d;
            ++cost_n;
        }
        if (tp_d && cost_d && *cost_d > 0.0) {
            score_sum += *tp_d / *cost_d;
            ++score_n;
        }
    }
    if (tp_n > 0) r.daily_mean_throughput = tp_sum / static_cast<double>(tp_n);
    if (cost_n > 0) r.daily_mean_cost = cost_sum / static_cast<double>(cost_n);
    if (score_n > 0) r.daily_mean_score = score_sum / static_cast<double>(score_n);
    return r;
}

}  // namespace rlcache
