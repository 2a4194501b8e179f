#pragma once

#include "rlcache/config.hpp"
#include "rlcache/metrics.hpp"

namespace rlcache {

struct RunTotals {
    std::uint64_t requests = 0, hits = 0, misses = 0;
    Bytes rhd = 0, rhm = 0, wd = 0, dd = 0;
    double hit_rate = 0.0;
    Bytes occupancy_end = 0;
};

struct RunResult {
    std::string policy;
    Bytes capacity = 0;
    RunTotals totals;
    MetricsReport report;
    std::vector<DayRow> daily;
};

// Simulates one policy over a trace. The oracle must come from the same
// trace; pass a cached one to share it across runs.
RunResult run_one(const RunConfig& cfg, const Trace& trace, const OracleBounds& oracle);

// Full artifact-producing run: report.json, daily.csv, policy dumps.
RunResult run_to_disk(const RunConfig& cfg);

nlohmann::json report_to_json(const RunConfig& cfg, const RunResult& result);
void write_daily_csv(const std::filesystem::path& path, const std::vector<DayRow>& rows);

struct SweepEntry {
    std::string policy_id;
    nlohmann::json params = nlohmann::json::object();
};

struct SweepConfig {
    TraceSource trace;
    std::vector<SweepEntry> policies;
    std::vector<Bytes> capacities;
    double w_high = 0.95;
    double w_low = 0.75;
    std::optional<Bytes> daily_limit;
    std::uint64_t seed = 1;
    int hit_rate_window = 0;
    std::string output_dir = "out";
};

SweepConfig load_sweep_config(const std::filesystem::path& path);
SweepConfig sweep_config_from_json(const nlohmann::json& j);

struct SweepRow {
    std::string policy;
    Bytes capacity = 0;
    bool failed = false;
    std::string error;
    MetricsReport report;
};

// One row per (policy, capacity), sorted by Score descending; failed runs
// keep their row with an error marker. The oracle pass runs once.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg, const Trace& trace);

void write_table_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
std::string format_table(const std::vector<SweepRow>& rows);

}  // namespace rlcache
