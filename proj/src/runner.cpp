#include "rlcache/runner.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rlcache {

using nlohmann::json;

RunResult run_one(const RunConfig& cfg, const Trace& trace, const OracleBounds& oracle) {
    auto policy = make_policy(cfg.policy_id, cfg.policy_params, cfg.seed,
                              trace.data_type_names());
    SimParams params;
    params.capacity = cfg.capacity;
    params.w_high = cfg.w_high;
    params.w_low = cfg.w_low;
    params.daily_limit = cfg.daily_limit;
    params.hit_rate_window = cfg.hit_rate_window;
    Simulator sim(params, *policy);
    sim.run(trace);

    RunResult result;
    result.policy = policy->name();
    result.capacity = cfg.capacity;
    const Cache& cache = sim.cache();
    result.totals = {cache.requests(), cache.hits(),   cache.misses(),
                     cache.read_on_hit(), cache.read_on_miss(), cache.written(),
                     cache.deleted(), cache.hit_rate(), cache.occupancy()};
    result.report = compute_report(cache, oracle);
    result.daily = cache.daily_rows();

    if (!cfg.output_dir.empty()) {
        const std::filesystem::path dir(cfg.output_dir);
        std::filesystem::create_directories(dir);
        policy->dump_artifacts(dir);
    }
    return result;
}

RunResult run_to_disk(const RunConfig& cfg) {
    const Trace trace = load_trace(cfg.trace);
    const OracleBounds oracle = infinite_cache_oracle(trace);
    RunResult result = run_one(cfg, trace, oracle);

    const std::filesystem::path dir(cfg.output_dir.empty() ? "." : cfg.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "report.json");
    if (!out) throw SimError("cannot write report.json under " + dir.string());
    out << report_to_json(cfg, result).dump(2) << '\n';
    write_daily_csv(dir / "daily.csv", result.daily);
    return result;
}

namespace {

json opt_to_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

}  // namespace

json report_to_json(const RunConfig& cfg, const RunResult& result) {
    json j;
    j["policy"] = result.policy;
    j["capacity_bytes"] = result.capacity;
    j["seed"] = cfg.seed;
    j["policy_params"] = cfg.policy_params;
    j["totals"] = {{"requests", result.totals.requests},
                   {"hits", result.totals.hits},
                   {"misses", result.totals.misses},
                   {"rhd", result.totals.rhd},
                   {"rhm", result.totals.rhm},
                   {"wd", result.totals.wd},
                   {"dd", result.totals.dd},
                   {"hit_rate", result.totals.hit_rate},
                   {"occupancy_end", result.totals.occupancy_end}};
    j["oracle"] = {{"rhd_inf", result.report.rhd_inf}, {"wd_inf", result.report.wd_inf}};
    j["metrics"] = {{"throughput", opt_to_json(result.report.throughput)},
                    {"cost", opt_to_json(result.report.cost)},
                    {"score", opt_to_json(result.report.score)},
                    {"daily_mean_throughput", opt_to_json(result.report.daily_mean_throughput)},
                    {"daily_mean_cost", opt_to_json(result.report.daily_mean_cost)},
                    {"daily_mean_score", opt_to_json(result.report.daily_mean_score)}};
    return j;
}

void write_daily_csv(const std::filesystem::path& path, const std::vector<DayRow>& rows) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot open " + path.string());
    out << "day,hits,misses,rhd,rhm,wd,dd,occupancy_eod,hit_rate\n";
    out.precision(17);
    for (const DayRow& r : rows)
        out << r.day << ',' << r.hits << ',' << r.misses << ',' << r.rhd << ',' << r.rhm
            << ',' << r.wd << ',' << r.dd << ',' << r.occupancy_eod << ',' << r.hit_rate
            << '\n';
    if (!out) throw SimError("failed writing " + path.string());
}

SweepConfig sweep_config_from_json(const json& j) {
    SweepConfig cfg;
    if (j.contains("trace")) {
        const auto& t = j.at("trace");
        if (t.contains("file")) cfg.trace.file = t.at("file").get<std::string>();
        if (t.contains("preset")) cfg.trace.preset = t.at("preset").get<std::string>();
        if (t.contains("spec")) cfg.trace.spec = trace_spec_from_json(t.at("spec"));
    }
    if (!j.contains("policies") || j.at("policies").empty())
        throw SimError("sweep config: policies list is required");
    for (const auto& p : j.at("policies")) {
        SweepEntry entry;
        if (p.is_string()) {
            entry.policy_id = p.get<std::string>();
        } else {
            json obj = p;
            entry.policy_id = obj.at("id").get<std::string>();
            obj.erase("id");
            entry.params = obj;
        }
        cfg.policies.push_back(std::move(entry));
    }
    if (!j.contains("capacities_bytes") || j.at("capacities_bytes").empty())
        throw SimError("sweep config: capacities_bytes list is required");
    cfg.capacities = j.at("capacities_bytes").get<std::vector<Bytes>>();
    cfg.w_high = j.value("w_high", cfg.w_high);
    cfg.w_low = j.value("w_low", cfg.w_low);
    if (j.contains("daily_limit_bytes") && !j.at("daily_limit_bytes").is_null())
        cfg.daily_limit = j.at("daily_limit_bytes").get<Bytes>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.hit_rate_window = j.value("hit_rate_window", cfg.hit_rate_window);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SimError("config parse error in " + path.string() + ": " + e.what());
    }
    return sweep_config_from_json(j);
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg, const Trace& trace) {
    const OracleBounds oracle = infinite_cache_oracle(trace);
    std::vector<SweepRow> rows;
    for (const Bytes capacity : cfg.capacities) {
        for (const SweepEntry& entry : cfg.policies) {
            SweepRow row;
            row.policy = entry.policy_id;
            row.capacity = capacity;
            try {
                RunConfig rc;
                rc.policy_id = entry.policy_id;
                rc.policy_params = entry.params;
                rc.capacity = capacity;
                rc.w_high = cfg.w_high;
                rc.w_low = cfg.w_low;
                rc.daily_limit = cfg.daily_limit;
                rc.seed = cfg.seed;
                rc.hit_rate_window = cfg.hit_rate_window;
                rc.output_dir.clear();  // sweep writes only the table
                const RunResult result = run_one(rc, trace, oracle);
                row.policy = result.policy;
                row.report = result.report;
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        const double sa = !a.failed && a.report.score ? *a.report.score : -1.0;
        const double sb = !b.failed && b.report.score ? *b.report.score : -1.0;
        if (sa != sb) return sa > sb;
        if (a.capacity != b.capacity) return a.capacity < b.capacity;
        return a.policy < b.policy;
    });
    return rows;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

std::string fmt_opt2(const std::optional<double>& v, bool best) {
    if (!v) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << *v;
    if (best) os << '*';
    return os.str();
}

}  // namespace

void write_table_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot open " + path.string());
    out << "policy,capacity,score,throughput,cost,rhd,rhm,wd,dd\n";
    for (const SweepRow& r : rows) {
        if (r.failed) {
            out << r.policy << ',' << r.capacity << ",ERROR,,,,,,\n";
            continue;
        }
        out << r.policy << ',' << r.capacity << ',' << fmt_opt(r.report.score) << ','
            << fmt_opt(r.report.throughput) << ',' << fmt_opt(r.report.cost) << ','
            << r.report.rhd << ',' << r.report.rhm << ',' << r.report.wd << ','
            << r.report.dd << '\n';
    }
    if (!out) throw SimError("failed writing " + path.string());
}

std::string format_table(const std::vector<SweepRow>& rows) {
    // Best score/throughput per capacity is flagged; best (lowest) cost too.
    std::unordered_map<Bytes, double> best_score, best_tp, best_cost;
    for (const SweepRow& r : rows) {
        if (r.failed) continue;
        if (r.report.score) {
            auto [it, fresh] = best_score.try_emplace(r.capacity, *r.report.score);
            if (!fresh) it->second = std::max(it->second, *r.report.score);
        }
        if (r.report.throughput) {
            auto [it, fresh] = best_tp.try_emplace(r.capacity, *r.report.throughput);
            if (!fresh) it->second = std::max(it->second, *r.report.throughput);
        }
        if (r.report.cost) {
            auto [it, fresh] = best_cost.try_emplace(r.capacity, *r.report.cost);
            if (!fresh) it->second = std::min(it->second, *r.report.cost);
        }
    }
    std::ostringstream os;
    os << std::left << std::setw(22) << "policy" << std::right << std::setw(14)
       << "capacity" << std::setw(9) << "score" << std::setw(12) << "throughput"
       << std::setw(8) << "cost" << '\n';
    for (const SweepRow& r : rows) {
        os << std::left << std::setw(22) << r.policy << std::right << std::setw(14)
           << r.capacity;
        if (r.failed) {
            os << "  ERROR: " << r.error << '\n';
            continue;
        }
        auto flag = [&](const std::unordered_map<Bytes, double>& best,
                        const std::optional<double>& v) {
            return v && best.contains(r.capacity) && *v == best.at(r.capacity);
        };
        os << std::setw(9) << fmt_opt2(r.report.score, flag(best_score, r.report.score))
           << std::setw(12)
           << fmt_opt2(r.report.throughput, flag(best_tp, r.report.throughput))
           << std::setw(8) << fmt_opt2(r.report.cost, flag(best_cost, r.report.cost))
           << '\n';
    }
    return os.str();
}

}  // namespace rlcache
