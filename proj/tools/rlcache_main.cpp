#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlcache/config.hpp"
#include "rlcache/metrics.hpp"
#include "rlcache/runner.hpp"
#include "rlcache/trace.hpp"

namespace {

using nlohmann::json;

// --set key=value overrides for policy parameters; values parse as JSON when
// possible, else as strings.
void apply_overrides(json& params, const std::vector<std::string>& sets) {
    for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw rlcache::SimError("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        json parsed = json::parse(value, nullptr, false);
        if (parsed.is_discarded()) parsed = value;
        params[key] = parsed;
    }
}

int cmd_run(const std::string& config_path, const std::string& policy,
            std::uint64_t capacity, std::int64_t seed, const std::string& trace_file,
            const std::string& preset, const std::string& out_dir,
            const std::vector<std::string>& sets) {
    rlcache::RunConfig cfg;
    if (!config_path.empty()) cfg = rlcache::load_run_config(config_path);
    if (!policy.empty()) cfg.policy_id = policy;
    if (capacity != 0) cfg.capacity = capacity;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!trace_file.empty()) cfg.trace = {.file = trace_file, .preset = {}, .spec = {}};
    if (!preset.empty()) cfg.trace = {.file = {}, .preset = preset, .spec = {}};
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    apply_overrides(cfg.policy_params, sets);

    const rlcache::RunResult result = rlcache::run_to_disk(cfg);
    std::cout << rlcache::report_to_json(cfg, result).dump(2) << '\n';
    std::cout << "artifacts written to " << cfg.output_dir << "/\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
    rlcache::SweepConfig cfg = rlcache::load_sweep_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    const rlcache::Trace trace = rlcache::load_trace(cfg.trace);
    const auto rows = rlcache::run_sweep(cfg, trace);
    std::filesystem::create_directories(cfg.output_dir);
    rlcache::write_table_csv(std::filesystem::path(cfg.output_dir) / "table.csv", rows);
    std::cout << rlcache::format_table(rows);
    std::cout << "table written to " << cfg.output_dir << "/table.csv\n";
    return 0;
}

int cmd_gen_trace(const std::string& preset, const std::string& out_path,
                  std::int64_t days, std::int64_t requests_per_day, std::int64_t files,
                  double skew, std::int64_t seed, std::int64_t size_median,
                  double size_sigma, std::int64_t drift_days) {
    rlcache::TraceSpec spec = rlcache::trace_preset(preset);
    if (days > 0) spec.num_days = static_cast<int>(days);
    if (requests_per_day > 0) spec.requests_per_day = static_cast<int>(requests_per_day);
    if (files > 0) spec.num_distinct_files = static_cast<int>(files);
    if (skew >= 0) spec.popularity_skew = skew;
    if (seed >= 0) spec.rng_seed = static_cast<std::uint64_t>(seed);
    if (size_median > 0) spec.size_median = static_cast<rlcache::Bytes>(size_median);
    if (size_sigma >= 0) spec.size_sigma = size_sigma;
    if (drift_days >= 0) spec.popularity_drift_days = static_cast<int>(drift_days);

    const rlcache::Trace trace = rlcache::generate_trace(spec);
    rlcache::write_trace_csv(trace, out_path);
    std::cout << "wrote " << trace.size() << " requests over " << trace.num_days()
              << " days (" << trace.num_files() << " distinct files) to " << out_path
              << '\n';
    std::cout << "mean requests per multi-request file: "
              << rlcache::mean_requests_per_multi_file(trace) << '\n';
    return 0;
}

int cmd_oracle(const std::string& trace_file, const std::string& preset,
               const std::string& json_out) {
    rlcache::TraceSource source;
    if (!trace_file.empty())
        source.file = trace_file;
    else if (!preset.empty())
        source.preset = preset;
    else
        throw rlcache::SimError("oracle: pass --trace or --preset");
    const rlcache::Trace trace = rlcache::load_trace(source);
    const rlcache::OracleBounds oracle = rlcache::infinite_cache_oracle(trace);
    json j;
    j["rhd_inf"] = oracle.rhd_inf;
    j["wd_inf"] = oracle.wd_inf;
    j["empty_trace"] = oracle.empty_trace;
    if (oracle.rhd_inf == 0)
        j["note"] = "no repeated files: throughput is undefined for this trace";
    std::cout << j.dump(2) << '\n';
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        out << j.dump(2) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven cache simulator with learning admission/eviction policies"};
    app.require_subcommand(1);

    // run
    std::string run_config, run_policy, run_trace, run_preset, run_out;
    std::uint64_t run_capacity = 0;
    std::int64_t run_seed = -1;
    std::vector<std::string> run_sets;
    auto* run = app.add_subcommand("run", "Simulate one policy and write its report");
    run->add_option("--config", run_config, "Run config JSON file");
    run->add_option("--policy", run_policy, "Policy id (see --help-policies)");
    run->add_option("--capacity", run_capacity, "Cache capacity in bytes");
    run->add_option("--seed", run_seed, "RNG seed");
    run->add_option("--trace", run_trace, "Trace CSV path");
    run->add_option("--preset", run_preset, "Generator preset name");
    run->add_option("--out", run_out, "Output directory");
    run->add_option("--set", run_sets, "Policy parameter override key=value (repeatable)");

    // sweep
    std::string sweep_config, sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Run policies x capacities, emit a table");
    sweep->add_option("--config", sweep_config, "Sweep config JSON file")->required();
    sweep->add_option("--out", sweep_out, "Output directory");

    // gen-trace
    std::string gen_preset = "paper-like", gen_out = "trace.csv";
    std::int64_t gen_days = -1, gen_rpd = -1, gen_files = -1, gen_seed = -1,
                 gen_median = -1, gen_drift = -1;
    double gen_skew = -1.0, gen_sigma = -1.0;
    auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace CSV");
    gen->add_option("--preset", gen_preset, "Preset name (paper-like, tiny)");
    gen->add_option("--out", gen_out, "Output CSV path");
    gen->add_option("--days", gen_days, "Number of days");
    gen->add_option("--requests-per-day", gen_rpd, "Requests per day");
    gen->add_option("--files", gen_files, "Distinct files");
    gen->add_option("--skew", gen_skew, "Zipf exponent");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--size-median", gen_median, "Median file size in bytes");
    gen->add_option("--size-sigma", gen_sigma, "Log-normal sigma");
    gen->add_option("--drift-days", gen_drift, "Popularity drift period (0 = off)");

    // oracle
    std::string oracle_trace, oracle_preset, oracle_json;
    auto* oracle = app.add_subcommand("oracle", "Infinite-cache bounds for a trace");
    oracle->add_option("--trace", oracle_trace, "Trace CSV path");
    oracle->add_option("--preset", oracle_preset, "Generator preset name");
    oracle->add_option("--json", oracle_json, "Also write the bounds to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(run_config, run_policy, run_capacity, run_seed, run_trace,
                           run_preset, run_out, run_sets);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out);
        if (gen->parsed())
            return cmd_gen_trace(gen_preset, gen_out, gen_days, gen_rpd, gen_files,
                                 gen_skew, gen_seed, gen_median, gen_sigma, gen_drift);
        if (oracle->parsed()) return cmd_oracle(oracle_trace, oracle_preset, oracle_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
