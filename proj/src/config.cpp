#include "rlcache/config.hpp"

#include <fstream>

#include "rlcache/baselines.hpp"
#include "rlcache/dqn.hpp"
#include "rlcache/scdl.hpp"
#include "rlcache/scdl2.hpp"

namespace rlcache {

using nlohmann::json;

json to_json(const TraceSpec& spec) {
    json j;
    j["num_days"] = spec.num_days;
    j["requests_per_day"] = spec.requests_per_day;
    j["num_distinct_files"] = spec.num_distinct_files;
    j["popularity_skew"] = spec.popularity_skew;
    j["size_median_bytes"] = spec.size_median;
    j["size_sigma"] = spec.size_sigma;
    json weights = json::array();
    for (const auto& [name, w] : spec.data_type_weights)
        weights.push_back({{"type", name}, {"weight", w}});
    j["data_type_weights"] = weights;
    j["rng_seed"] = spec.rng_seed;
    j["popularity_drift_days"] = spec.popularity_drift_days;
    j["num_users"] = spec.num_users;
    j["num_sites"] = spec.num_sites;
    return j;
}

TraceSpec trace_spec_from_json(const json& j) {
    TraceSpec spec;
    spec.num_days = j.value("num_days", spec.num_days);
    spec.requests_per_day = j.value("requests_per_day", spec.requests_per_day);
    spec.num_distinct_files = j.value("num_distinct_files", spec.num_distinct_files);
    spec.popularity_skew = j.value("popularity_skew", spec.popularity_skew);
    spec.size_median = j.value("size_median_bytes", spec.size_median);
    spec.size_sigma = j.value("size_sigma", spec.size_sigma);
    if (j.contains("data_type_weights")) {
        spec.data_type_weights.clear();
        for (const auto& entry : j.at("data_type_weights"))
            spec.data_type_weights.emplace_back(entry.at("type").get<std::string>(),
                                                entry.at("weight").get<double>());
    }
    spec.rng_seed = j.value("rng_seed", spec.rng_seed);
    spec.popularity_drift_days = j.value("popularity_drift_days", spec.popularity_drift_days);
    spec.num_users = j.value("num_users", spec.num_users);
    spec.num_sites = j.value("num_sites", spec.num_sites);
    return spec;
}

json to_json(const RunConfig& cfg) {
    json j;
    json trace;
    if (cfg.trace.file) trace["file"] = *cfg.trace.file;
    if (cfg.trace.preset) trace["preset"] = *cfg.trace.preset;
    if (cfg.trace.spec) trace["spec"] = to_json(*cfg.trace.spec);
    j["trace"] = trace;
    json policy = cfg.policy_params;
    policy["id"] = cfg.policy_id;
    j["policy"] = policy;
    j["capacity_bytes"] = cfg.capacity;
    j["w_high"] = cfg.w_high;
    j["w_low"] = cfg.w_low;
    if (cfg.daily_limit)
        j["daily_limit_bytes"] = *cfg.daily_limit;
    else
        j["daily_limit_bytes"] = nullptr;
    j["seed"] = cfg.seed;
    j["hit_rate_window"] = cfg.hit_rate_window;
    j["output_dir"] = cfg.output_dir;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    if (j.contains("trace")) {
        const auto& t = j.at("trace");
        if (t.contains("file")) cfg.trace.file = t.at("file").get<std::string>();
        if (t.contains("preset")) cfg.trace.preset = t.at("preset").get<std::string>();
        if (t.contains("spec")) cfg.trace.spec = trace_spec_from_json(t.at("spec"));
    }
    if (j.contains("policy")) {
        json policy = j.at("policy");
        if (!policy.contains("id")) throw SimError("config: policy.id is required");
        cfg.policy_id = policy.at("id").get<std::string>();
        policy.erase("id");
        cfg.policy_params = policy;
    }
    cfg.capacity = j.value("capacity_bytes", cfg.capacity);
    if (cfg.capacity == 0) throw SimError("config: capacity_bytes must be positive");
    cfg.w_high = j.value("w_high", cfg.w_high);
    cfg.w_low = j.value("w_low", cfg.w_low);
    if (j.contains("daily_limit_bytes") && !j.at("daily_limit_bytes").is_null())
        cfg.daily_limit = j.at("daily_limit_bytes").get<Bytes>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.hit_rate_window = j.value("hit_rate_window", cfg.hit_rate_window);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SimError("config parse error in " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

Trace load_trace(const TraceSource& source) {
    const int set = (source.file ? 1 : 0) + (source.preset ? 1 : 0) + (source.spec ? 1 : 0);
    if (set != 1)
        throw SimError("trace source must set exactly one of file/preset/spec");
    if (source.file) return read_trace_csv(*source.file);
    if (source.preset) return generate_trace(trace_preset(*source.preset));
    return generate_trace(*source.spec);
}

namespace {

BinningScheme binning_from_json(const json& p) {
    BinningScheme bins;
    if (p.contains("size_edges_bytes"))
        bins.size_edges = p.at("size_edges_bytes").get<std::vector<Bytes>>();
    if (p.contains("freq_edges"))
        bins.freq_edges = p.at("freq_edges").get<std::vector<std::uint32_t>>();
    if (p.contains("dt_edges_days")) bins.dt_edges = p.at("dt_edges_days").get<std::vector<Day>>();
    if (p.contains("occupancy_bins")) bins.occupancy_bins = p.at("occupancy_bins").get<int>();
    if (p.contains("hitrate_bins")) bins.hitrate_bins = p.at("hitrate_bins").get<int>();
    if (p.contains("cat_occupancy_edges"))
        bins.cat_occupancy_edges = p.at("cat_occupancy_edges").get<std::vector<double>>();
    return bins;
}

EpsilonSchedule::Params epsilon_from_json(const json& p, EpsilonSchedule::Params defaults) {
    defaults.eps_max = p.value("eps_max", defaults.eps_max);
    defaults.eps_min = p.value("eps_min", defaults.eps_min);
    defaults.lambda = p.value("eps_lambda", defaults.lambda);
    return defaults;
}

std::unique_ptr<Policy> make_scdl(const json& p, std::uint64_t seed) {
    ScdlPolicy::Config cfg;
    cfg.bins = binning_from_json(p);
    cfg.alpha = p.value("alpha", cfg.alpha);
    cfg.gamma = p.value("gamma", cfg.gamma);
    cfg.eps = epsilon_from_json(p, cfg.eps);
    const std::string strategy = p.value("reward_strategy", std::string("hit-occupancy"));
    if (strategy == "hit-occupancy")
        cfg.reward_strategy = ScdlPolicy::RewardStrategy::hit_occupancy;
    else if (strategy == "hit-only")
        cfg.reward_strategy = ScdlPolicy::RewardStrategy::hit_only;
    else
        throw SimError("unknown scdl reward_strategy: " + strategy);
    cfg.rng_seed = seed;
    return std::make_unique<ScdlPolicy>(cfg);
}

std::unique_ptr<Policy> make_scdl2(Scdl2Trigger trigger, const json& p, std::uint64_t seed) {
    Scdl2Policy::Config cfg;
    cfg.bins = binning_from_json(p);
    cfg.alpha = p.value("alpha", cfg.alpha);
    cfg.gamma = p.value("gamma", cfg.gamma);
    cfg.eps = epsilon_from_json(p, cfg.eps);
    cfg.trigger = trigger;
    cfg.k = p.value("k", cfg.k);
    cfg.rng_seed = seed;
    return std::make_unique<Scdl2Policy>(cfg);
}

std::unique_ptr<Policy> make_dqn(const json& p, std::uint64_t seed,
                                 const std::vector<std::string>& data_types) {
    DqnPolicy::Config cfg;
    if (p.contains("hidden")) cfg.hidden = p.at("hidden").get<std::vector<std::size_t>>();
    cfg.adam.learning_rate = p.value("learning_rate", cfg.adam.learning_rate);
    cfg.gamma = p.value("gamma", cfg.gamma);
    cfg.huber_delta = p.value("huber_delta", cfg.huber_delta);
    cfg.replay_capacity = p.value("replay_capacity", cfg.replay_capacity);
    cfg.batch_size = p.value("batch_size", cfg.batch_size);
    cfg.target_sync_every = p.value("target_sync_every", cfg.target_sync_every);
    cfg.addition_warmup_requests =
        p.value("addition_warmup_requests", cfg.addition_warmup_requests);
    cfg.eviction_warmup_passes = p.value("eviction_warmup_passes", cfg.eviction_warmup_passes);
    cfg.h_window_addition = p.value("h_window_addition", cfg.h_window_addition);
    cfg.h_window_eviction = p.value("h_window_eviction", cfg.h_window_eviction);
    cfg.scan_period = p.value("scan_period", cfg.scan_period);
    cfg.eviction_every_k = p.value("eviction_every_k", cfg.eviction_every_k);
    cfg.addition_train_every = p.value("addition_train_every", cfg.addition_train_every);
    cfg.eps = epsilon_from_json(p, cfg.eps);
    cfg.train_eviction_per_file = p.value("train_eviction_per_file", cfg.train_eviction_per_file);
    cfg.swap_train_order = p.value("swap_train_order", cfg.swap_train_order);
    cfg.load_addition_net = p.value("load_addition_net", cfg.load_addition_net);
    cfg.load_eviction_net = p.value("load_eviction_net", cfg.load_eviction_net);
    cfg.data_types = data_types;
    cfg.rng_seed = seed;
    return std::make_unique<DqnPolicy>(cfg);
}

}  // namespace

std::vector<std::string> known_policy_ids() {
    return {"we-lru",          "we-lfu",       "we-size-big",    "we-size-small",
            "scdl",            "scdl2-noeviction", "scdl2-onfree", "scdl2-ondayend",
            "scdl2-onk",       "dqn"};
}

std::unique_ptr<Policy> make_policy(const std::string& id, const json& params,
                                    std::uint64_t seed,
                                    const std::vector<std::string>& data_types) {
    if (id == "we-lru") return std::make_unique<WriteEverythingPolicy>(EvictionKind::lru);
    if (id == "we-lfu") return std::make_unique<WriteEverythingPolicy>(EvictionKind::lfu);
    if (id == "we-size-big")
        return std::make_unique<WriteEverythingPolicy>(EvictionKind::size_big);
    if (id == "we-size-small")
        return std::make_unique<WriteEverythingPolicy>(EvictionKind::size_small);
    if (id == "scdl") return make_scdl(params, seed);
    if (id == "scdl2-noeviction") return make_scdl2(Scdl2Trigger::no_eviction, params, seed);
    if (id == "scdl2-onfree") return make_scdl2(Scdl2Trigger::on_free, params, seed);
    if (id == "scdl2-ondayend") return make_scdl2(Scdl2Trigger::on_day_end, params, seed);
    if (id == "scdl2-onk") return make_scdl2(Scdl2Trigger::on_k, params, seed);
    if (id == "dqn") return make_dqn(params, seed, data_types);

    std::string valid;
    for (const auto& name : known_policy_ids()) {
        if (!valid.empty()) valid += ", ";
        valid += name;
    }
    throw SimError("unknown policy '" + id + "'; valid policies: " + valid);
}

}  // namespace rlcache
