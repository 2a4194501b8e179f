#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "rlcache/policy.hpp"
#include "rlcache/simulator.hpp"
#include "rlcache/trace.hpp"

namespace rlcache {

// Where a run's requests come from.
struct TraceSource {
    // Exactly one of these is set.
    std::optional<std::string> file;
    std::optional<std::string> preset;
    std::optional<TraceSpec> spec;
};

struct RunConfig {
    TraceSource trace;
    std::string policy_id = "we-lru";
    nlohmann::json policy_params = nlohmann::json::object();
    Bytes capacity = 100 * GiB;
    double w_high = 0.95;
    double w_low = 0.75;
    std::optional<Bytes> daily_limit;
    std::uint64_t seed = 1;
    int hit_rate_window = 0;
    std::string output_dir = "out";
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const TraceSpec& spec);
TraceSpec trace_spec_from_json(const nlohmann::json& j);

// Loads or generates the configured trace.
Trace load_trace(const TraceSource& source);

// All selectable policy ids.
std::vector<std::string> known_policy_ids();

// Builds a policy from its id and JSON parameters. `data_types` is the
// trace's category set (used by the DQN state encoding). Unknown ids raise an
// error that lists the valid ones.
std::unique_ptr<Policy> make_policy(const std::string& id,
                                    const nlohmann::json& params, std::uint64_t seed,
                                    const std::vector<std::string>& data_types);

}  // namespace rlcache
