#pragma once

#include <unordered_map>

#include "rlcache/policy.hpp"
#include "rlcache/qlearn.hpp"

namespace rlcache {

// Admission-only contextual bandit: a tabular agent decides Store/NotStore on
// misses, eviction is plain LRU under the watermarks, and each decision is
// rewarded with +-size when its state recurs.
class ScdlPolicy : public Policy {
public:
    static constexpr std::size_t kStore = 0;
    static constexpr std::size_t kNotStore = 1;

    // "good decision" rule for the +-size reward.
    enum class RewardStrategy {
        hit_occupancy,  // Store good iff hit since and occupancy below W_high
        hit_only,       // Store good iff hit since
    };

    struct Config {
        BinningScheme bins;
        double alpha = 0.5;
        double gamma = 0.5;
        EpsilonSchedule::Params eps{1.0, 0.1, 1e-4};
        RewardStrategy reward_strategy = RewardStrategy::hit_occupancy;
        std::uint64_t rng_seed = 1;
    };

    explicit ScdlPolicy(const Config& cfg);

    std::string name() const override { return "scdl"; }

    bool admit(const Trace::Row& req, const FileStats& st) override;
    void make_room(Bytes needed) override;
    void on_high_watermark() override;
    void after_request(const Trace::Row& req, const FileStats& st,
                       RequestOutcome outcome, std::uint64_t request_index) override;
    void dump_artifacts(const std::filesystem::path& dir) const override;

    QTable& addition_table() { return table_; }
    const EpsilonSchedule& schedule() const { return eps_; }
    std::size_t pending_count() const { return pending_.size(); }

    // Test hooks: force a fixed action or a fixed epsilon.
    void force_action(std::optional<std::size_t> action) { forced_action_ = action; }
    void force_epsilon(std::optional<double> eps);

    // Reward recording for property checks; off by default.
    void record_rewards(bool on) { record_rewards_ = on; }
    const std::vector<double>& emitted_rewards() const { return emitted_rewards_; }

private:
    struct Pending {
        std::size_t action;
        FileKey file;
        Bytes size;
        Tick decision_tick;
        std::uint32_t hits_since = 0;
        std::uint32_t misses_since = 0;
    };

    void settle(StateKey state, const Pending& p);
    void forget(StateKey state, const Pending& p);

    Config cfg_;
    QTable table_;
    EpsilonSchedule eps_;
    Rng rng_;
    std::unordered_map<StateKey, Pending> pending_;
    std::unordered_map<FileKey, std::vector<StateKey>> by_file_;
    std::optional<std::size_t> forced_action_;
    std::optional<double> forced_eps_;
    std::optional<std::pair<StateKey, std::size_t>> stash_;  // decision made this request
    bool record_rewards_ = false;
    std::vector<double> emitted_rewards_;
};

}  // namespace rlcache
