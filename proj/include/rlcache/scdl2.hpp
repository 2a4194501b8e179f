#pragma once

#include <unordered_map>

#include "rlcache/policy.hpp"
#include "rlcache/qlearn.hpp"

namespace rlcache {

// When the category eviction agent runs.
enum class Scdl2Trigger {
    no_eviction,  // plain LRU watermark, no eviction agent
    on_free,      // only when the high watermark is reached
    on_day_end,   // once per day boundary (plus watermark space pressure)
    on_k,         // every K requests (plus watermark space pressure)
};

const char* to_string(Scdl2Trigger t);

enum class EvictionAction : std::size_t {
    not_delete = 0,
    delete_all = 1,
    delete_half = 2,
    delete_quarter = 3,
    delete_one = 4,
};

// How many members an action removes from a category of n files.
std::size_t eviction_victim_count(EvictionAction a, std::size_t n);

// A category of cached files sharing (size, frequency, delta-t) bins.
struct CategorySnapshot {
    StateKey feature_key = 0;  // packed 3-component bin tuple
    Bytes bytes = 0;
    std::vector<FileKey> members;  // sorted by file key
};

// Exact partition of the cached set into categories, largest occupancy first
// (key order on ties).
std::vector<CategorySnapshot> categorize_cached_files(const Cache& cache,
                                                      FileStatsStore& stats,
                                                      const BinningScheme& bins, Day today);

// Two tabular agents: admission over an occupancy/hit-rate enriched state and
// category-wise eviction with five actions; +-1 delayed rewards with a +-1
// bonus.
class Scdl2Policy : public Policy {
public:
    // NotStore takes index 0: Store rewards are never negative under the +-1
    // rules, so an unseen (all-zero) state must resolve toward refusal or the
    // agent degenerates to write-everything.
    static constexpr std::size_t kNotStore = 0;
    static constexpr std::size_t kStore = 1;
    static constexpr std::size_t kNumEvictionActions = 5;

    struct Config {
        BinningScheme bins;
        double alpha = 0.5;
        double gamma = 0.5;
        EpsilonSchedule::Params eps{1.0, 0.1, 1e-4};
        Scdl2Trigger trigger = Scdl2Trigger::on_free;
        std::uint64_t k = 8192;  // on_k period, in requests
        std::uint64_t rng_seed = 1;
    };

    explicit Scdl2Policy(const Config& cfg);

    std::string name() const override {
        return std::string("scdl2-") + to_string(cfg_.trigger);
    }

    void before_request(const Trace::Row& req) override;
    bool admit(const Trace::Row& req, const FileStats& st) override;
    void make_room(Bytes needed) override;
    void on_high_watermark() override;
    void after_request(const Trace::Row& req, const FileStats& st,
                       RequestOutcome outcome, std::uint64_t request_index) override;
    void on_day_boundary(Day completed_day) override;
    void dump_artifacts(const std::filesystem::path& dir) const override;

    QTable& addition_table() { return addition_; }
    QTable& eviction_table() { return eviction_; }

    // Test hooks.
    void force_addition_action(std::optional<std::size_t> a) { forced_addition_ = a; }
    void force_eviction_action(std::optional<EvictionAction> a) { forced_eviction_ = a; }
    void record_rewards(bool on) { record_rewards_ = on; }
    const std::vector<double>& emitted_rewards() const { return emitted_rewards_; }
    std::uint64_t eviction_agent_invocations() const { return eviction_invocations_; }

    // One full agent pass over the current categories; exposed for tests.
    // Returns bytes freed. `space_target`: stop once occupancy <= target.
    Bytes eviction_pass(Day today, std::optional<Bytes> space_target);

private:
    struct AddPending {
        StateKey state;
        std::size_t action;
        Tick decision_tick;
    };
    struct EvictPending {
        std::size_t action;
        Tick decision_tick;
    };

    std::vector<CategorySnapshot> build_categories(Day today);
    void space_pressure_eviction(Bytes target);
    void memorize_eviction(FileKey file, StateKey state, std::size_t action, Tick tick);
    void settle_addition(FileKey file, const FileStats& st, RequestOutcome outcome,
                         bool prev_was_hit, Tick tick);
    void settle_evictions(FileKey file, const FileStats& st, RequestOutcome outcome,
                          bool prev_was_hit, bool occupancy_increased, Tick tick);
    StateKey eviction_state_now(const FileStats& st);
    void apply_reward(QTable& table, StateKey s, std::size_t action, double r,
                      StateKey s_next);

    Config cfg_;
    QTable addition_;
    QTable eviction_;
    EpsilonSchedule eps_add_;
    EpsilonSchedule eps_evict_;
    Rng rng_;

    std::unordered_map<FileKey, AddPending> add_pending_;
    // Per file: (eviction state, pending) pairs, most one per state.
    std::unordered_map<FileKey, std::vector<std::pair<StateKey, EvictPending>>> evict_pending_;
    std::unordered_map<FileKey, bool> prev_was_hit_;
    // Category bytes as of the most recent agent pass, for s' reconstruction.
    std::unordered_map<StateKey, Bytes> category_bytes_snapshot_;

    std::optional<std::size_t> forced_addition_;
    std::optional<EvictionAction> forced_eviction_;
    std::optional<std::pair<StateKey, std::size_t>> stash_;
    Bytes occupancy_at_request_start_ = 0;
    Day current_day_ = 0;
    std::uint64_t eviction_invocations_ = 0;
    bool record_rewards_ = false;
    std::vector<double> emitted_rewards_;
};

}  // namespace rlcache
