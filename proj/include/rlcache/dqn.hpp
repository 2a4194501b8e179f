#pragma once

#include <deque>
#include <memory>
#include <unordered_map>

#include "rlcache/neuralnet.hpp"
#include "rlcache/policy.hpp"
#include "rlcache/qlearn.hpp"

namespace rlcache {

// (S, A, R, S') tuple held in replay memory. Rewards are in GiB.
struct Experience {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
};

// Fixed-capacity FIFO replay memory.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }

    void push(Experience e) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(e));
        } else {
            items_[next_] = std::move(e);
            next_ = (next_ + 1) % capacity_;
        }
    }

    const Experience& sample(Rng& rng) const {
        return items_[static_cast<std::size_t>(rng.uniform_below(items_.size()))];
    }

    const std::vector<Experience>& items() const { return items_; }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Experience> items_;
};

// Two deep-Q agents over a shared cache: addition (Store/NotStore per missed
// request) and eviction (Keep/NotKeep per cached file), each with replay
// memory, a target network and a windowed delayed reward.
class DqnPolicy : public Policy {
public:
    static constexpr std::size_t kStore = 0;     // also Keep for the eviction agent
    static constexpr std::size_t kNotStore = 1;  // also NotKeep

    struct Config {
        std::vector<std::size_t> hidden = {32, 32};
        AdamParams adam{};                        // 0.001 learning rate
        double gamma = 0.95;
        double huber_delta = 1.0;
        std::size_t replay_capacity = 100000;
        std::size_t batch_size = 32;
        std::uint64_t target_sync_every = 1000;   // training steps
        std::uint64_t addition_warmup_requests = 5000;
        std::uint64_t eviction_warmup_passes = 50;
        std::uint64_t h_window_addition = 100000;  // requests
        std::uint64_t h_window_eviction = 200000;
        std::uint64_t scan_period = 1000;          // N, requests
        std::uint64_t eviction_every_k = 0;        // 0 = scale from capacity
        std::uint64_t addition_train_every = 1;    // train on every n-th decision miss
        EpsilonSchedule::Params eps{1.0, 0.1, 1e-5};
        bool train_eviction_per_file = false;      // one batch per file vs per pass
        bool swap_train_order = false;             // exercise agent separability
        std::vector<std::string> data_types;       // one-hot category set
        std::uint64_t rng_seed = 1;
        std::string load_addition_net;             // optional checkpoint paths
        std::string load_eviction_net;
    };

    explicit DqnPolicy(const Config& cfg);

    std::string name() const override { return "dqn"; }

    void bind(Cache& cache, FileStatsStore& stats) override;
    void before_request(const Trace::Row& req) override;
    bool admit(const Trace::Row& req, const FileStats& st) override;
    void make_room(Bytes needed) override;
    void on_high_watermark() override;
    void after_request(const Trace::Row& req, const FileStats& st,
                       RequestOutcome outcome, std::uint64_t request_index) override;
    void on_run_end() override;
    void dump_artifacts(const std::filesystem::path& dir) const override;

    // Encoded network input for a file/cache snapshot.
    std::vector<double> encode_state(Bytes size, std::uint32_t freq, Day delta_days,
                                     std::uint8_t type_key, double oc, double hr) const;

    std::uint64_t eviction_pass_count() const { return eviction_passes_; }
    std::uint64_t eviction_every_k() const { return k_; }
    const ReplayBuffer& addition_replay() const { return addition_->replay; }
    const ReplayBuffer& eviction_replay() const { return eviction_->replay; }
    std::size_t addition_pending_count() const { return addition_->pending.size(); }
    std::size_t eviction_pending_count() const { return eviction_->pending.size(); }
    const Network& addition_net() const { return addition_->online; }
    Network& addition_net() { return addition_->online; }
    Network& eviction_net() { return eviction_->online; }
    void sync_targets();  // copy online -> target for both agents

    // Test hooks.
    void force_addition_action(std::optional<std::size_t> a) { forced_addition_ = a; }
    void force_eviction_action(std::optional<std::size_t> a) { forced_eviction_ = a; }

private:
    struct Pending {
        FileKey file;
        Bytes size;
        std::uint32_t freq;
        Day delta_days;
        std::uint8_t type_key;
        std::vector<double> state;
        std::size_t action;
        std::uint64_t decision_index;
        std::uint32_t hits = 0;
        std::uint32_t misses = 0;
    };

    struct Agent {
        Agent(const Config& cfg, std::size_t input_dim, std::uint64_t seed,
              std::uint64_t h_window, const std::string& checkpoint);

        Network online;
        Network target;
        Trainer trainer;
        EpsilonSchedule eps;
        Rng rng;
        ReplayBuffer replay;
        std::uint64_t h_window;
        std::deque<Pending> pending;  // FIFO by decision index
        std::unordered_map<FileKey, std::vector<Pending*>> by_file;
    };

    std::size_t decide(Agent& a, const std::vector<double>& state, bool warmup,
                       std::optional<std::size_t> forced);
    void train(Agent& a);
    void note_outcome(Agent& a, FileKey file, bool hit, std::uint64_t now);
    void settle_elapsed(Agent& a, std::uint64_t now, bool flush_all);
    void settle_front(Agent& a);
    void run_eviction_pass();
    void memorize(Agent& a, Pending p);

    Config cfg_;
    std::size_t input_dim_;
    std::uint64_t k_ = 0;
    std::unique_ptr<Agent> addition_;
    std::unique_ptr<Agent> eviction_;
    std::uint64_t seen_requests_ = 0;
    std::uint64_t eviction_passes_ = 0;
    Day current_day_ = 0;
    std::optional<std::pair<std::vector<double>, std::size_t>> stash_;  // state, action
    std::optional<std::size_t> forced_addition_;
    std::optional<std::size_t> forced_eviction_;
};

}  // namespace rlcache
