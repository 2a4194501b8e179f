#include "rlcache/scdl.hpp"

#include <algorithm>

namespace rlcache {

ScdlPolicy::ScdlPolicy(const Config& cfg)
    : cfg_(cfg), table_(2, 3), eps_(cfg.eps), rng_(cfg.rng_seed) {
    cfg_.bins.validate();
}

void ScdlPolicy::force_epsilon(std::optional<double> eps) { forced_eps_ = eps; }

bool ScdlPolicy::admit(const Trace::Row& req, const FileStats& st) {
    (void)req;
    const StateKey state = bin_addition_state(cfg_.bins, st, cache(), AdditionVariant::scdl);
    std::size_t action;
    if (forced_action_) {
        action = *forced_action_;
        eps_.advance();
    } else if (forced_eps_) {
        eps_.advance();
        if (rng_.uniform01() < *forced_eps_)
            action = static_cast<std::size_t>(rng_.uniform_below(2));
        else
            action = table_.greedy_action(state);
    } else {
        action = table_.select_action(state, eps_, rng_);
    }
    stash_ = {state, action};
    return action == kStore;
}

void ScdlPolicy::make_room(Bytes needed) {
    const Bytes target = std::min(cache().low_mark(), cache().capacity() - needed);
    cache().evict_down_to(target, order_for_eviction(cache(), EvictionKind::lru));
}

void ScdlPolicy::on_high_watermark() {
    cache().evict_to_low_watermark(order_for_eviction(cache(), EvictionKind::lru));
}

void ScdlPolicy::settle(StateKey state, const Pending& p) {
    bool good;
    if (p.action == kStore) {
        good = p.hits_since >= 1;
        if (cfg_.reward_strategy == RewardStrategy::hit_occupancy)
            good = good && !cache().above_high_mark();
    } else {
        good = p.hits_since + p.misses_since == 0;
    }
    const double reward = good ? static_cast<double>(p.size) : -static_cast<double>(p.size);
    if (record_rewards_) emitted_rewards_.push_back(reward);
    // Contextual bandit: the next state is the state itself.
    table_.update(state, p.action, reward, state, cfg_.alpha, cfg_.gamma);
}

void ScdlPolicy::forget(StateKey state, const Pending& p) {
    auto it = by_file_.find(p.file);
    if (it != by_file_.end()) {
        auto& keys = it->second;
        keys.erase(std::remove(keys.begin(), keys.end(), state), keys.end());
        if (keys.empty()) by_file_.erase(it);
    }
}

void ScdlPolicy::after_request(const Trace::Row& req, const FileStats& st,
                               RequestOutcome outcome, std::uint64_t request_index) {
    const Tick tick = request_index - 1;

    // Activity since decision, counted per tracked file.
    if (auto it = by_file_.find(req.file); it != by_file_.end()) {
        for (const StateKey s : it->second) {
            Pending& p = pending_.at(s);
            if (is_hit(outcome))
                ++p.hits_since;
            else
                ++p.misses_since;
        }
    }

    // A recurring state settles the decision memorized for it.
    const StateKey state = bin_addition_state(cfg_.bins, st, cache(), AdditionVariant::scdl);
    if (auto it = pending_.find(state);
        it != pending_.end() && it->second.decision_tick != tick) {
        settle(state, it->second);
        forget(state, it->second);
        pending_.erase(it);
    }

    if (stash_) {
        const auto [s, action] = *stash_;
        stash_.reset();
        Pending p;
        p.action = action;
        p.file = req.file;
        p.size = req.size;
        p.decision_tick = tick;
        auto [it, inserted] = pending_.try_emplace(s, p);
        if (!inserted)
            throw SimError("pending decision not settled before replacement");
        by_file_[req.file].push_back(s);
    }
}

void ScdlPolicy::dump_artifacts(const std::filesystem::path& dir) const {
    table_.dump_csv(dir / "addition_table.csv");
}

}  // namespace rlcache
