#include "rlcache/scdl2.hpp"

#include <algorithm>

namespace rlcache {

const char* to_string(Scdl2Trigger t) {
    switch (t) {
    case Scdl2Trigger::no_eviction: return "noeviction";
    case Scdl2Trigger::on_free: return "onfree";
    case Scdl2Trigger::on_day_end: return "ondayend";
    case Scdl2Trigger::on_k: return "onk";
    }
    return "?";
}

std::size_t eviction_victim_count(EvictionAction a, std::size_t n) {
    switch (a) {
    case EvictionAction::not_delete: return 0;
    case EvictionAction::delete_all: return n;
    case EvictionAction::delete_half: return (n + 1) / 2;
    case EvictionAction::delete_quarter: return (n + 3) / 4;
    case EvictionAction::delete_one: return n == 0 ? 0 : 1;
    }
    return 0;
}

Scdl2Policy::Scdl2Policy(const Config& cfg)
    : cfg_(cfg),
      addition_(2, 5),
      eviction_(kNumEvictionActions, 6),
      eps_add_(cfg.eps),
      eps_evict_(cfg.eps),
      rng_(cfg.rng_seed) {
    cfg_.bins.validate();
    if (cfg_.k == 0) throw SimError("scdl2: k must be positive");
}

void Scdl2Policy::before_request(const Trace::Row& req) {
    occupancy_at_request_start_ = cache().occupancy();
    current_day_ = req.day;
}

bool Scdl2Policy::admit(const Trace::Row& req, const FileStats& st) {
    (void)req;
    const StateKey state = bin_addition_state(cfg_.bins, st, cache(), AdditionVariant::scdl2);
    std::size_t action;
    if (forced_addition_) {
        action = *forced_addition_;
        eps_add_.advance();
    } else {
        action = addition_.select_action(state, eps_add_, rng_);
    }
    stash_ = {state, action};
    return action == kStore;
}

void Scdl2Policy::make_room(Bytes needed) {
    const Bytes target = std::min(cache().low_mark(), cache().capacity() - needed);
    if (cfg_.trigger == Scdl2Trigger::no_eviction) {
        cache().evict_down_to(target, order_for_eviction(cache(), EvictionKind::lru));
        return;
    }
    space_pressure_eviction(target);
}

void Scdl2Policy::on_high_watermark() {
    if (cfg_.trigger == Scdl2Trigger::no_eviction) {
        cache().evict_to_low_watermark(order_for_eviction(cache(), EvictionKind::lru));
        return;
    }
    space_pressure_eviction(cache().low_mark());
}

std::vector<CategorySnapshot> categorize_cached_files(const Cache& cache,
                                                      FileStatsStore& stats,
                                                      const BinningScheme& bins,
                                                      Day today) {
    std::unordered_map<StateKey, CategorySnapshot> by_key;
    FileStats fs;
    for (const auto& [file, entry] : cache.stored()) {
        if (!stats.observe(file, today, fs))
            throw SimError("cached file missing from the statistics store");
        const StateKey key = pack_state({bins.size_bin(entry.size),
                                         bins.freq_bin(fs.window_count),
                                         bins.dt_bin(fs.delta_days)});
        CategorySnapshot& c = by_key[key];
        c.feature_key = key;
        c.bytes += entry.size;
        c.members.push_back(file);
    }
    std::vector<CategorySnapshot> cats;
    cats.reserve(by_key.size());
    for (auto& [key, c] : by_key) {
        std::sort(c.members.begin(), c.members.end());
        cats.push_back(std::move(c));
    }
    // Largest occupancy first; key order on ties.
    std::sort(cats.begin(), cats.end(), [](const CategorySnapshot& a, const CategorySnapshot& b) {
        if (a.bytes != b.bytes) return a.bytes > b.bytes;
        return a.feature_key < b.feature_key;
    });
    return cats;
}

std::vector<CategorySnapshot> Scdl2Policy::build_categories(Day today) {
    auto cats = categorize_cached_files(cache(), stats(), cfg_.bins, today);
    category_bytes_snapshot_.clear();
    for (const CategorySnapshot& c : cats) category_bytes_snapshot_[c.feature_key] = c.bytes;
    return cats;
}

Bytes Scdl2Policy::eviction_pass(Day today, std::optional<Bytes> space_target) {
    ++eviction_invocations_;
    const std::vector<CategorySnapshot> cats = build_categories(today);
    Bytes freed = 0;
    const Tick tick = cache().requests() == 0 ? 0 : cache().requests() - 1;

    for (const CategorySnapshot& cat : cats) {
        if (space_target && cache().occupancy() <= *space_target) break;

        std::vector<std::uint8_t> parts = unpack_state(cat.feature_key, 3);
        parts.push_back(cfg_.bins.cat_occupancy_bin(
            static_cast<double>(cat.bytes) / static_cast<double>(cache().capacity())));
        parts.push_back(cfg_.bins.occupancy_bin(cache().occupancy_fraction()));
        parts.push_back(cfg_.bins.hitrate_bin(cache().hit_rate()));
        const StateKey state = pack_state(parts);

        std::size_t action_idx;
        if (forced_eviction_) {
            action_idx = static_cast<std::size_t>(*forced_eviction_);
            eps_evict_.advance();
        } else {
            action_idx = eviction_.select_action(state, eps_evict_, rng_);
        }
        const auto action = static_cast<EvictionAction>(action_idx);

        if (action == EvictionAction::not_delete) {
            for (const FileKey f : cat.members) memorize_eviction(f, state, action_idx, tick);
            continue;
        }

        std::vector<FileKey> victims = cat.members;
        const std::size_t count = eviction_victim_count(action, victims.size());
        if (count < victims.size()) {
            rng_.shuffle(victims);
            victims.resize(count);
        }
        for (const FileKey f : victims) {
            freed += cache().evict(f);
            memorize_eviction(f, state, action_idx, tick);
        }
    }
    return freed;
}

void Scdl2Policy::memorize_eviction(FileKey file, StateKey state, std::size_t action,
                                    Tick tick) {
    auto& entries = evict_pending_[file];
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const auto& e) { return e.first == state; });
    if (it == entries.end())
        entries.emplace_back(state, EvictPending{action, tick});
    else
        it->second = EvictPending{action, tick};
}

void Scdl2Policy::space_pressure_eviction(Bytes target) {
    while (cache().occupancy() > target) {
        const Bytes freed = eviction_pass(current_day_, target);
        if (cache().occupancy() <= target) return;
        if (freed == 0) {
            // A full pass declined to delete anything: force one deletion from
            // the largest category so the watermark contract still terminates.
            const std::vector<CategorySnapshot> cats = build_categories(current_day_);
            if (cats.empty()) throw SimError("space pressure with an empty cache");
            const CategorySnapshot& largest = cats.front();
            std::vector<std::uint8_t> parts = unpack_state(largest.feature_key, 3);
            parts.push_back(cfg_.bins.cat_occupancy_bin(
                static_cast<double>(largest.bytes) / static_cast<double>(cache().capacity())));
            parts.push_back(cfg_.bins.occupancy_bin(cache().occupancy_fraction()));
            parts.push_back(cfg_.bins.hitrate_bin(cache().hit_rate()));
            const StateKey state = pack_state(parts);
            const FileKey victim =
                largest.members[static_cast<std::size_t>(rng_.uniform_below(largest.members.size()))];
            cache().evict(victim);
            const Tick tick = cache().requests() == 0 ? 0 : cache().requests() - 1;
            memorize_eviction(victim, state, static_cast<std::size_t>(EvictionAction::delete_one),
                              tick);
        }
    }
}

StateKey Scdl2Policy::eviction_state_now(const FileStats& st) {
    std::vector<std::uint8_t> parts = {cfg_.bins.size_bin(st.size),
                                       cfg_.bins.freq_bin(st.window_count),
                                       cfg_.bins.dt_bin(st.delta_days)};
    const StateKey feature_key = pack_state(parts);
    Bytes cat_bytes = 0;
    if (auto it = category_bytes_snapshot_.find(feature_key);
        it != category_bytes_snapshot_.end())
        cat_bytes = it->second;
    parts.push_back(cfg_.bins.cat_occupancy_bin(
        static_cast<double>(cat_bytes) / static_cast<double>(cache().capacity())));
    parts.push_back(cfg_.bins.occupancy_bin(cache().occupancy_fraction()));
    parts.push_back(cfg_.bins.hitrate_bin(cache().hit_rate()));
    return pack_state(parts);
}

void Scdl2Policy::apply_reward(QTable& table, StateKey s, std::size_t action, double r,
                               StateKey s_next) {
    if (record_rewards_) emitted_rewards_.push_back(r);
    table.update(s, action, r, s_next, cfg_.alpha, cfg_.gamma);
}

void Scdl2Policy::settle_addition(FileKey file, const FileStats& st,
                                  RequestOutcome outcome, bool prev_was_hit, Tick tick) {
    auto it = add_pending_.find(file);
    if (it == add_pending_.end()) return;
    const AddPending p = it->second;
    if (p.decision_tick == tick) return;  // memorized by this very request
    add_pending_.erase(it);

    const StateKey s_now = bin_addition_state(cfg_.bins, st, cache(), AdditionVariant::scdl2);
    if (p.action == kStore && is_hit(outcome)) {
        double r = 1.0;
        if (!prev_was_hit) r += 1.0;  // passed from a miss to a hit
        apply_reward(addition_, p.state, p.action, r, s_now);
    } else if (p.action == kNotStore && !is_hit(outcome)) {
        double r = -1.0;
        if (prev_was_hit) r -= 1.0;  // passed from a hit to a miss
        apply_reward(addition_, p.state, p.action, r, s_now);
    }
    // Other combinations carry no reward.
}

void Scdl2Policy::settle_evictions(FileKey file, const FileStats& st,
                                   RequestOutcome outcome, bool prev_was_hit,
                                   bool occupancy_increased, Tick tick) {
    auto it = evict_pending_.find(file);
    if (it == evict_pending_.end()) return;
    auto entries = std::move(it->second);
    evict_pending_.erase(it);

    // Decisions taken while processing this very request wait for the next one.
    std::vector<std::pair<StateKey, EvictPending>> kept;
    const StateKey s_now = eviction_state_now(st);
    for (const auto& [state, p] : entries) {
        if (p.decision_tick == tick) {
            kept.emplace_back(state, p);
            continue;
        }
        const auto action = static_cast<EvictionAction>(p.action);
        if (action == EvictionAction::not_delete && is_hit(outcome)) {
            double r = 1.0;
            if (!occupancy_increased) r += 1.0;
            apply_reward(eviction_, state, p.action, r, s_now);
        } else if (action != EvictionAction::not_delete && !is_hit(outcome)) {
            double r = -1.0;
            if (prev_was_hit) r -= 1.0;
            apply_reward(eviction_, state, p.action, r, s_now);
        }
    }
    if (!kept.empty()) evict_pending_[file] = std::move(kept);
}

void Scdl2Policy::after_request(const Trace::Row& req, const FileStats& st,
                                RequestOutcome outcome, std::uint64_t request_index) {
    const Tick tick = request_index - 1;

    // Eviction trigger (on_k); on_free runs through the watermark hooks and
    // on_day_end through the day boundary hook.
    if (cfg_.trigger == Scdl2Trigger::on_k && request_index % cfg_.k == 0)
        eviction_pass(req.day, std::nullopt);

    // Delayed rewards.
    const bool prev_hit = [&] {
        auto it = prev_was_hit_.find(req.file);
        return it != prev_was_hit_.end() && it->second;
    }();
    const bool occupancy_increased = cache().occupancy() > occupancy_at_request_start_;
    settle_addition(req.file, st, outcome, prev_hit, tick);
    settle_evictions(req.file, st, outcome, prev_hit, occupancy_increased, tick);

    if (stash_) {
        const auto [state, action] = *stash_;
        stash_.reset();
        add_pending_[req.file] = AddPending{state, action, tick};
    }
    prev_was_hit_[req.file] = is_hit(outcome);
}

void Scdl2Policy::on_day_boundary(Day completed_day) {
    if (cfg_.trigger == Scdl2Trigger::on_day_end) eviction_pass(completed_day, std::nullopt);
}

void Scdl2Policy::dump_artifacts(const std::filesystem::path& dir) const {
    addition_.dump_csv(dir / "addition_table.csv");
    eviction_.dump_csv(dir / "eviction_table.csv");
}

}  // namespace rlcache
