#include "rlcache/dqn.hpp"

#include <algorithm>
#include <cmath>

namespace rlcache {

namespace {

constexpr double kGib = 1024.0 * 1024.0 * 1024.0;

std::size_t argmax2(const std::vector<double>& q) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[best]) best = a;
    return best;
}

}  // namespace

DqnPolicy::Agent::Agent(const Config& cfg, std::size_t input_dim, std::uint64_t seed,
                        std::uint64_t h_win, const std::string& checkpoint)
    : online([&] {
          std::vector<std::size_t> sizes;
          sizes.push_back(input_dim);
          for (const std::size_t h : cfg.hidden) sizes.push_back(h);
          sizes.push_back(2);
          return checkpoint.empty() ? Network(sizes, seed) : Network::load(checkpoint);
      }()),
      target(online.sizes(), seed),
      trainer(online, cfg.adam, cfg.huber_delta),
      eps(cfg.eps),
      rng(seed ^ 0xd1b54a32d192ed03ull),
      replay(cfg.replay_capacity),
      h_window(h_win) {
    copy_parameters(online, target);
}

DqnPolicy::DqnPolicy(const Config& cfg) : cfg_(cfg) {
    if (cfg_.batch_size == 0) throw SimError("dqn: batch_size must be positive");
    if (cfg_.scan_period == 0) throw SimError("dqn: scan_period must be positive");
    if (cfg_.h_window_addition == 0 || cfg_.h_window_eviction == 0)
        throw SimError("dqn: h_window must be positive");
    if (cfg_.addition_train_every == 0) cfg_.addition_train_every = 1;
    input_dim_ = 5 + cfg_.data_types.size();
    addition_ = std::make_unique<Agent>(cfg_, input_dim_, cfg_.rng_seed * 2 + 1,
                                        cfg_.h_window_addition, cfg_.load_addition_net);
    eviction_ = std::make_unique<Agent>(cfg_, input_dim_, cfg_.rng_seed * 2 + 2,
                                        cfg_.h_window_eviction, cfg_.load_eviction_net);
}

void DqnPolicy::bind(Cache& cache, FileStatsStore& stats) {
    Policy::bind(cache, stats);
    if (cfg_.eviction_every_k != 0) {
        k_ = cfg_.eviction_every_k;
    } else {
        // Scale the pass period with capacity: 50000 at 100 TiB.
        const double scaled = 50000.0 * static_cast<double>(cache.capacity()) /
                              static_cast<double>(100 * TiB);
        k_ = static_cast<std::uint64_t>(
            std::clamp(std::llround(scaled), 1000ll, 500000ll));
    }
    if (k_ == 0) throw SimError("dqn: eviction_every_k must be positive");
}

std::vector<double> DqnPolicy::encode_state(Bytes size, std::uint32_t freq, Day delta_days,
                                            std::uint8_t type_key, double oc,
                                            double hr) const {
    std::vector<double> v;
    v.reserve(input_dim_);
    v.push_back(std::clamp(std::log10(static_cast<double>(size)) / 12.0, 0.0, 1.0));
    v.push_back(std::clamp(std::log2(1.0 + static_cast<double>(freq)) / 10.0, 0.0, 1.0));
    // A file never seen before maps to the stalest value.
    const double dt = delta_days < 0 ? 1.0 : std::min(1.0, static_cast<double>(delta_days) / 7.0);
    v.push_back(dt);
    for (std::size_t t = 0; t < cfg_.data_types.size(); ++t)
        v.push_back(t == type_key ? 1.0 : 0.0);
    v.push_back(oc);
    v.push_back(hr);
    return v;
}

std::size_t DqnPolicy::decide(Agent& a, const std::vector<double>& state, bool warmup,
                              std::optional<std::size_t> forced) {
    const double eps = a.eps.value();
    a.eps.advance();
    if (forced) return *forced;
    if (warmup || a.rng.uniform01() < eps)
        return static_cast<std::size_t>(a.rng.uniform_below(2));
    return argmax2(a.online.forward(state));
}

bool DqnPolicy::admit(const Trace::Row& req, const FileStats& st) {
    (void)req;
    const auto state = encode_state(st.size, st.window_count, st.delta_days, st.type_key,
                                    cache().occupancy_fraction(), cache().hit_rate());
    const bool warmup = seen_requests_ < cfg_.addition_warmup_requests;
    const std::size_t action = decide(*addition_, state, warmup, forced_addition_);
    stash_ = {state, action};
    return action == kStore;
}

void DqnPolicy::memorize(Agent& a, Pending p) {
    a.pending.push_back(std::move(p));
    a.by_file[a.pending.back().file].push_back(&a.pending.back());
}

void DqnPolicy::train(Agent& a) {
    if (a.replay.size() < cfg_.batch_size) return;
    std::vector<TrainSample> batch;
    batch.reserve(cfg_.batch_size);
    for (std::size_t i = 0; i < cfg_.batch_size; ++i) {
        const Experience& e = a.replay.sample(a.rng);
        const auto next_q = a.target.forward(e.next_state);
        TrainSample s;
        s.input = e.state;
        s.target = e.reward + cfg_.gamma * *std::max_element(next_q.begin(), next_q.end());
        s.action = e.action;
        batch.push_back(std::move(s));
    }
    a.trainer.train_batch(a.online, batch);
    if (a.trainer.steps() % cfg_.target_sync_every == 0) copy_parameters(a.online, a.target);
}

void DqnPolicy::note_outcome(Agent& a, FileKey file, bool hit, std::uint64_t now) {
    auto it = a.by_file.find(file);
    if (it == a.by_file.end()) return;
    for (Pending* p : it->second) {
        // A decision taken while this request was processed observes only
        // later requests.
        if (p->decision_index >= now) continue;
        if (hit)
            ++p->hits;
        else
            ++p->misses;
    }
}

void DqnPolicy::settle_front(Agent& a) {
    Pending& p = a.pending.front();
    double reward_bytes;
    if (p.action == kStore) {  // Store / Keep
        reward_bytes = p.hits > 0
                           ? static_cast<double>(p.hits) * static_cast<double>(p.size)
                           : -static_cast<double>(p.size);
    } else {  // NotStore / NotKeep
        reward_bytes = p.misses > 0
                           ? -static_cast<double>(p.misses) * static_cast<double>(p.size)
                           : static_cast<double>(p.size);
    }

    Experience e;
    e.state = std::move(p.state);
    e.action = p.action;
    e.reward = reward_bytes / kGib;
    // S' keeps the file features but bumps the frequency and refreshes the
    // cache occupancy and hit rate.
    e.next_state = encode_state(p.size, p.freq + 1, p.delta_days, p.type_key,
                                cache().occupancy_fraction(), cache().hit_rate());

    auto it = a.by_file.find(p.file);
    if (it != a.by_file.end()) {
        auto& vec = it->second;
        vec.erase(std::remove(vec.begin(), vec.end(), &p), vec.end());
        if (vec.empty()) a.by_file.erase(it);
    }
    a.pending.pop_front();
    a.replay.push(std::move(e));
}

void DqnPolicy::settle_elapsed(Agent& a, std::uint64_t now, bool flush_all) {
    while (!a.pending.empty() &&
           (flush_all || now - a.pending.front().decision_index >= a.h_window))
        settle_front(a);
}

void DqnPolicy::run_eviction_pass() {
    ++eviction_passes_;
    const bool warmup = eviction_passes_ <= cfg_.eviction_warmup_passes;

    // Cached files in insertion order.
    std::vector<std::pair<Tick, FileKey>> files;
    files.reserve(cache().num_stored());
    for (const auto& [file, entry] : cache().stored())
        files.emplace_back(entry.insertion_tick, file);
    std::sort(files.begin(), files.end());

    FileStats fs;
    for (const auto& [insertion, file] : files) {
        const CacheEntry* entry = cache().find(file);
        if (!stats().observe(file, current_day_, fs))
            throw SimError("cached file missing from the statistics store");
        const auto state =
            encode_state(entry->size, fs.window_count, fs.delta_days, fs.type_key,
                         cache().occupancy_fraction(), cache().hit_rate());
        const std::size_t action = decide(*eviction_, state, warmup, forced_eviction_);
        if (action == kNotStore) cache().evict(file);

        Pending p;
        p.file = file;
        p.size = fs.size;
        p.freq = fs.window_count;
        p.delta_days = fs.delta_days;
        p.type_key = fs.type_key;
        p.state = state;
        p.action = action;
        p.decision_index = seen_requests_;
        memorize(*eviction_, std::move(p));

        if (cfg_.train_eviction_per_file && !warmup) train(*eviction_);
    }
    if (!cfg_.train_eviction_per_file && !warmup) train(*eviction_);
}

void DqnPolicy::make_room(Bytes needed) {
    run_eviction_pass();
    const Bytes valve = static_cast<Bytes>(
        std::floor((cache().w_high() - 0.05) * static_cast<double>(cache().capacity())));
    const Bytes target = std::min(valve, cache().capacity() - needed);
    if (cache().occupancy() > target)
        cache().evict_down_to(target, order_for_eviction(cache(), EvictionKind::lru));
}

void DqnPolicy::on_high_watermark() {
    run_eviction_pass();
    if (cache().above_high_mark()) {
        // Safety valve: the learned policy kept everything while full.
        const Bytes valve = static_cast<Bytes>(
            std::floor((cache().w_high() - 0.05) * static_cast<double>(cache().capacity())));
        cache().evict_down_to(valve, order_for_eviction(cache(), EvictionKind::lru));
    }
}

void DqnPolicy::before_request(const Trace::Row& req) {
    ++seen_requests_;
    current_day_ = req.day;
}

void DqnPolicy::after_request(const Trace::Row& req, const FileStats& st,
                              RequestOutcome outcome, std::uint64_t request_index) {
    const bool hit = is_hit(outcome);
    note_outcome(*addition_, req.file, hit, request_index);
    note_outcome(*eviction_, req.file, hit, request_index);

    auto addition_step = [&] {
        if (!stash_) return;
        auto [state, action] = std::move(*stash_);
        stash_.reset();
        Pending p;
        p.file = req.file;
        p.size = req.size;
        p.freq = st.window_count;
        p.delta_days = st.delta_days;
        p.type_key = req.dtype;
        p.state = std::move(state);
        p.action = action;
        p.decision_index = request_index;
        memorize(*addition_, std::move(p));
        if (seen_requests_ > cfg_.addition_warmup_requests &&
            request_index % cfg_.addition_train_every == 0)
            train(*addition_);
    };
    auto eviction_step = [&] {
        if (request_index % k_ == 0) run_eviction_pass();
    };

    if (cfg_.swap_train_order) {
        eviction_step();
        addition_step();
    } else {
        addition_step();
        eviction_step();
    }

    if (request_index % cfg_.scan_period == 0) {
        settle_elapsed(*addition_, request_index, false);
        settle_elapsed(*eviction_, request_index, false);
    }
}

void DqnPolicy::on_run_end() {
    settle_elapsed(*addition_, seen_requests_, true);
    settle_elapsed(*eviction_, seen_requests_, true);
}

void DqnPolicy::sync_targets() {
    copy_parameters(addition_->online, addition_->target);
    copy_parameters(eviction_->online, eviction_->target);
}

void DqnPolicy::dump_artifacts(const std::filesystem::path& dir) const {
    addition_->online.save(dir / "addition_net.json");
    eviction_->online.save(dir / "eviction_net.json");
}

}  // namespace rlcache
