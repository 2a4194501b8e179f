#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rlcache/dqn.hpp"
#include "rlcache/simulator.hpp"
#include "support/test_util.hpp"

using namespace rlcache;

namespace {

DqnPolicy::Config base_cfg() {
    DqnPolicy::Config cfg;
    cfg.hidden = {8, 8};
    cfg.data_types = {"data", "mc", "user"};
    cfg.rng_seed = 3;
    cfg.eviction_every_k = 1u << 30;  // effectively off unless a test lowers it
    cfg.addition_warmup_requests = 1u << 30;
    cfg.eviction_warmup_passes = 1u << 30;
    return cfg;
}

Trace::Row row(Day day, FileKey file, Bytes size, std::uint8_t dtype = 0) {
    return Trace::Row{day, file, size, dtype, 0, 0};
}

// Zeroes the online net and biases the given output unit so it always wins.
void rig_net(Network& net, std::size_t favored_action) {
    for (std::size_t i = 0; i < net.num_parameters(); ++i) net.set_parameter(i, 0.0);
    const std::size_t out_bias0 = net.num_parameters() - 2;
    net.set_parameter(out_bias0 + favored_action, 1.0);
}

}  // namespace

TEST_CASE("warm-up decisions are uniform random") {
    DqnPolicy policy(base_cfg());  // warm-up effectively never ends
    Simulator sim({.capacity = Bytes{1} << 40}, policy);
    int stored = 0;
    const int n = 2000;
    sim.set_admission_observer([&](const Trace::Row&, bool s) { stored += s ? 1 : 0; });
    for (int i = 0; i < n; ++i) sim.process(row(0, static_cast<FileKey>(i), 1 * MiB));
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(stored - n / 2) < 3 * sigma);
}

TEST_CASE("past warm-up with epsilon 0 the greedy network action rules") {
    auto cfg = base_cfg();
    cfg.addition_warmup_requests = 0;
    cfg.eps = {.eps_max = 0.0, .eps_min = 0.0, .lambda = 0.0};
    SUBCASE("net favoring Store stores") {
        DqnPolicy policy(cfg);
        rig_net(policy.addition_net(), DqnPolicy::kStore);
        Simulator sim({.capacity = Bytes{1} << 40}, policy);
        CHECK(sim.process(row(0, 0, 1 * MiB)) == RequestOutcome::miss_stored);
    }
    SUBCASE("net favoring NotStore proxies") {
        DqnPolicy policy(cfg);
        rig_net(policy.addition_net(), DqnPolicy::kNotStore);
        Simulator sim({.capacity = Bytes{1} << 40}, policy);
        CHECK(sim.process(row(0, 0, 1 * MiB)) == RequestOutcome::miss_proxied);
    }
}

TEST_CASE("reward windows settle at the first scan past h_window") {
    auto cfg = base_cfg();
    cfg.h_window_addition = 100;
    cfg.scan_period = 50;
    DqnPolicy policy(cfg);
    Simulator sim({.capacity = Bytes{1} << 40}, policy);
    // Every request is a fresh-file miss, so decision i lands at request i.
    for (int i = 1; i <= 1099; ++i) sim.process(row(0, static_cast<FileKey>(i), 1 * MiB));
    // Last scan was at 1050 settling decisions <= 950.
    CHECK(policy.addition_replay().size() == 950);
    CHECK(policy.addition_pending_count() == 1099 - 950);
    sim.process(row(0, 1100, 1 * MiB));  // scan at 1100 settles <= 1000
    CHECK(policy.addition_replay().size() == 1000);
}

TEST_CASE("window rewards follow the hit/miss counting formulas") {
    auto cfg = base_cfg();
    cfg.addition_warmup_requests = 0;
    cfg.eps = {.eps_max = 0.0, .eps_min = 0.0, .lambda = 0.0};
    cfg.h_window_addition = 6;
    cfg.scan_period = 1;
    DqnPolicy policy(cfg);
    rig_net(policy.addition_net(), DqnPolicy::kStore);
    policy.sync_targets();
    Simulator sim({.capacity = Bytes{1} << 40}, policy);

    sim.process(row(0, 0, 2 * GiB));                      // request 1: Store decision on A
    for (int i = 0; i < 3; ++i) sim.process(row(0, 0, 2 * GiB));  // 3 hits of A
    policy.force_addition_action(DqnPolicy::kNotStore);
    sim.process(row(0, 1, 2 * GiB));                      // request 5: NotStore on B
    for (FileKey f = 2; f < 10; ++f) sim.process(row(0, f, 1 * MiB));

    REQUIRE(policy.addition_replay().size() >= 2);
    const auto& items = policy.addition_replay().items();
    // Store with 3 hits inside the window of a 2 GiB file: +6 GiB.
    CHECK(items[0].action == DqnPolicy::kStore);
    CHECK(items[0].reward == doctest::Approx(6.0));
    // NotStore with zero misses of B afterwards: +2 GiB.
    CHECK(items[1].action == DqnPolicy::kNotStore);
    CHECK(items[1].reward == doctest::Approx(2.0));
}

TEST_CASE("keep with zero hits in the window is punished by -size") {
    auto cfg = base_cfg();
    cfg.eviction_every_k = 4;
    cfg.h_window_eviction = 5;
    cfg.scan_period = 1;
    cfg.addition_warmup_requests = 0;
    cfg.eps = {.eps_max = 0.0, .eps_min = 0.0, .lambda = 0.0};
    DqnPolicy policy(cfg);
    rig_net(policy.addition_net(), DqnPolicy::kStore);
    policy.force_eviction_action(DqnPolicy::kStore);  // Keep everything
    Simulator sim({.capacity = Bytes{1} << 40}, policy);
    sim.process(row(0, 0, 3 * GiB));  // stored
    for (FileKey f = 1; f < 12; ++f) sim.process(row(0, f, 1 * MiB));
    // The pass at request 4 kept file 0; file 0 got no hits in its window.
    bool found = false;
    for (const auto& e : policy.eviction_replay().items()) {
        if (e.action == DqnPolicy::kStore && e.reward == doctest::Approx(-3.0)) found = true;
    }
    CHECK(found);
}

TEST_CASE("eviction passes trigger every k requests") {
    auto cfg = base_cfg();
    cfg.eviction_every_k = 4;
    DqnPolicy policy(cfg);
    Simulator sim({.capacity = Bytes{1} << 40}, policy);
    for (int i = 1; i <= 12; ++i) {
        sim.process(row(0, static_cast<FileKey>(i), 1 * MiB));
        CHECK(policy.eviction_pass_count() == static_cast<std::uint64_t>(i / 4));
    }
}

TEST_CASE("a NotKeep-everything pass empties the cache in one sweep") {
    auto cfg = base_cfg();
    cfg.eviction_every_k = 10;
    cfg.addition_warmup_requests = 0;
    cfg.eps = {.eps_max = 0.0, .eps_min = 0.0, .lambda = 0.0};
    DqnPolicy policy(cfg);
    rig_net(policy.addition_net(), DqnPolicy::kStore);
    policy.force_eviction_action(DqnPolicy::kNotStore);  // NotKeep
    Simulator sim({.capacity = Bytes{1} << 40}, policy);
    for (FileKey f = 0; f < 9; ++f) sim.process(row(0, f, 1 * GiB));
    const Bytes occupancy_before = sim.cache().occupancy();
    REQUIRE(occupancy_before == 9 * GiB);
    sim.process(row(0, 9, 1 * GiB));  // request 10 triggers the pass
    CHECK(sim.cache().occupancy() == 0);
    CHECK(sim.cache().deleted() == 10 * GiB);
}

TEST_CASE("keep-everything at the high watermark engages the safety valve") {
    auto cfg = base_cfg();
    cfg.addition_warmup_requests = 0;
    cfg.eps = {.eps_max = 0.0, .eps_min = 0.0, .lambda = 0.0};
    DqnPolicy policy(cfg);
    rig_net(policy.addition_net(), DqnPolicy::kStore);
    policy.force_eviction_action(DqnPolicy::kStore);  // Keep
    Simulator sim({.capacity = 100 * MiB}, policy);
    for (FileKey f = 0; f < 24; ++f) sim.process(row(0, f, 4 * MiB));
    // 24*4 = 96 >= 95: pass keeps all, valve trims to W_high - 5%.
    CHECK(sim.cache().occupancy() <= 90 * MiB);
    CHECK(sim.cache().occupancy() > 0);
    CHECK(policy.eviction_pass_count() >= 1);
}

TEST_CASE("replay memory is FIFO-bounded at its capacity") {
    auto cfg = base_cfg();
    cfg.replay_capacity = 5;
    cfg.h_window_addition = 2;
    cfg.scan_period = 1;
    DqnPolicy policy(cfg);
    Simulator sim({.capacity = Bytes{1} << 40}, policy);
    for (FileKey f = 0; f < 40; ++f) sim.process(row(0, f, 1 * MiB));
    CHECK(policy.addition_replay().size() == 5);
    CHECK(policy.addition_replay().capacity() == 5);
}

TEST_CASE("every decision settles into exactly one experience by the final flush") {
    auto cfg = base_cfg();
    cfg.h_window_addition = 50;
    cfg.scan_period = 10;
    DqnPolicy policy(cfg);
    Simulator sim({.capacity = Bytes{1} << 33}, policy);
    std::size_t decisions = 0;
    sim.set_admission_observer([&](const Trace::Row&, bool) { ++decisions; });
    Rng rng(8);
    const Trace trace = test_util::random_small_trace(rng, 300, 20);
    // Scale tiny trace sizes into MiB so nothing exceeds capacity handling.
    Trace scaled;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const Request q = trace.request(i);
        scaled.add_request(q.day, std::string(q.file_id), q.size * MiB,
                           std::string(q.data_type), "u0", "s0");
    }
    sim.run(scaled);
    CHECK(policy.addition_pending_count() == 0);
    CHECK(policy.eviction_pending_count() == 0);
    CHECK(policy.addition_replay().size() == decisions);
}

TEST_CASE("stored experiences keep file features and bump only freq/oc/hr") {
    auto cfg = base_cfg();
    cfg.h_window_addition = 10;
    cfg.scan_period = 5;
    DqnPolicy policy(cfg);
    Simulator sim({.capacity = Bytes{1} << 34}, policy);
    Rng rng(12);
    for (int i = 0; i < 200; ++i)
        sim.process(row(0, static_cast<FileKey>(rng.uniform_below(40)),
                        (1 + rng.uniform_below(64)) * MiB,
                        static_cast<std::uint8_t>(rng.uniform_below(3))));
    policy.on_run_end();
    const auto& items = policy.addition_replay().items();
    REQUIRE(!items.empty());
    const std::size_t dim = items[0].state.size();
    for (const auto& e : items) {
        REQUIRE(e.next_state.size() == dim);
        CHECK(e.state[0] == e.next_state[0]);          // size component
        CHECK(e.next_state[1] >= e.state[1]);          // frequency bumped by one
        CHECK(e.state[2] == e.next_state[2]);          // delta-t unchanged
        for (std::size_t t = 3; t < dim - 2; ++t)      // one-hot data type
            CHECK(e.state[t] == e.next_state[t]);
    }
}

TEST_CASE("swapping the agent training order leaves outcomes unchanged") {
    auto run_with = [&](bool swapped) {
        auto cfg = base_cfg();
        cfg.addition_warmup_requests = 20;
        cfg.eviction_warmup_passes = 1;
        cfg.eviction_every_k = 25;
        cfg.h_window_addition = 30;
        cfg.h_window_eviction = 40;
        cfg.scan_period = 10;
        cfg.batch_size = 8;
        cfg.replay_capacity = 500;
        cfg.swap_train_order = swapped;
        DqnPolicy policy(cfg);
        Simulator sim({.capacity = 200 * MiB}, policy);
        std::vector<RequestOutcome> outcomes;
        sim.set_observer([&](const Trace::Row&, RequestOutcome o) { outcomes.push_back(o); });
        Rng rng(31);
        for (int i = 0; i < 600; ++i)
            sim.process(row(static_cast<Day>(i / 200),
                            static_cast<FileKey>(rng.uniform_below(60)),
                            (1 + (i % 16)) * MiB));
        return outcomes;
    };
    CHECK(run_with(false) == run_with(true));
}
