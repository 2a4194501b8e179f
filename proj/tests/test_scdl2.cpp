#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "rlcache/baselines.hpp"
#include "rlcache/scdl2.hpp"
#include "rlcache/simulator.hpp"
#include "support/test_util.hpp"

using namespace rlcache;

namespace {

Scdl2Policy::Config cfg_for(Scdl2Trigger trigger, std::uint64_t k = 8192) {
    Scdl2Policy::Config cfg;
    cfg.trigger = trigger;
    cfg.k = k;
    cfg.rng_seed = 9;
    return cfg;
}

Trace::Row row(Day day, FileKey file, Bytes size) {
    return Trace::Row{day, file, size, 0, 0, 0};
}

}  // namespace

TEST_CASE("delete-half and delete-quarter use ceilings for every member count") {
    for (std::size_t n = 1; n <= 100; ++n) {
        CHECK(eviction_victim_count(EvictionAction::delete_half, n) == (n + 1) / 2);
        CHECK(eviction_victim_count(EvictionAction::delete_quarter, n) == (n + 3) / 4);
        CHECK(eviction_victim_count(EvictionAction::delete_one, n) == 1);
        CHECK(eviction_victim_count(EvictionAction::delete_all, n) == n);
        CHECK(eviction_victim_count(EvictionAction::not_delete, n) == 0);
    }
}

TEST_CASE("on_day_end runs the eviction agent exactly once per day boundary") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::on_day_end));
    Simulator sim({.capacity = 1000000}, policy);
    FileKey f = 0;
    for (Day d = 0; d < 3; ++d)
        for (int i = 0; i < 5; ++i) sim.process(row(d, f++, 10));
    CHECK(policy.eviction_agent_invocations() == 2);  // boundaries 0->1 and 1->2
}

TEST_CASE("on_k runs the eviction agent every K requests") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::on_k, 4));
    Simulator sim({.capacity = 1000000}, policy);
    FileKey f = 0;
    for (int i = 0; i < 11; ++i) sim.process(row(0, f++, 10));
    CHECK(policy.eviction_agent_invocations() == 2);  // requests 4 and 8
    sim.process(row(0, f++, 10));
    CHECK(policy.eviction_agent_invocations() == 3);  // request 12
}

TEST_CASE("on_free runs the eviction agent only at the high watermark") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::on_free));
    policy.force_addition_action(Scdl2Policy::kStore);
    policy.force_eviction_action(EvictionAction::delete_all);
    Simulator sim({.capacity = 100}, policy);
    for (FileKey f = 0; f < 11; ++f) {
        sim.process(row(0, f, 8));
        if (sim.cache().occupancy() < 95) CHECK(policy.eviction_agent_invocations() == 0);
    }
    // 12th insertion reaches 96 >= 95: the agent must have run and drained.
    sim.process(row(0, 11, 8));
    CHECK(policy.eviction_agent_invocations() >= 1);
    CHECK(sim.cache().occupancy() <= 75);
}

TEST_CASE("delete-half on a four-file category evicts exactly two") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::on_day_end));
    policy.force_addition_action(Scdl2Policy::kStore);
    policy.force_eviction_action(EvictionAction::delete_half);
    Simulator sim({.capacity = 1000}, policy);
    for (FileKey f = 0; f < 4; ++f) sim.process(row(0, f, 10));
    REQUIRE(sim.cache().num_stored() == 4);
    const Bytes freed = policy.eviction_pass(0, std::nullopt);
    CHECK(freed == 20);
    CHECK(sim.cache().num_stored() == 2);
}

TEST_CASE("an all-NotDelete pass under space pressure falls back to forced deletion") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::on_free));
    policy.force_addition_action(Scdl2Policy::kStore);
    policy.force_eviction_action(EvictionAction::not_delete);
    Simulator sim({.capacity = 100}, policy);
    for (FileKey f = 0; f < 12; ++f) sim.process(row(0, f, 8));
    // The forced fallback must still honor the low-watermark contract.
    CHECK(sim.cache().occupancy() <= 75);
    CHECK(sim.cache().deleted() > 0);
}

TEST_CASE("an eviction pass over an empty cache is a no-op") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::on_day_end));
    Simulator sim({.capacity = 100}, policy);
    CHECK(policy.eviction_pass(0, std::nullopt) == 0);
}

TEST_CASE("store-then-hit settles at +2 when the file passed miss to hit") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::no_eviction));
    policy.force_addition_action(Scdl2Policy::kStore);
    policy.record_rewards(true);
    Simulator sim({.capacity = 1000}, policy);
    sim.process(row(0, 0, 10));  // miss, stored; pending
    CHECK(policy.emitted_rewards().empty());
    CHECK(sim.process(row(0, 0, 10)) == RequestOutcome::hit);
    REQUIRE(policy.emitted_rewards().size() == 1);
    CHECK(policy.emitted_rewards()[0] == 2.0);
}

TEST_CASE("delete-all followed by a miss of the deleted file settles at -2") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::on_day_end));
    policy.force_addition_action(Scdl2Policy::kStore);
    policy.force_eviction_action(EvictionAction::delete_all);
    policy.record_rewards(true);
    Simulator sim({.capacity = 1000}, policy);
    sim.process(row(0, 0, 10));  // stored
    sim.process(row(0, 0, 10));  // hit: prev outcome becomes hit; +2 settles the Store
    policy.eviction_pass(0, std::nullopt);  // deletes file 0, memorizes DeleteAll
    REQUIRE(sim.cache().num_stored() == 0);
    policy.force_addition_action(Scdl2Policy::kNotStore);
    sim.process(row(0, 0, 10));  // miss of the deleted file, hit -> miss transition
    REQUIRE(policy.emitted_rewards().size() >= 2);
    CHECK(policy.emitted_rewards().back() == -2.0);
}

TEST_CASE("a NotStore with no later request never settles") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::no_eviction));
    policy.force_addition_action(Scdl2Policy::kNotStore);
    policy.record_rewards(true);
    Simulator sim({.capacity = 1000}, policy);
    Trace t = test_util::make_trace({{0, "A", 10}, {0, "B", 10}, {1, "C", 10}});
    sim.run(t);
    CHECK(policy.emitted_rewards().empty());
}

TEST_CASE("categories form an exact partition of the cached set") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::no_eviction));
    Simulator sim({.capacity = 100000}, policy);
    Rng rng(15);
    FileKey f = 0;
    std::vector<std::pair<FileKey, Bytes>> live;
    for (Day d = 0; d < 4; ++d) {
        for (int i = 0; i < 100; ++i) {
            const Bytes size = 1 + rng.uniform_below(200);
            sim.process(row(d, f, size));
            ++f;
        }
        const auto cats = categorize_cached_files(sim.cache(), sim.stats(),
                                                  BinningScheme{}, d);
        Bytes total = 0;
        std::set<FileKey> seen;
        for (const auto& c : cats) {
            Bytes cat_bytes = 0;
            for (const FileKey m : c.members) {
                CHECK(seen.insert(m).second);  // disjoint
                REQUIRE(sim.cache().contains(m));
                cat_bytes += sim.cache().find(m)->size;
            }
            CHECK(cat_bytes == c.bytes);
            total += c.bytes;
        }
        CHECK(total == sim.cache().occupancy());
        CHECK(seen.size() == sim.cache().num_stored());
    }
}

TEST_CASE("all emitted rewards are in {-2,-1,+1,+2}") {
    Scdl2Policy policy(cfg_for(Scdl2Trigger::on_k, 16));
    policy.record_rewards(true);
    Simulator sim({.capacity = 60}, policy);
    Rng rng(19);
    const Trace trace = test_util::random_small_trace(rng, 500, 20);
    sim.run(trace);
    CHECK(!policy.emitted_rewards().empty());
    for (const double r : policy.emitted_rewards()) {
        const bool valid = r == -2.0 || r == -1.0 || r == 1.0 || r == 2.0;
        CHECK(valid);
    }
}

TEST_CASE("forced Store with no_eviction equals write-everything+LRU") {
    Rng rng(23);
    for (int round = 0; round < 10; ++round) {
        const Trace trace = test_util::random_small_trace(rng);
        const Bytes capacity = 10 + rng.uniform_below(40);

        Scdl2Policy scdl2(cfg_for(Scdl2Trigger::no_eviction));
        scdl2.force_addition_action(Scdl2Policy::kStore);
        Simulator a({.capacity = capacity}, scdl2);
        std::vector<RequestOutcome> oa;
        a.set_observer([&](const Trace::Row&, RequestOutcome o) { oa.push_back(o); });
        a.run(trace);

        WriteEverythingPolicy we(EvictionKind::lru);
        Simulator b({.capacity = capacity}, we);
        std::vector<RequestOutcome> ob;
        b.set_observer([&](const Trace::Row&, RequestOutcome o) { ob.push_back(o); });
        b.run(trace);

        CHECK(oa == ob);
    }
}
