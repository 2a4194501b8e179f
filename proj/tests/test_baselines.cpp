#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "rlcache/baselines.hpp"
#include "rlcache/simulator.hpp"
#include "support/test_util.hpp"

using namespace rlcache;

TEST_CASE("eviction orderings follow their definitions") {
    Cache cache(1000, 0.95, 0.75);
    cache.admit(0, 10, /*tick=*/0);  // A
    cache.admit(1, 99, 1);           // B
    cache.serve_hit(0, 5);           // A last access 5, count 2

    SUBCASE("lru ascends by last access") {
        const auto order = order_for_eviction(cache, EvictionKind::lru);
        CHECK(order == std::vector<FileKey>{1, 0});
    }
    SUBCASE("lfu ascends by access count") {
        const auto order = order_for_eviction(cache, EvictionKind::lfu);
        CHECK(order == std::vector<FileKey>{1, 0});
    }
    SUBCASE("size-big descends by size") {
        const auto order = order_for_eviction(cache, EvictionKind::size_big);
        CHECK(order == std::vector<FileKey>{1, 0});
    }
    SUBCASE("size-small ascends by size") {
        const auto order = order_for_eviction(cache, EvictionKind::size_small);
        CHECK(order == std::vector<FileKey>{0, 1});
    }
}

TEST_CASE("ties break toward the lower insertion tick") {
    Cache cache(1000, 0.95, 0.75);
    cache.admit(5, 10, 3);
    cache.admit(2, 10, 1);
    cache.admit(9, 10, 2);
    const auto order = order_for_eviction(cache, EvictionKind::size_small);
    CHECK(order == std::vector<FileKey>{2, 9, 5});
}

TEST_CASE("orderings are permutations of the cached set") {
    Rng rng(3);
    Cache cache(100000, 0.95, 0.75);
    for (FileKey f = 0; f < 200; ++f) {
        cache.admit(f, 1 + rng.uniform_below(50), f);
        if (rng.uniform01() < 0.4) cache.serve_hit(f, 200 + f);
    }
    std::set<FileKey> expected;
    for (const auto& [f, e] : cache.stored()) expected.insert(f);
    for (const EvictionKind kind : {EvictionKind::lru, EvictionKind::lfu,
                                    EvictionKind::size_big, EvictionKind::size_small}) {
        const auto order = order_for_eviction(cache, kind);
        CHECK(order.size() == expected.size());
        CHECK(std::set<FileKey>(order.begin(), order.end()) == expected);
    }
}

TEST_CASE("write-everything+LRU matches the independent reference LRU") {
    Rng rng(11);
    int mismatches = 0;
    for (int round = 0; round < 40; ++round) {
        const Trace trace = test_util::random_small_trace(rng);
        const Bytes capacity = 10 + rng.uniform_below(40);

        WriteEverythingPolicy policy(EvictionKind::lru);
        Simulator sim({.capacity = capacity}, policy);
        std::vector<bool> sim_hits;
        sim.set_observer([&](const Trace::Row&, RequestOutcome o) {
            sim_hits.push_back(is_hit(o));
        });
        sim.run(trace);

        test_util::ReferenceLru ref(capacity);
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const Request q = trace.request(i);
            const bool hit = ref.access(std::string(q.file_id), q.size);
            if (hit != sim_hits[i]) ++mismatches;
        }
        CHECK(ref.occupancy() == sim.cache().occupancy());
    }
    CHECK(mismatches == 0);
}

TEST_CASE("one-shot floods are all stored under write-everything") {
    WriteEverythingPolicy policy(EvictionKind::lru);
    Simulator sim({.capacity = 1000}, policy);
    Trace t;
    for (int i = 0; i < 50; ++i)
        t.add_request(0, "f" + std::to_string(i), 10, "data", "u0", "s0");
    sim.run(t);
    CHECK(sim.cache().written() == 500);
    CHECK(sim.cache().hits() == 0);
}
