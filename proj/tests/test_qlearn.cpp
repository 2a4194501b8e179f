#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rlcache/qlearn.hpp"
#include "support/test_util.hpp"

using namespace rlcache;

TEST_CASE("binning maps the documented default-edge examples") {
    BinningScheme bins;
    // 1.5 GiB falls past the 100 MiB / 500 MiB / 1 GiB edges.
    CHECK(bins.size_bin(Bytes{3} * GiB / 2) == 3);
    CHECK(bins.freq_bin(1) == 0);
    CHECK(bins.dt_bin(FileStats::kNeverSeen) == 7);
    // Beyond the top edge clamps into the top bin.
    CHECK(bins.size_bin(10 * TiB) == 5);
    CHECK(bins.freq_bin(1000000) == 5);
    CHECK(bins.dt_bin(365) == 6);
    // Edge values start the next bin.
    CHECK(bins.freq_bin(2) == 1);
    CHECK(bins.dt_bin(0) == 0);
    CHECK(bins.dt_bin(1) == 1);
    // Fraction deciles.
    CHECK(bins.occupancy_bin(0.0) == 0);
    CHECK(bins.occupancy_bin(0.55) == 5);
    CHECK(bins.occupancy_bin(1.0) == 9);
    CHECK(bins.cat_occupancy_bin(0.03) == 1);
}

TEST_CASE("identical features map to identical states") {
    BinningScheme bins;
    Cache cache(100, 0.95, 0.75);
    FileStats a{.size = 3 * GiB / 2, .window_count = 1, .delta_days = FileStats::kNeverSeen};
    FileStats b = a;
    CHECK(bin_addition_state(bins, a, cache, AdditionVariant::scdl) ==
          bin_addition_state(bins, b, cache, AdditionVariant::scdl));
    const auto packed = unpack_state(
        bin_addition_state(bins, a, cache, AdditionVariant::scdl), 3);
    CHECK(packed == std::vector<std::uint8_t>{3, 0, 7});
    // The enriched variant appends occupancy and hit-rate deciles.
    const auto enriched = unpack_state(
        bin_addition_state(bins, a, cache, AdditionVariant::scdl2), 5);
    CHECK(enriched[0] == 3);
    CHECK(enriched[3] == 0);
    CHECK(enriched[4] == 0);
}

TEST_CASE("greedy selection, tie-break, and epsilon=1 uniformity") {
    QTable table(2, 3);
    EpsilonSchedule greedy({.eps_max = 0.0, .eps_min = 0.0, .lambda = 0.0});
    Rng rng(5);

    table.update(1, 0, 0.2, 1, 1.0, 0.0);  // Q(1) = [0.2, 0]
    table.update(1, 1, 0.7, 1, 1.0, 0.0);  // Q(1) = [0.2, 0.7]
    CHECK(table.select_action(1, greedy, rng) == 1);

    // Exact tie goes to the lowest action index.
    QTable tied(2, 3);
    tied.update(2, 0, 0.5, 2, 1.0, 0.0);
    tied.update(2, 1, 0.5, 2, 1.0, 0.0);
    CHECK(tied.greedy_action(2) == 0);

    // With eps = 1, empirical frequencies are uniform within 3 sigma.
    EpsilonSchedule explore({.eps_max = 1.0, .eps_min = 1.0, .lambda = 0.0});
    int action0 = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        if (table.select_action(1, explore, rng) == 0) ++action0;
    const double sigma = std::sqrt(draws * 0.25);
    CHECK(std::abs(action0 - draws / 2) < 3 * sigma);
}

TEST_CASE("the Q update matches the cited rule exactly") {
    SUBCASE("plug-in example") {
        QTable t(2, 1);
        const double q = t.update(0, 0, /*r=*/1.0, /*s'=*/1, /*alpha=*/0.1, /*gamma=*/0.95);
        CHECK(q == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("fixed point: r=0, maxQ(s')=Q(s,a), gamma=1") {
        QTable t(2, 1);
        t.update(0, 0, 1.0, 0, 1.0, 0.0);  // Q(0,0) = 1, Q(0,1) = 0
        t.update(0, 1, 1.0, 0, 1.0, 0.0);  // Q(0,1) = 1
        const double q = t.update(0, 0, 0.0, 0, 0.5, 1.0);
        CHECK(q == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("20 random tuples against the formula, 1e-12") {
        Rng rng(17);
        for (int i = 0; i < 20; ++i) {
            QTable t(3, 1);
            const double q0 = rng.uniform(-5, 5);
            const double n0 = rng.uniform(-5, 5);
            const double n1 = rng.uniform(-5, 5);
            const double n2 = rng.uniform(-5, 5);
            // Prime the table: Q(s=0, a=0) = q0, Q(s'=1) = {n0, n1, n2}.
            t.update(0, 0, q0, 2, 1.0, 0.0);
            t.update(1, 0, n0, 2, 1.0, 0.0);
            t.update(1, 1, n1, 2, 1.0, 0.0);
            t.update(1, 2, n2, 2, 1.0, 0.0);
            const double alpha = 0.01 + 0.99 * rng.uniform01();
            const double gamma = rng.uniform01();
            const double r = rng.uniform(-10, 10);
            const double expected =
                q0 + alpha * (r + gamma * std::max({n0, n1, n2}) - q0);
            const double got = t.update(0, 0, r, 1, alpha, gamma);
            CHECK(got == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("parameter and reward validation") {
        QTable t(2, 1);
        CHECK_THROWS_AS(t.update(0, 0, std::nan(""), 0, 0.5, 0.5), SimError);
        CHECK_THROWS_AS(t.update(0, 0, 1.0, 0, 0.0, 0.5), SimError);
        CHECK_THROWS_AS(t.update(0, 0, 1.0, 0, 0.5, 1.5), SimError);
    }
}

TEST_CASE("bandit updates with gamma 0 converge geometrically to r") {
    QTable t(2, 1);
    const double r = 3.25;
    double q = 0.0;
    for (int i = 0; i < 60; ++i) q = t.update(0, 0, r, 0, 0.5, 0.0);
    CHECK(std::abs(q - r) < 1e-6);
}

TEST_CASE("argmax is invariant under positive scaling") {
    Rng rng(23);
    for (int round = 0; round < 50; ++round) {
        QTable a(4, 1), b(4, 1);
        const double scale = 0.001 + 100.0 * rng.uniform01();
        for (std::size_t act = 0; act < 4; ++act) {
            const double v = rng.uniform(-10, 10);
            a.update(0, act, v, 7, 1.0, 0.0);
            b.update(0, act, v * scale, 7, 1.0, 0.0);
        }
        CHECK(a.greedy_action(0) == b.greedy_action(0));
    }
}

TEST_CASE("a 2-state 2-action toy bandit learns the optimal policy") {
    // Optimal: action 1 in state 0 (+1), action 0 in state 1 (+1); the
    // alternative pays -1. Epsilon anneals to zero.
    QTable t(2, 1);
    EpsilonSchedule eps({.eps_max = 1.0, .eps_min = 0.0, .lambda = 0.01});
    Rng rng(31);
    for (int step = 0; step < 1000; ++step) {
        const StateKey s = step % 2;
        const std::size_t a = t.select_action(s, eps, rng);
        const bool optimal = (s == 0 && a == 1) || (s == 1 && a == 0);
        t.update(s, a, optimal ? 1.0 : -1.0, s, 0.5, 0.0);
    }
    CHECK(t.greedy_action(0) == 1);
    CHECK(t.greedy_action(1) == 0);
}

TEST_CASE("epsilon schedule decays monotonically within bounds") {
    EpsilonSchedule eps({.eps_max = 1.0, .eps_min = 0.1, .lambda = 1e-3});
    double prev = eps.value();
    CHECK(prev == doctest::Approx(1.0));
    for (int i = 0; i < 5000; ++i) {
        eps.advance();
        const double v = eps.value();
        CHECK(v <= prev + 1e-15);
        CHECK(v >= 0.1 - 1e-15);
        prev = v;
    }
    CHECK(prev == doctest::Approx(0.1 + 0.9 * std::exp(-5.0)).epsilon(1e-9));
}

TEST_CASE("q-table CSV dump round-trips losslessly") {
    QTable t(2, 3);
    Rng rng(41);
    for (int i = 0; i < 30; ++i) {
        const StateKey s = pack_state({static_cast<std::uint8_t>(rng.uniform_below(6)),
                                       static_cast<std::uint8_t>(rng.uniform_below(6)),
                                       static_cast<std::uint8_t>(rng.uniform_below(8))});
        t.update(s, rng.uniform_below(2), rng.uniform(-1e9, 1e9), s, 0.7, 0.3);
    }
    test_util::TempDir dir("qtable");
    const auto path = dir.path() / "table.csv";
    t.dump_csv(path);
    QTable back = QTable::load_csv(path);
    REQUIRE(back.num_actions() == t.num_actions());
    REQUIRE(back.state_arity() == t.state_arity());
    REQUIRE(back.num_states() == t.num_states());
    const auto first = test_util::slurp(path);
    back.dump_csv(path);
    CHECK(test_util::slurp(path) == first);
}
