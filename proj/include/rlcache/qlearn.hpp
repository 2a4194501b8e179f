#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "rlcache/cache.hpp"
#include "rlcache/file_stats.hpp"
#include "rlcache/rng.hpp"
#include "rlcache/types.hpp"

namespace rlcache {

// A discretized state: component bins packed one byte each, low byte first.
// Tables of a fixed arity never collide across different tuples.
using StateKey = std::uint64_t;

inline StateKey pack_state(const std::vector<std::uint8_t>& bins) {
    StateKey key = 0;
    for (std::size_t i = 0; i < bins.size(); ++i)
        key |= static_cast<StateKey>(bins[i]) << (8 * i);
    return key;
}

inline std::vector<std::uint8_t> unpack_state(StateKey key, std::size_t arity) {
    std::vector<std::uint8_t> bins(arity);
    for (std::size_t i = 0; i < arity; ++i)
        bins[i] = static_cast<std::uint8_t>((key >> (8 * i)) & 0xff);
    return bins;
}

// Thresholds that map continuous file/cache features to bin indices. A value
// lands in bin = number of edges <= value; everything past the last edge
// clamps into the top bin.
struct BinningScheme {
    std::vector<Bytes> size_edges = {100 * MiB, 500 * MiB, 1 * GiB, 2 * GiB, 4 * GiB};
    std::vector<std::uint32_t> freq_edges = {2, 3, 4, 8, 16};
    std::vector<Day> dt_edges = {1, 2, 3, 4, 5, 6};
    int occupancy_bins = 10;
    int hitrate_bins = 10;
    std::vector<double> cat_occupancy_edges = {0.01, 0.05, 0.10, 0.25};

    void validate() const;

    template <typename T, typename E>
    static std::uint8_t bin_of(T value, const std::vector<E>& edges) {
        std::uint8_t b = 0;
        for (const E& e : edges) {
            if (value >= static_cast<T>(e))
                ++b;
            else
                break;
        }
        return b;
    }

    std::uint8_t size_bin(Bytes s) const { return bin_of(s, size_edges); }
    std::uint8_t freq_bin(std::uint32_t n) const { return bin_of(n, freq_edges); }

    // delta < 0 means the file was never requested before; it gets the
    // distinguished bin past the regular range.
    std::uint8_t dt_bin(Day delta) const {
        if (delta < 0) return static_cast<std::uint8_t>(dt_edges.size() + 1);
        return bin_of(delta, dt_edges);
    }

    std::uint8_t fraction_bin(double v, int bins) const {
        if (v < 0.0) v = 0.0;
        int b = static_cast<int>(v * bins);
        if (b >= bins) b = bins - 1;
        return static_cast<std::uint8_t>(b);
    }

    std::uint8_t occupancy_bin(double oc) const { return fraction_bin(oc, occupancy_bins); }
    std::uint8_t hitrate_bin(double hr) const { return fraction_bin(hr, hitrate_bins); }
    std::uint8_t cat_occupancy_bin(double frac) const {
        return bin_of(frac, cat_occupancy_edges);
    }
};

enum class AdditionVariant { scdl, scdl2 };

// Addition-agent state: (size, frequency, delta-t) bins, and for the enriched
// variant also occupancy and hit-rate deciles.
StateKey bin_addition_state(const BinningScheme& bins, const FileStats& st,
                            const Cache& cache, AdditionVariant variant);

// Exploration schedule: eps(t) = eps_min + (eps_max - eps_min) * exp(-lambda t).
class EpsilonSchedule {
public:
    struct Params {
        double eps_max = 1.0;
        double eps_min = 0.1;
        double lambda = 1e-4;
    };

    EpsilonSchedule() = default;
    explicit EpsilonSchedule(Params p) : params_(p) {}

    double value() const {
        return params_.eps_min +
               (params_.eps_max - params_.eps_min) *
                   std::exp(-params_.lambda * static_cast<double>(decisions_));
    }

    void advance() { ++decisions_; }
    std::uint64_t decisions_taken() const { return decisions_; }
    const Params& params() const { return params_; }

private:
    Params params_;
    std::uint64_t decisions_ = 0;
};

// Tabular state -> action-value map. Unseen states materialize as all zeros.
class QTable {
public:
    QTable(std::size_t num_actions, std::size_t state_arity)
        : num_actions_(num_actions), state_arity_(state_arity) {}

    std::size_t num_actions() const { return num_actions_; }
    std::size_t state_arity() const { return state_arity_; }
    std::size_t num_states() const { return values_.size(); }

    const std::vector<double>& action_values(StateKey s);
    double value(StateKey s, std::size_t action);
    std::uint32_t visits(StateKey s, std::size_t action);

    // Greedy action; ties resolved toward the lowest action index.
    std::size_t greedy_action(StateKey s);

    // Epsilon-greedy selection; advances the schedule by one decision.
    std::size_t select_action(StateKey s, EpsilonSchedule& schedule, Rng& rng);

    // Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
    // Pass s_next == s for the contextual-bandit regime.
    double update(StateKey s, std::size_t action, double reward, StateKey s_next,
                  double alpha, double gamma);

    // CSV dump `s0,..,s{n-1},action,visits,q_value`, rows sorted by state.
    void dump_csv(const std::filesystem::path& path) const;
    static QTable load_csv(const std::filesystem::path& path);

private:
    struct Entry {
        std::vector<double> q;
        std::vector<std::uint32_t> visits;
    };

    Entry& entry(StateKey s);

    std::size_t num_actions_;
    std::size_t state_arity_;
    std::unordered_map<StateKey, Entry> values_;
};

}  // namespace rlcache
