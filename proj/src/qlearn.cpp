#include "rlcache/qlearn.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace rlcache {

void BinningScheme::validate() const {
    auto ascending = [](const auto& edges) {
        for (std::size_t i = 1; i < edges.size(); ++i)
            if (!(edges[i - 1] < edges[i])) return false;
        return true;
    };
    if (!ascending(size_edges) || !ascending(freq_edges) || !ascending(dt_edges) ||
        !ascending(cat_occupancy_edges))
        throw SimError("binning edges must be strictly ascending");
    if (occupancy_bins <= 0 || hitrate_bins <= 0)
        throw SimError("occupancy/hitrate bin counts must be positive");
}

StateKey bin_addition_state(const BinningScheme& bins, const FileStats& st,
                            const Cache& cache, AdditionVariant variant) {
    std::vector<std::uint8_t> parts;
    parts.reserve(5);
    parts.push_back(bins.size_bin(st.size));
    parts.push_back(bins.freq_bin(st.window_count));
    parts.push_back(bins.dt_bin(st.delta_days));
    if (variant == AdditionVariant::scdl2) {
        parts.push_back(bins.occupancy_bin(cache.occupancy_fraction()));
        parts.push_back(bins.hitrate_bin(cache.hit_rate()));
    }
    return pack_state(parts);
}

QTable::Entry& QTable::entry(StateKey s) {
    auto [it, inserted] = values_.try_emplace(s);
    if (inserted) {
        it->second.q.assign(num_actions_, 0.0);
        it->second.visits.assign(num_actions_, 0);
    }
    return it->second;
}

const std::vector<double>& QTable::action_values(StateKey s) { return entry(s).q; }

double QTable::value(StateKey s, std::size_t action) { return entry(s).q.at(action); }

std::uint32_t QTable::visits(StateKey s, std::size_t action) {
    return entry(s).visits.at(action);
}

std::size_t QTable::greedy_action(StateKey s) {
    const auto& q = entry(s).q;
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[best]) best = a;
    return best;
}

std::size_t QTable::select_action(StateKey s, EpsilonSchedule& schedule, Rng& rng) {
    const double eps = schedule.value();
    schedule.advance();
    if (rng.uniform01() < eps)
        return static_cast<std::size_t>(rng.uniform_below(num_actions_));
    return greedy_action(s);
}

double QTable::update(StateKey s, std::size_t action, double reward, StateKey s_next,
                      double alpha, double gamma) {
    if (!std::isfinite(reward)) throw SimError("non-finite reward in Q update");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw SimError("alpha must be in (0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw SimError("gamma must be in [0,1]");
    const auto& next_q = entry(s_next).q;
    const double next_max = *std::max_element(next_q.begin(), next_q.end());
    Entry& e = entry(s);
    double& q = e.q.at(action);
    q += alpha * (reward + gamma * next_max - q);
    ++e.visits.at(action);
    return q;
}

void QTable::dump_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw SimError("cannot open " + path.string());
    for (std::size_t i = 0; i < state_arity_; ++i) out << 's' << i << ',';
    out << "action,visits,q_value\n";
    std::vector<StateKey> keys;
    keys.reserve(values_.size());
    for (const auto& [k, e] : values_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    out.precision(17);
    for (const StateKey k : keys) {
        const Entry& e = values_.at(k);
        const auto bins = unpack_state(k, state_arity_);
        for (std::size_t a = 0; a < num_actions_; ++a) {
            for (const auto b : bins) out << static_cast<int>(b) << ',';
            out << a << ',' << e.visits[a] << ',' << e.q[a] << '\n';
        }
    }
    if (!out) throw SimError("failed writing " + path.string());
}

QTable QTable::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw SimError("empty q-table file " + path.string());
    const std::size_t arity = static_cast<std::size_t>(
        std::count(header.begin(), header.end(), ',')) - 2;

    // First pass collects rows; action count = max action + 1.
    struct RowData {
        StateKey key;
        std::size_t action;
        std::uint32_t visits;
        double q;
    };
    std::vector<RowData> rows;
    std::string line;
    std::size_t max_action = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::uint64_t> ints;
        double q = 0.0;
        std::size_t start = 0, field = 0;
        const std::size_t expected = arity + 3;
        while (field < expected) {
            std::size_t pos = line.find(',', start);
            const std::string tok = line.substr(start, pos == std::string::npos
                                                           ? std::string::npos
                                                           : pos - start);
            if (field + 1 == expected) {
                q = std::stod(tok);
            } else {
                ints.push_back(std::stoull(tok));
            }
            ++field;
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (ints.size() != arity + 2)
            throw SimError("malformed q-table row in " + path.string());
        std::vector<std::uint8_t> bins(arity);
        for (std::size_t i = 0; i < arity; ++i)
            bins[i] = static_cast<std::uint8_t>(ints[i]);
        RowData r;
        r.key = pack_state(bins);
        r.action = static_cast<std::size_t>(ints[arity]);
        r.visits = static_cast<std::uint32_t>(ints[arity + 1]);
        r.q = q;
        max_action = std::max(max_action, r.action);
        rows.push_back(r);
    }
    QTable table(max_action + 1, arity);
    for (const RowData& r : rows) {
        Entry& e = table.entry(r.key);
        e.q.at(r.action) = r.q;
        e.visits.at(r.action) = r.visits;
    }
    return table;
}

}  // namespace rlcache
