#include "rlcache/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rlcache/rng.hpp"

namespace rlcache {

Request Trace::request(std::size_t i) const {
    const Row& r = rows_[i];
    Request q;
    q.tick = i;
    q.day = r.day;
    q.file_id = file_names_[r.file];
    q.size = r.size;
    q.data_type = type_names_[r.dtype];
    q.user_id = user_names_[r.user];
    q.site_id = site_names_[r.site];
    q.file_key = r.file;
    q.type_key = r.dtype;
    return q;
}

Day Trace::num_days() const {
    return rows_.empty() ? 0 : rows_.back().day + 1;
}

Bytes Trace::total_bytes() const {
    Bytes total = 0;
    for (const Row& r : rows_) total += r.size;
    return total;
}

std::uint32_t Trace::intern(std::vector<std::string>& names,
                            std::unordered_map<std::string, std::uint32_t>& index,
                            std::string_view name) {
    auto it = index.find(std::string(name));
    if (it != index.end()) return it->second;
    const auto key = static_cast<std::uint32_t>(names.size());
    names.emplace_back(name);
    index.emplace(names.back(), key);
    return key;
}

void Trace::add_request(Day day, std::string_view file_id, Bytes size,
                        std::string_view data_type, std::string_view user_id,
                        std::string_view site_id, const std::string& context) {
    const std::string where = context.empty() ? std::string() : (", " + context);
    if (day < 0) throw SimError("day must be >= 0" + where);
    if (!rows_.empty() && day < rows_.back().day)
        throw SimError("days must be non-decreasing" + where);
    if (size == 0) throw SimError("size must be positive" + where);
    if (file_id.empty()) throw SimError("file_id must be non-empty" + where);

    const FileKey file = intern(file_names_, file_index_, file_id);
    const auto dtype = static_cast<std::uint8_t>(intern(type_names_, type_index_, data_type));
    if (file == file_attrs_.size()) {
        file_attrs_.emplace_back(size, dtype);
    } else {
        const auto& [first_size, first_dtype] = file_attrs_[file];
        if (first_size != size)
            throw SimError("file '" + std::string(file_id) + "' changes size from " +
                           std::to_string(first_size) + " to " + std::to_string(size) + where);
        if (first_dtype != dtype)
            throw SimError("file '" + std::string(file_id) + "' changes data_type" + where);
    }

    Row row;
    row.day = day;
    row.file = file;
    row.size = size;
    row.dtype = dtype;
    row.user = intern(user_names_, user_index_, user_id);
    row.site = intern(site_names_, site_index_, site_id);
    rows_.push_back(row);
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::int64_t parse_int(std::string_view field, const char* name, const std::string& where) {
    std::int64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw SimError(std::string("malformed ") + name + " '" + std::string(field) +
                       "', " + where);
    return value;
}

constexpr std::string_view kCsvHeader = "day,file_id,size_bytes,data_type,user_id,site_id";

}  // namespace

Trace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open trace file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw SimError("empty trace file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw SimError("bad trace header, expected '" + std::string(kCsvHeader) +
                       "' in " + path.string());

    Trace trace;
    std::size_t row_number = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = "row " + std::to_string(row_number);
        const auto fields = split_csv(line);
        if (fields.size() != 6)
            throw SimError("expected 6 fields, got " + std::to_string(fields.size()) +
                           ", " + where);
        const std::int64_t day = parse_int(fields[0], "day", where);
        const std::int64_t size = parse_int(fields[2], "size_bytes", where);
        if (size <= 0) throw SimError("size must be positive, " + where);
        trace.add_request(static_cast<Day>(day), fields[1], static_cast<Bytes>(size),
                          fields[3], fields[4], fields[5], where);
    }
    return trace;
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot open output file: " + path.string());
    out << kCsvHeader << '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const Request q = trace.request(i);
        out << q.day << ',' << q.file_id << ',' << q.size << ',' << q.data_type << ','
            << q.user_id << ',' << q.site_id << '\n';
    }
    if (!out) throw SimError("failed writing trace to " + path.string());
}

namespace {

// Draws ranks from a Zipf distribution via inverse CDF on a cumulative table.
class ZipfSampler {
public:
    ZipfSampler(int n, double skew) : cumulative_(static_cast<std::size_t>(n)) {
        double total = 0.0;
        for (int r = 0; r < n; ++r) {
            total += 1.0 / std::pow(static_cast<double>(r + 1), skew);
            cumulative_[static_cast<std::size_t>(r)] = total;
        }
        for (double& c : cumulative_) c /= total;
    }

    int draw(Rng& rng) const {
        const double u = rng.uniform01();
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) return static_cast<int>(cumulative_.size()) - 1;
        return static_cast<int>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
};

std::string padded_name(char prefix, std::uint64_t n, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%0*llu", prefix, width,
                  static_cast<unsigned long long>(n));
    return buf;
}

}  // namespace

Trace generate_trace(const TraceSpec& spec) {
    if (spec.num_days <= 0) throw SimError("TraceSpec: num_days must be positive");
    if (spec.requests_per_day <= 0)
        throw SimError("TraceSpec: requests_per_day must be positive");
    if (spec.num_distinct_files <= 0)
        throw SimError("TraceSpec: num_distinct_files must be positive");
    if (spec.popularity_skew < 0) throw SimError("TraceSpec: popularity_skew must be >= 0");
    if (spec.size_median == 0) throw SimError("TraceSpec: size_median must be positive");
    if (spec.data_type_weights.empty())
        throw SimError("TraceSpec: data_type_weights must be non-empty");
    double weight_sum = 0.0;
    for (const auto& [name, w] : spec.data_type_weights) {
        if (w < 0) throw SimError("TraceSpec: negative data_type weight for " + name);
        weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9)
        throw SimError("TraceSpec: data_type_weights must sum to 1");

    Rng rng(spec.rng_seed);
    const int num_files = spec.num_distinct_files;

    // Per-file constant attributes.
    std::vector<Bytes> sizes(static_cast<std::size_t>(num_files));
    std::vector<std::uint8_t> dtypes(static_cast<std::size_t>(num_files));
    std::vector<double> type_cdf;
    double acc = 0.0;
    for (const auto& [name, w] : spec.data_type_weights) {
        acc += w;
        type_cdf.push_back(acc / weight_sum);
    }
    const double mu = std::log(static_cast<double>(spec.size_median));
    for (int f = 0; f < num_files; ++f) {
        const double ln_size = mu + spec.size_sigma * rng.gaussian();
        sizes[static_cast<std::size_t>(f)] =
            std::max<Bytes>(1, static_cast<Bytes>(std::llround(std::exp(ln_size))));
        const double u = rng.uniform01();
        std::uint8_t t = 0;
        while (static_cast<std::size_t>(t) + 1 < type_cdf.size() && u > type_cdf[t]) ++t;
        dtypes[static_cast<std::size_t>(f)] = t;
    }

    const ZipfSampler zipf(num_files, spec.popularity_skew);

    // rank -> file permutation; redrawn per drift epoch when drift is enabled.
    std::vector<std::uint32_t> perm(static_cast<std::size_t>(num_files));
    std::iota(perm.begin(), perm.end(), 0u);
    auto reshuffle = [&](std::uint64_t epoch) {
        Rng perm_rng(spec.rng_seed ^ (0x9e3779b97f4a7c15ull * (epoch + 1)));
        std::iota(perm.begin(), perm.end(), 0u);
        perm_rng.shuffle(perm);
    };
    reshuffle(0);
    std::uint64_t current_epoch = 0;

    const int name_width = num_files >= 1000000 ? 7 : 6;
    std::vector<std::string> file_names(static_cast<std::size_t>(num_files));
    for (int f = 0; f < num_files; ++f)
        file_names[static_cast<std::size_t>(f)] = padded_name('f', static_cast<std::uint64_t>(f), name_width);
    std::vector<std::string> type_names;
    for (const auto& [name, w] : spec.data_type_weights) type_names.push_back(name);

    Trace trace;
    const std::uint64_t total =
        static_cast<std::uint64_t>(spec.num_days) * static_cast<std::uint64_t>(spec.requests_per_day);
    for (std::uint64_t i = 0; i < total; ++i) {
        const Day day = static_cast<Day>(i / static_cast<std::uint64_t>(spec.requests_per_day));
        if (spec.popularity_drift_days > 0) {
            const std::uint64_t epoch =
                static_cast<std::uint64_t>(day) / static_cast<std::uint64_t>(spec.popularity_drift_days);
            if (epoch != current_epoch) {
                current_epoch = epoch;
                reshuffle(epoch);
            }
        }
        const auto file = perm[static_cast<std::size_t>(zipf.draw(rng))];
        const auto user = rng.uniform_below(static_cast<std::uint64_t>(std::max(1, spec.num_users)));
        const auto site = rng.uniform_below(static_cast<std::uint64_t>(std::max(1, spec.num_sites)));
        trace.add_request(day, file_names[file], sizes[file], type_names[dtypes[file]],
                          padded_name('u', user, 3), padded_name('s', site, 2));
    }
    return trace;
}

Trace generate_two_class_trace(const TwoClassSpec& spec) {
    if (spec.num_days <= 0 || spec.requests_per_day <= 0 || spec.num_hot_files <= 0)
        throw SimError("TwoClassSpec: counts must be positive");
    Rng rng(spec.rng_seed);
    Trace trace;
    std::uint64_t next_cold = 0;
    const std::uint64_t total =
        static_cast<std::uint64_t>(spec.num_days) * static_cast<std::uint64_t>(spec.requests_per_day);
    for (std::uint64_t i = 0; i < total; ++i) {
        const Day day = static_cast<Day>(i / static_cast<std::uint64_t>(spec.requests_per_day));
        if (rng.uniform01() < spec.hot_fraction) {
            const auto hot = rng.uniform_below(static_cast<std::uint64_t>(spec.num_hot_files));
            trace.add_request(day, padded_name('h', hot, 4), spec.hot_size, "data",
                              "u000", "s00");
        } else {
            trace.add_request(day, padded_name('c', next_cold++, 8), spec.cold_size, "mc",
                              "u000", "s00");
        }
    }
    return trace;
}

bool two_class_is_hot(const Trace& trace, FileKey key) {
    return !trace.file_name(key).empty() && trace.file_name(key)[0] == 'h';
}

TraceSpec trace_preset(std::string_view name) {
    if (name == "paper-like") {
        // Calibrated so that multi-request files average ~5 requests and most
        // requests land on files seen only once.
        TraceSpec spec;
        spec.num_days = 30;
        spec.requests_per_day = 20000;
        spec.num_distinct_files = 200000;
        spec.popularity_skew = 0.80;
        spec.size_median = 2 * MiB;
        spec.size_sigma = 1.0;
        spec.rng_seed = 20180101;
        spec.popularity_drift_days = 7;
        return spec;
    }
    if (name == "tiny") {
        TraceSpec spec;
        spec.num_days = 3;
        spec.requests_per_day = 2000;
        spec.num_distinct_files = 1500;
        spec.popularity_skew = 0.9;
        spec.size_median = 2 * MiB;
        spec.size_sigma = 1.0;
        spec.rng_seed = 7;
        return spec;
    }
    throw SimError("unknown trace preset: " + std::string(name));
}

std::vector<std::string> trace_preset_names() { return {"paper-like", "tiny"}; }

double mean_requests_per_multi_file(const Trace& trace) {
    std::vector<std::uint32_t> counts(trace.num_files(), 0);
    for (const auto& row : trace.rows()) ++counts[row.file];
    std::uint64_t total = 0, files = 0;
    for (const auto c : counts) {
        if (c > 1) {
            total += c;
            ++files;
        }
    }
    return files == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(files);
}

}  // namespace rlcache
