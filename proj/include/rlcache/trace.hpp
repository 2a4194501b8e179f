#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rlcache/types.hpp"

namespace rlcache {

// One trace event as seen by consumers. String fields are views into the
// owning Trace's interned tables.
struct Request {
    Tick tick = 0;
    Day day = 0;
    std::string_view file_id;
    Bytes size = 0;
    std::string_view data_type;
    std::string_view user_id;
    std::string_view site_id;
    FileKey file_key = 0;
    std::uint8_t type_key = 0;
};

// Parameters of the synthetic Zipf / log-normal workload generator.
struct TraceSpec {
    int num_days = 30;
    int requests_per_day = 20000;
    int num_distinct_files = 200000;
    double popularity_skew = 0.95;        // Zipf exponent, 0 = uniform
    Bytes size_median = 2 * MiB;          // log-normal median
    double size_sigma = 1.0;              // log-normal sigma (of ln size)
    std::vector<std::pair<std::string, double>> data_type_weights = {
        {"data", 0.55}, {"mc", 0.35}, {"user", 0.10}};
    std::uint64_t rng_seed = 42;
    int popularity_drift_days = 0;        // 0 = stationary popularity
    int num_users = 50;
    int num_sites = 10;
};

// In-memory trace with interned identifiers. Ticks are implicit row order.
class Trace {
public:
    struct Row {
        Day day;
        FileKey file;
        Bytes size;
        std::uint8_t dtype;
        std::uint32_t user;
        std::uint32_t site;
    };

    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    const Row& row(std::size_t i) const { return rows_[i]; }
    const std::vector<Row>& rows() const { return rows_; }

    Request request(std::size_t i) const;

    std::size_t num_files() const { return file_names_.size(); }
    std::size_t num_data_types() const { return type_names_.size(); }
    const std::string& file_name(FileKey k) const { return file_names_[k]; }
    const std::string& data_type_name(std::uint8_t k) const { return type_names_[k]; }
    const std::vector<std::string>& data_type_names() const { return type_names_; }

    Day num_days() const;          // last day + 1, 0 for empty trace
    Bytes total_bytes() const;

    // Appends one request, assigning the next tick. Validates the Request
    // invariants (non-decreasing days, positive size, per-file constant size
    // and data type). `context` names the source position in error messages.
    void add_request(Day day, std::string_view file_id, Bytes size,
                     std::string_view data_type, std::string_view user_id,
                     std::string_view site_id, const std::string& context = {});

private:
    std::uint32_t intern(std::vector<std::string>& names,
                         std::unordered_map<std::string, std::uint32_t>& index,
                         std::string_view name);

    std::vector<Row> rows_;
    std::vector<std::string> file_names_, type_names_, user_names_, site_names_;
    std::vector<std::pair<Bytes, std::uint8_t>> file_attrs_;  // first-seen size/type
    std::unordered_map<std::string, std::uint32_t> file_index_, type_index_,
        user_index_, site_index_;
};

// CSV schema: header `day,file_id,size_bytes,data_type,user_id,site_id`.
// Row numbers in error messages count the header as row 1.
Trace read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

// Deterministic synthetic workload; bitwise reproducible from the seed.
Trace generate_trace(const TraceSpec& spec);

// Two-population workload for learning checks: a small set of hot files that
// keep getting re-requested, and a stream of cold one-shot files.
struct TwoClassSpec {
    int num_days = 10;
    int requests_per_day = 20000;
    int num_hot_files = 200;
    Bytes hot_size = 512 * KiB;
    Bytes cold_size = 8 * MiB;
    double hot_fraction = 0.5;            // fraction of requests hitting the hot set
    std::uint64_t rng_seed = 7;
};
Trace generate_two_class_trace(const TwoClassSpec& spec);

// Returns true iff `key` names a hot file in a two-class trace.
bool two_class_is_hot(const Trace& trace, FileKey key);

// Named generator presets exposed by the CLI. Throws on unknown name.
TraceSpec trace_preset(std::string_view name);
std::vector<std::string> trace_preset_names();

// Mean requests-per-file over files requested more than once.
double mean_requests_per_multi_file(const Trace& trace);

}  // namespace rlcache
