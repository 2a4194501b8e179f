#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rlcache {

using Bytes = std::uint64_t;
using Tick = std::uint64_t;
using Day = std::int32_t;

// Dense key into a trace's interned file-name table.
using FileKey = std::uint32_t;

inline constexpr Bytes KiB = 1024ull;
inline constexpr Bytes MiB = 1024ull * KiB;
inline constexpr Bytes GiB = 1024ull * MiB;
inline constexpr Bytes TiB = 1024ull * GiB;

enum class RequestOutcome : std::uint8_t {
    hit,             // served from cache memory
    miss_stored,     // served remotely, file admitted to the cache
    miss_proxied,    // served remotely, file not admitted
    miss_bandwidth,  // file was cached but the daily bandwidth gate forced a remote call
};

inline bool is_hit(RequestOutcome o) { return o == RequestOutcome::hit; }

inline const char* to_string(RequestOutcome o) {
    switch (o) {
    case RequestOutcome::hit: return "hit";
    case RequestOutcome::miss_stored: return "miss_stored";
    case RequestOutcome::miss_proxied: return "miss_proxied";
    case RequestOutcome::miss_bandwidth: return "miss_bandwidth";
    }
    return "?";
}

struct SimError : std::runtime_error {
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rlcache
