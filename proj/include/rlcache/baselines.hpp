#pragma once

#include <algorithm>

#include "rlcache/policy.hpp"

namespace rlcache {

// Write-everything admission with a configurable eviction ordering under the
// high/low watermark mechanism.
class WriteEverythingPolicy : public Policy {
public:
    explicit WriteEverythingPolicy(EvictionKind kind) : kind_(kind) {}

    std::string name() const override { return std::string("we-") + to_string(kind_); }

    bool admit(const Trace::Row&, const FileStats&) override { return true; }

    void make_room(Bytes needed) override {
        const Bytes target = std::min(cache().low_mark(), cache().capacity() - needed);
        cache().evict_down_to(target, order_for_eviction(cache(), kind_));
    }

    void on_high_watermark() override {
        cache().evict_to_low_watermark(order_for_eviction(cache(), kind_));
    }

    EvictionKind kind() const { return kind_; }

private:
    EvictionKind kind_;
};

}  // namespace rlcache
