#include "rlcache/simulator.hpp"

namespace rlcache {

Simulator::Simulator(const SimParams& params, Policy& policy)
    : cache_(params.capacity, params.w_high, params.w_low, params.daily_limit,
             params.hit_rate_window),
      policy_(policy) {
    policy_.bind(cache_, stats_);
}

void Simulator::advance_day_to(Day day) {
    while (current_day_ < day) {
        cache_.snapshot_day(current_day_);
        stats_.purge(current_day_, [this](FileKey f) { return cache_.contains(f); });
        policy_.on_day_boundary(current_day_);
        ++current_day_;
    }
}

RequestOutcome Simulator::process(const Trace::Row& req) {
    return process(req, expected_tick_);
}

RequestOutcome Simulator::process(const Trace::Row& req, Tick claimed_tick) {
    if (claimed_tick != expected_tick_)
        throw SimError("tick " + std::to_string(claimed_tick) + " out of order, expected " +
                       std::to_string(expected_tick_));
    if (req.day < current_day_) throw SimError("request day moves backwards");
    advance_day_to(req.day);
    policy_.before_request(req);

    const FileStats st = stats_.update(req.file, req.size, req.dtype, req.day,
                                       request_index_);
    const Tick tick = request_index_;
    ++request_index_;
    ++expected_tick_;

    RequestOutcome outcome;
    if (cache_.contains(req.file)) {
        if (cache_.gate_blocks(req.size)) {
            // Over the daily threshold: processed as a remote call and
            // counted as a miss; the cached entry is left untouched.
            cache_.serve_miss(req.size);
            outcome = RequestOutcome::miss_bandwidth;
        } else {
            cache_.serve_hit(req.file, tick);
            outcome = RequestOutcome::hit;
        }
    } else {
        cache_.serve_miss(req.size);
        if (req.size > cache_.capacity()) {
            outcome = RequestOutcome::miss_proxied;
        } else if (policy_.admit(req, st)) {
            if (cache_.occupancy() + req.size > cache_.capacity()) {
                policy_.make_room(req.size);
                if (eviction_event_observer_) eviction_event_observer_(cache_.occupancy());
            }
            cache_.admit(req.file, req.size, tick);
            if (admission_observer_) admission_observer_(req, true);
            if (cache_.above_high_mark()) {
                policy_.on_high_watermark();
                if (eviction_event_observer_) eviction_event_observer_(cache_.occupancy());
            }
            outcome = RequestOutcome::miss_stored;
        } else {
            if (admission_observer_) admission_observer_(req, false);
            outcome = RequestOutcome::miss_proxied;
        }
    }

    policy_.after_request(req, st, outcome, request_index_);
    if (observer_) observer_(req, outcome);
    return outcome;
}

void Simulator::run(const Trace& trace) {
    if (finished_) throw SimError("Simulator::run may only be called once");
    for (const auto& row : trace.rows()) process(row);
    cache_.snapshot_day(current_day_);
    policy_.on_run_end();
    finished_ = true;
}

}  // namespace rlcache
