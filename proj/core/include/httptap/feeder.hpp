// Sub-TCP-connection load balancing across consumers.
#pragma once

#include <cstdint>
#include <thread>
#include <vector>

#include "httptap/hash.hpp"
#include "httptap/http.hpp"

namespace httptap {

enum class OverflowPolicy : uint8_t {
    Drop,   // count and discard when the consumer queue is full
    Block,  // spin/yield until the consumer makes room
};

struct FeederConfig {
    uint32_t consumers = 1;
    size_t queue_capacity = 65536;
    OverflowPolicy overflow_policy = OverflowPolicy::Drop;
};

struct FeederStats {
    std::vector<uint64_t> dispatched;  // per consumer
    std::vector<uint64_t> drops;       // per consumer, Drop policy only
    // Filled in by the pipeline once consumers stop; the feeder itself
    // cannot observe matches.
    std::vector<uint64_t> transactions_completed;
    uint64_t offered = 0;              // messages entering dispatch
    uint64_t skipped_no_ack = 0;       // requests without the ACK flag

    uint64_t total_dispatched() const {
        uint64_t t = 0;
        for (uint64_t v : dispatched) t += v;
        return t;
    }
    uint64_t total_drops() const {
        uint64_t t = 0;
        for (uint64_t v : drops) t += v;
        return t;
    }
};

// Consumer index for one classified message; a transaction's request and
// response always land on the same index.
inline uint32_t dispatch(const HttpMessage& msg, const FeederConfig& cfg) {
    return consumer_index(feeder_hash(msg).value(), cfg.consumers);
}

// Pumps a message source into n sinks. `source(msg)` fills `msg` and
// returns false at end of input; `sinks[i].try_push(std::move(msg))`
// returns false when full and must leave the message intact in that case
// (SpscQueue honors this). Messages reach exactly the sink dispatch
// picks, in source order per sink.
template <typename Source, typename SinkRange>
FeederStats run_feeder(Source&& source, const FeederConfig& cfg, SinkRange& sinks) {
    FeederStats stats;
    stats.dispatched.assign(cfg.consumers, 0);
    stats.drops.assign(cfg.consumers, 0);

    HttpMessage msg;
    while (source(msg)) {
        std::optional<uint32_t> hash = feeder_hash(msg);
        if (!hash) {
            ++stats.skipped_no_ack;
            continue;
        }
        ++stats.offered;
        uint32_t idx = consumer_index(*hash, cfg.consumers);
        if (sinks[idx].try_push(std::move(msg))) {
            ++stats.dispatched[idx];
            continue;
        }
        if (cfg.overflow_policy == OverflowPolicy::Drop) {
            ++stats.drops[idx];
            continue;
        }
        for (;;) {
            std::this_thread::yield();
            if (sinks[idx].try_push(std::move(msg))) {
                ++stats.dispatched[idx];
                break;
            }
        }
    }
    return stats;
}

}  // namespace httptap
