// Pending-message hash table pairing HTTP requests with responses.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "httptap/hash.hpp"
#include "httptap/http.hpp"
#include "httptap/record.hpp"
#include "httptap/time.hpp"

namespace httptap {

// Garbage collection policy, in capture time (not wall clock): entries in
// cells untouched for idle_timeout are evicted; sweeps run each
// sweep_period of observed capture time.
struct GcPolicy {
    uint64_t idle_timeout_ns = 60ull * kNanosPerSecond;
    uint64_t sweep_period_ns = 1ull * kNanosPerSecond;
};

// True iff the response answers the request: reversed 4-tuple and the
// response sequence number equals the request acknowledgment number.
bool match_condition(const HttpMessage& req, const HttpMessage& resp);

TransactionRecord make_matched_record(const HttpMessage& req, const HttpMessage& resp);
TransactionRecord make_unmatched_record(const HttpMessage& msg);

// Fixed-size hash table of cells, each holding a collision list of pending
// messages in insertion order, backed by a bounded node pool. Single-owner:
// exactly one thread may touch a table; parallelism comes from running one
// table per consumer.
class MatchTable {
public:
    // cells is rounded up to a power of two. pool_capacity of 0 means
    // "same as the cell count".
    explicit MatchTable(size_t cells, size_t pool_capacity = 0);

    // Processes one classified message. If a stored counterpart satisfies
    // the match condition, removes it and returns the matched record;
    // otherwise stores the message (duplicates of an equal key stay in the
    // collision list awaiting their own counterpart) and returns nullopt.
    // When the pool is exhausted the message is dropped and counted, never
    // evicting pending state.
    std::optional<TransactionRecord> insert(HttpMessage&& msg);

    // Evicts every message in cells idle longer than the policy's timeout,
    // emitting each as an unmatched record, in cell order.
    std::vector<TransactionRecord> gc_sweep(const CaptureTimestamp& now,
                                            const GcPolicy& policy);

    // Evicts everything pending; used at end of input.
    std::vector<TransactionRecord> drain();

    size_t cell_count() const { return cells_.size(); }
    size_t pool_capacity() const { return pool_capacity_; }
    size_t pending() const { return pending_; }
    uint64_t matched_count() const { return matched_; }
    uint64_t unmatched_emitted() const { return unmatched_emitted_; }
    uint64_t pool_dropped() const { return pool_dropped_; }
    uint64_t no_ack_skipped() const { return no_ack_skipped_; }

    // Verifies that every stored message recomputes to the cell it lives
    // in. Test hook; linear in table size.
    bool check_residency() const;

private:
    static constexpr uint32_t kNil = UINT32_MAX;

    struct Node {
        HttpMessage msg;
        uint32_t next = kNil;
    };

    struct Cell {
        uint32_t head = kNil;
        uint32_t tail = kNil;
        CaptureTimestamp last_activity;
    };

    uint32_t alloc_node();
    void free_node(uint32_t idx);
    void evict_cell(Cell& cell, std::vector<TransactionRecord>& out);

    std::vector<Cell> cells_;
    std::vector<Node> pool_;
    std::vector<uint32_t> free_list_;
    size_t pool_capacity_ = 0;
    size_t mask_ = 0;
    size_t pending_ = 0;
    uint64_t matched_ = 0;
    uint64_t unmatched_emitted_ = 0;
    uint64_t pool_dropped_ = 0;
    uint64_t no_ack_skipped_ = 0;
};

}  // namespace httptap
