#include "httptap/match_table.hpp"

namespace httptap {

namespace {

size_t round_up_pow2(size_t v) {
    if (v < 2) return 1;
    size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace

bool match_condition(const HttpMessage& req, const HttpMessage& resp) {
    const PacketView& r = req.pkt;
    const PacketView& s = resp.pkt;
    return r.src_ip == s.dst_ip && r.src_port == s.dst_port && r.dst_ip == s.src_ip &&
           r.dst_port == s.src_port && s.seq == r.ack;
}

TransactionRecord make_matched_record(const HttpMessage& req, const HttpMessage& resp) {
    TransactionRecord rec;
    rec.client_ip = req.pkt.src_ip;
    rec.client_port = req.pkt.src_port;
    rec.server_ip = req.pkt.dst_ip;
    rec.server_port = req.pkt.dst_port;
    rec.request_ts = req.pkt.ts;
    rec.response_ts = resp.pkt.ts;
    rec.response_time_ns = diff_nanos(resp.pkt.ts, req.pkt.ts);
    rec.response_message = resp.status_message;
    rec.response_code = resp.status_code;
    rec.method = req.method;
    rec.agent = req.agent;
    rec.host = req.host;
    rec.uri = req.uri;
    rec.match_number = req.pkt.ack;
    return rec;
}

TransactionRecord make_unmatched_record(const HttpMessage& msg) {
    TransactionRecord rec;
    if (msg.kind == HttpKind::Request) {
        rec.client_ip = msg.pkt.src_ip;
        rec.client_port = msg.pkt.src_port;
        rec.server_ip = msg.pkt.dst_ip;
        rec.server_port = msg.pkt.dst_port;
        rec.request_ts = msg.pkt.ts;
        rec.method = msg.method;
        rec.agent = msg.agent;
        rec.host = msg.host;
        rec.uri = msg.uri;
        rec.match_number = msg.pkt.ack;
    } else {
        rec.client_ip = msg.pkt.dst_ip;
        rec.client_port = msg.pkt.dst_port;
        rec.server_ip = msg.pkt.src_ip;
        rec.server_port = msg.pkt.src_port;
        rec.response_ts = msg.pkt.ts;
        rec.response_message = msg.status_message;
        rec.response_code = msg.status_code;
        rec.match_number = msg.pkt.seq;
    }
    return rec;
}

MatchTable::MatchTable(size_t cells, size_t pool_capacity)
    : cells_(round_up_pow2(cells)),
      pool_capacity_(pool_capacity == 0 ? cells_.size() : pool_capacity),
      mask_(cells_.size() - 1) {
    // node indices are 32-bit; kNil is reserved
    if (pool_capacity_ >= kNil) pool_capacity_ = kNil - 1;
}

uint32_t MatchTable::alloc_node() {
    if (!free_list_.empty()) {
        uint32_t idx = free_list_.back();
        free_list_.pop_back();
        return idx;
    }
    if (pool_.size() >= pool_capacity_) return kNil;
    pool_.emplace_back();
    return static_cast<uint32_t>(pool_.size() - 1);
}

void MatchTable::free_node(uint32_t idx) {
    pool_[idx].msg = HttpMessage{};
    pool_[idx].next = kNil;
    free_list_.push_back(idx);
}

std::optional<TransactionRecord> MatchTable::insert(HttpMessage&& msg) {
    std::optional<uint32_t> hash = hash_transaction(msg);
    if (!hash) {
        ++no_ack_skipped_;
        return std::nullopt;
    }
    Cell& cell = cells_[*hash & mask_];

    uint32_t prev = kNil;
    uint32_t cur = cell.head;
    while (cur != kNil) {
        Node& node = pool_[cur];
        if (node.msg.kind != msg.kind) {
            const HttpMessage& req = msg.kind == HttpKind::Request ? msg : node.msg;
            const HttpMessage& resp = msg.kind == HttpKind::Request ? node.msg : msg;
            if (match_condition(req, resp)) {
                TransactionRecord rec = make_matched_record(req, resp);
                if (prev == kNil) {
                    cell.head = node.next;
                } else {
                    pool_[prev].next = node.next;
                }
                if (cell.tail == cur) cell.tail = prev;
                free_node(cur);
                --pending_;
                ++matched_;
                return rec;
            }
        }
        prev = cur;
        cur = node.next;
    }

    uint32_t idx = alloc_node();
    if (idx == kNil) {
        ++pool_dropped_;
        return std::nullopt;
    }
    CaptureTimestamp ts = msg.pkt.ts;
    pool_[idx].msg = std::move(msg);
    pool_[idx].next = kNil;
    if (cell.tail == kNil) {
        cell.head = idx;
    } else {
        pool_[cell.tail].next = idx;
    }
    cell.tail = idx;
    cell.last_activity = ts;
    ++pending_;
    return std::nullopt;
}

void MatchTable::evict_cell(Cell& cell, std::vector<TransactionRecord>& out) {
    uint32_t cur = cell.head;
    while (cur != kNil) {
        uint32_t next = pool_[cur].next;
        out.push_back(make_unmatched_record(pool_[cur].msg));
        free_node(cur);
        --pending_;
        ++unmatched_emitted_;
        cur = next;
    }
    cell.head = kNil;
    cell.tail = kNil;
}

std::vector<TransactionRecord> MatchTable::gc_sweep(const CaptureTimestamp& now,
                                                    const GcPolicy& policy) {
    std::vector<TransactionRecord> out;
    if (pending_ == 0) return out;
    for (Cell& cell : cells_) {
        if (cell.head == kNil) continue;
        if (idle_longer_than(cell.last_activity, now, policy.idle_timeout_ns)) {
            evict_cell(cell, out);
        }
    }
    return out;
}

std::vector<TransactionRecord> MatchTable::drain() {
    std::vector<TransactionRecord> out;
    out.reserve(pending_);
    for (Cell& cell : cells_) {
        if (cell.head != kNil) evict_cell(cell, out);
    }
    return out;
}

bool MatchTable::check_residency() const {
    for (size_t i = 0; i < cells_.size(); ++i) {
        for (uint32_t cur = cells_[i].head; cur != kNil; cur = pool_[cur].next) {
            std::optional<uint32_t> hash = hash_transaction(pool_[cur].msg);
            if (!hash || (*hash & mask_) != i) return false;
        }
    }
    return true;
}

}  // namespace httptap
