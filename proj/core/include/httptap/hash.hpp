// Transaction-affine XOR hashing.
//
// Three related hash functions drive both the match table placement and
// the per-transaction load balancing:
//   - the plain 4-tuple XOR, which keys whole TCP flows;
//   - the transaction hash, which folds in the request's acknowledgment
//     number or the response's sequence number so that the two halves of
//     one HTTP transaction hash equal while distinct transactions on the
//     same flow do not;
//   - the feeder hash, which additionally XORs the four bytes of that
//     seq/ack number into the low byte to randomize the least significant
//     bits before the modulo that picks a consumer.
#pragma once

#include <cstdint>
#include <optional>

#include "httptap/http.hpp"
#include "httptap/packet.hpp"

namespace httptap {

constexpr uint32_t hash_4tuple(uint32_t src_ip, uint16_t src_port, uint32_t dst_ip,
                               uint16_t dst_port) {
    return src_ip ^ static_cast<uint32_t>(src_port) ^ dst_ip ^
           static_cast<uint32_t>(dst_port);
}

constexpr uint32_t hash_4tuple(const PacketView& pkt) {
    return hash_4tuple(pkt.src_ip, pkt.src_port, pkt.dst_ip, pkt.dst_port);
}

// XOR of the four bytes of a 32-bit number, placed in the low 8 bits.
constexpr uint32_t xor_fold_bytes(uint32_t v) {
    return (v >> 24 ^ v >> 16 ^ v >> 8 ^ v) & 0xFFu;
}

// Requests hash with their acknowledgment number, responses with their
// sequence number; a response whose seq equals its request's ack therefore
// hashes identically. Returns nullopt for a request packet without the
// ACK flag (malformed capture; callers skip and count the message).
constexpr std::optional<uint32_t> hash_transaction(const PacketView& pkt, HttpKind kind) {
    if (kind == HttpKind::Request) {
        if (!pkt.ack_valid) return std::nullopt;
        return hash_4tuple(pkt) ^ pkt.ack;
    }
    return hash_4tuple(pkt) ^ pkt.seq;
}

inline std::optional<uint32_t> hash_transaction(const HttpMessage& msg) {
    return hash_transaction(msg.pkt, msg.kind);
}

// Transaction hash with the seq/ack bytes folded into the low byte.
constexpr std::optional<uint32_t> feeder_hash(const PacketView& pkt, HttpKind kind) {
    std::optional<uint32_t> h = hash_transaction(pkt, kind);
    if (!h) return std::nullopt;
    uint32_t number = kind == HttpKind::Request ? pkt.ack : pkt.seq;
    return *h ^ xor_fold_bytes(number);
}

inline std::optional<uint32_t> feeder_hash(const HttpMessage& msg) {
    return feeder_hash(msg.pkt, msg.kind);
}

// Non-negative remainder picking one of n consumers.
constexpr uint32_t consumer_index(uint32_t hash, uint32_t n) {
    return hash % n;
}

}  // namespace httptap
