// Ethernet/IPv4/TCP frame decoding into PacketView.
#pragma once

#include <cstdint>
#include <span>
#include <variant>

#include "httptap/time.hpp"

namespace httptap {

// Header fields of one captured TCP/IPv4 packet. IP addresses are the
// network-order octets read as a big-endian 32-bit integer, so 10.0.0.1
// is 0x0A000001 on every host. The payload span aliases the frame buffer
// it was parsed from and is only valid while that buffer lives.
struct PacketView {
    CaptureTimestamp ts;
    uint32_t src_ip = 0;
    uint32_t dst_ip = 0;
    uint16_t src_port = 0;
    uint16_t dst_port = 0;
    uint32_t seq = 0;
    uint32_t ack = 0;
    bool ack_valid = false;
    std::span<const uint8_t> payload;
};

// Why a frame was not parsed into a PacketView.
enum class SkipReason : uint8_t {
    NonIp,      // ethertype is not IPv4 (after unwrapping one 802.1Q tag)
    NonTcp,     // IPv4 protocol is not TCP
    Fragment,   // nonzero IPv4 fragment offset
    Truncated,  // capture too short for the headers it claims
};

const char* skip_reason_name(SkipReason r);

using ParseResult = std::variant<PacketView, SkipReason>;

// Decodes a raw Ethernet II frame. Never fails hard: every non-conforming
// frame maps to a SkipReason. A single 802.1Q tag is unwrapped; QinQ is
// skipped. IPv4 fragments (nonzero offset) are skipped, not reassembled.
ParseResult parse_frame(std::span<const uint8_t> frame, const CaptureTimestamp& ts);

}  // namespace httptap
