#include "httptap/packet.hpp"

namespace httptap {

namespace {

constexpr uint16_t kEthertypeIpv4 = 0x0800;
constexpr uint16_t kEthertypeVlan = 0x8100;
constexpr uint8_t kIpProtoTcp = 6;
constexpr uint8_t kTcpFlagAck = 0x10;

inline uint16_t rd16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] << 8 | p[1]);
}

inline uint32_t rd32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
           static_cast<uint32_t>(p[2]) << 8 | static_cast<uint32_t>(p[3]);
}

}  // namespace

const char* skip_reason_name(SkipReason r) {
    switch (r) {
        case SkipReason::NonIp: return "NonIp";
        case SkipReason::NonTcp: return "NonTcp";
        case SkipReason::Fragment: return "Fragment";
        case SkipReason::Truncated: return "Truncated";
    }
    return "?";
}

ParseResult parse_frame(std::span<const uint8_t> frame, const CaptureTimestamp& ts) {
    if (frame.size() < 14) return SkipReason::Truncated;

    size_t off = 12;
    uint16_t ethertype = rd16(frame.data() + off);
    off += 2;
    if (ethertype == kEthertypeVlan) {
        if (frame.size() < off + 4) return SkipReason::Truncated;
        ethertype = rd16(frame.data() + off + 2);
        off += 4;
    }
    if (ethertype != kEthertypeIpv4) return SkipReason::NonIp;

    if (frame.size() < off + 20) return SkipReason::Truncated;
    const uint8_t* ip = frame.data() + off;
    if ((ip[0] >> 4) != 4) return SkipReason::NonIp;
    size_t ip_hdr_len = static_cast<size_t>(ip[0] & 0x0F) * 4;
    if (ip_hdr_len < 20) return SkipReason::Truncated;
    if (frame.size() < off + ip_hdr_len) return SkipReason::Truncated;

    uint16_t ip_total_len = rd16(ip + 2);
    uint16_t frag = rd16(ip + 6);
    if ((frag & 0x1FFF) != 0) return SkipReason::Fragment;
    if (ip[9] != kIpProtoTcp) return SkipReason::NonTcp;

    size_t tcp_off = off + ip_hdr_len;
    if (frame.size() < tcp_off + 20) return SkipReason::Truncated;
    const uint8_t* tcp = frame.data() + tcp_off;
    size_t tcp_hdr_len = static_cast<size_t>(tcp[12] >> 4) * 4;
    if (tcp_hdr_len < 20) return SkipReason::Truncated;
    if (frame.size() < tcp_off + tcp_hdr_len) return SkipReason::Truncated;

    PacketView pkt;
    pkt.ts = ts;
    pkt.src_ip = rd32(ip + 12);
    pkt.dst_ip = rd32(ip + 16);
    pkt.src_port = rd16(tcp + 0);
    pkt.dst_port = rd16(tcp + 2);
    pkt.seq = rd32(tcp + 4);
    pkt.ack = rd32(tcp + 8);
    pkt.ack_valid = (tcp[13] & kTcpFlagAck) != 0;

    // Ethernet frames shorter than 60 bytes are padded on the wire; the IP
    // total length is the authority on where the TCP payload really ends.
    size_t payload_off = tcp_off + tcp_hdr_len;
    size_t captured = frame.size() - payload_off;
    size_t ip_payload = 0;
    size_t ip_claim = static_cast<size_t>(ip_total_len);
    if (ip_claim >= ip_hdr_len + tcp_hdr_len) {
        ip_payload = ip_claim - ip_hdr_len - tcp_hdr_len;
    }
    size_t payload_len = captured < ip_payload ? captured : ip_payload;
    pkt.payload = frame.subspan(payload_off, payload_len);
    return pkt;
}

}  // namespace httptap
