// First-packet HTTP request/response classification.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "httptap/packet.hpp"

namespace httptap {

enum class HttpKind : uint8_t { Request, Response };

// Longest request-target we keep; anything longer is silently truncated.
inline constexpr size_t kMaxUriLength = 1455;
// User-Agent values are capped to bound per-message memory.
inline constexpr size_t kMaxAgentLength = 64;

// The head of an HTTP request or response as recovered from the first
// packet alone. The embedded PacketView keeps header fields and timestamp;
// its payload span is cleared once the head fields are extracted.
struct HttpMessage {
    PacketView pkt;
    HttpKind kind = HttpKind::Request;
    uint16_t status_code = 0;    // response only, 100..599
    std::string method;          // request only
    std::string uri;             // request only, at most kMaxUriLength chars
    std::string host;            // Host header value, if seen in this packet
    std::string agent;           // User-Agent header value, first 64 chars
    std::string status_message;  // response only, reason phrase
};

// Classifies a parsed packet's payload. A request starts with one of the
// nine method tokens followed by a space; a response starts with "HTTP/"
// then version, space and a 3-digit status code in 100..599. Head fields
// are scanned only within this packet's bytes. Returns nullopt for
// anything else (including malformed lines after a matching prefix).
std::optional<HttpMessage> classify_http(const PacketView& pkt);

// The recognized request method tokens, in canonical report order.
std::span<const std::string_view> http_method_tokens();

}  // namespace httptap
