// HTTP transaction records and their text rendering.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "httptap/time.hpp"

namespace httptap {

// One output record: a request paired with its response, or an unmatched
// half evicted by the garbage collector or the end-of-input drain. The
// client/server orientation comes from the request's source/destination;
// for a response-only record it is the reverse of the packet's.
struct TransactionRecord {
    uint32_t client_ip = 0;
    uint16_t client_port = 0;
    uint32_t server_ip = 0;
    uint16_t server_port = 0;
    std::optional<CaptureTimestamp> request_ts;
    std::optional<CaptureTimestamp> response_ts;
    std::optional<int64_t> response_time_ns;  // response_ts - request_ts, exact
    std::string response_message;
    std::optional<uint16_t> response_code;
    std::string method;
    std::string agent;
    std::string host;
    std::string uri;
    // Request ack = response seq. Not rendered; keys downstream dedup.
    uint32_t match_number = 0;

    bool matched() const { return request_ts.has_value() && response_ts.has_value(); }

    friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

// Total order over every field; used for deterministic output and
// multiset comparisons in tests.
bool record_less(const TransactionRecord& a, const TransactionRecord& b);

std::string format_ipv4(uint32_t ip);
std::optional<uint32_t> parse_ipv4(const std::string& text);

// Renders the 13 pipe-delimited fields:
//   client IP|client port|server IP|server port|request ts|response ts|
//   response time|response message|response code|method|agent|host|URI
// Timestamps and the response time carry 9 decimal digits; absent fields
// render empty. When a Host value is present the URI field is rendered as
// "http://" + host + target. The line ends with '\n'.
std::string format_record(const TransactionRecord& rec);

// Parses a line produced by format_record. The match number is not part
// of the text format and comes back as 0. Returns nullopt on malformed
// input.
std::optional<TransactionRecord> parse_record_line(const std::string& line);

// Keeps the first record for each (client, server, match_number) key and
// drops later duplicates, realizing the downstream retransmission filter.
std::vector<TransactionRecord> dedup_records(std::vector<TransactionRecord> records);

// The dedup key as a comparable value, shared with the stats module's
// duplicate-suspect counter.
struct TransactionKey {
    uint32_t client_ip = 0;
    uint16_t client_port = 0;
    uint32_t server_ip = 0;
    uint16_t server_port = 0;
    uint32_t match_number = 0;

    friend constexpr auto operator<=>(const TransactionKey&, const TransactionKey&) = default;
};

inline TransactionKey record_key(const TransactionRecord& rec) {
    return {rec.client_ip, rec.client_port, rec.server_ip, rec.server_port,
            rec.match_number};
}

struct TransactionKeyHash {
    size_t operator()(const TransactionKey& k) const {
        uint64_t a = (static_cast<uint64_t>(k.client_ip) << 32) |
                     (static_cast<uint64_t>(k.client_port) << 16) | k.server_port;
        uint64_t b = (static_cast<uint64_t>(k.server_ip) << 32) | k.match_number;
        uint64_t x = a * 0x9E3779B97F4A7C15ull ^ (b + 0x7F4A7C15u);
        x ^= x >> 29;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 32;
        return static_cast<size_t>(x);
    }
};

}  // namespace httptap
