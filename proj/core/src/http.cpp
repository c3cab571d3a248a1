#include "httptap/http.hpp"

#include <array>
#include <cstring>
#include <string_view>

namespace httptap {

namespace {

constexpr std::array<std::string_view, 9> kMethods = {
    "GET", "POST", "HEAD", "PUT", "DELETE", "OPTIONS", "TRACE", "CONNECT", "PATCH"};

inline bool ieq(char a, char b) {
    return (a | 0x20) == (b | 0x20);
}

bool starts_with_icase(std::string_view text, std::string_view prefix) {
    if (text.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i) {
        if (!ieq(text[i], prefix[i])) return false;
    }
    return true;
}

std::string_view trim_ows(std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) {
        v.remove_suffix(1);
    }
    return v;
}

// Scans header lines after the first line for Host and User-Agent. Field
// names are matched case-insensitively; a final line cut off by the end of
// the packet still contributes whatever value bytes are present.
void scan_headers(std::string_view payload, size_t first_line_end, HttpMessage& msg) {
    size_t pos = first_line_end;
    while (pos < payload.size()) {
        size_t eol = payload.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos)
                                    ? payload.substr(pos)
                                    : payload.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) break;  // end of head
        if (starts_with_icase(line, "Host:")) {
            msg.host = std::string(trim_ows(line.substr(5)));
        } else if (starts_with_icase(line, "User-Agent:")) {
            std::string_view v = trim_ows(line.substr(11));
            if (v.size() > kMaxAgentLength) v = v.substr(0, kMaxAgentLength);
            msg.agent = std::string(v);
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
}

std::optional<HttpMessage> classify_request(std::string_view payload,
                                            const PacketView& pkt) {
    std::string_view method;
    for (std::string_view m : kMethods) {
        if (payload.size() > m.size() && payload.substr(0, m.size()) == m &&
            payload[m.size()] == ' ') {
            method = m;
            break;
        }
    }
    if (method.empty()) return std::nullopt;

    size_t target_start = method.size() + 1;
    size_t target_end = target_start;
    while (target_end < payload.size()) {
        char c = payload[target_end];
        if (c == ' ' || c == '\r' || c == '\n') break;
        ++target_end;
    }
    if (target_end == target_start) return std::nullopt;  // empty request-target

    HttpMessage msg;
    msg.kind = HttpKind::Request;
    msg.pkt = pkt;
    msg.pkt.payload = {};
    msg.method = std::string(method);
    size_t target_len = target_end - target_start;
    if (target_len > kMaxUriLength) target_len = kMaxUriLength;
    msg.uri = std::string(payload.substr(target_start, target_len));

    size_t eol = payload.find('\n', target_end);
    if (eol != std::string_view::npos) {
        scan_headers(payload, eol + 1, msg);
    }
    return msg;
}

std::optional<HttpMessage> classify_response(std::string_view payload,
                                             const PacketView& pkt) {
    constexpr std::string_view prefix = "HTTP/";
    if (payload.size() <= prefix.size() || payload.substr(0, prefix.size()) != prefix) {
        return std::nullopt;
    }
    size_t pos = prefix.size();
    size_t ver_end = pos;
    while (ver_end < payload.size() && payload[ver_end] != ' ' &&
           payload[ver_end] != '\r' && payload[ver_end] != '\n') {
        ++ver_end;
    }
    if (ver_end == pos || ver_end >= payload.size() || payload[ver_end] != ' ') {
        return std::nullopt;
    }
    pos = ver_end + 1;
    if (pos + 3 > payload.size()) return std::nullopt;
    uint32_t code = 0;
    for (size_t i = 0; i < 3; ++i) {
        char c = payload[pos + i];
        if (c < '0' || c > '9') return std::nullopt;
        code = code * 10 + static_cast<uint32_t>(c - '0');
    }
    pos += 3;
    // A fourth digit means this is not a 3-digit status code.
    if (pos < payload.size() && payload[pos] >= '0' && payload[pos] <= '9') {
        return std::nullopt;
    }
    if (code < 100 || code > 599) return std::nullopt;

    HttpMessage msg;
    msg.kind = HttpKind::Response;
    msg.pkt = pkt;
    msg.pkt.payload = {};
    msg.status_code = static_cast<uint16_t>(code);

    if (pos < payload.size() && payload[pos] == ' ') {
        size_t reason_start = pos + 1;
        size_t reason_end = reason_start;
        while (reason_end < payload.size() && payload[reason_end] != '\r' &&
               payload[reason_end] != '\n') {
            ++reason_end;
        }
        msg.status_message = std::string(payload.substr(reason_start, reason_end - reason_start));
    } else if (pos < payload.size() && payload[pos] != '\r' && payload[pos] != '\n') {
        return std::nullopt;
    }

    size_t eol = payload.find('\n', pos);
    if (eol != std::string_view::npos) {
        scan_headers(payload, eol + 1, msg);
    }
    return msg;
}

}  // namespace

std::optional<HttpMessage> classify_http(const PacketView& pkt) {
    if (pkt.payload.empty()) return std::nullopt;
    std::string_view payload(reinterpret_cast<const char*>(pkt.payload.data()),
                             pkt.payload.size());
    if (payload.front() == 'H' && payload.size() >= 5 && payload.substr(0, 5) == "HTTP/") {
        return classify_response(payload, pkt);
    }
    return classify_request(payload, pkt);
}

std::span<const std::string_view> http_method_tokens() {
    return {kMethods.data(), kMethods.size()};
}

}  // namespace httptap
