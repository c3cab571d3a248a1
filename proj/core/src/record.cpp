#include "httptap/record.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <tuple>
#include <unordered_set>

namespace httptap {

namespace {

// Free-text fields escape '|' (the delimiter) and '%' so every line holds
// exactly 12 pipes and parsing stays an exact inverse.
std::string escape_field(const std::string& s) {
    if (s.find('|') == std::string::npos && s.find('%') == std::string::npos) return s;
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        if (c == '|') {
            out += "%7C";
        } else if (c == '%') {
            out += "%25";
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape_field(const std::string& s) {
    if (s.find('%') == std::string::npos) return s;
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && s[i + 1] == '7' &&
            (s[i + 2] == 'C' || s[i + 2] == 'c')) {
            out += '|';
            i += 2;
        } else if (s[i] == '%' && i + 2 < s.size() && s[i + 1] == '2' && s[i + 2] == '5') {
            out += '%';
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::string render_uri(const TransactionRecord& rec) {
    if (rec.uri.empty()) return {};
    if (rec.host.empty()) return rec.uri;
    std::string out;
    out.reserve(7 + rec.host.size() + rec.uri.size());
    out += "http://";
    out += rec.host;
    out += rec.uri;
    return out;
}

// Splits a rendered URI field back into the stored request-target, undoing
// the "http://" + host prefix when it matches the host field.
std::string unrender_uri(const std::string& field, const std::string& host) {
    if (host.empty()) return field;
    std::string prefix = "http://" + host;
    if (field.size() >= prefix.size() && field.compare(0, prefix.size(), prefix) == 0) {
        return field.substr(prefix.size());
    }
    return field;
}

std::optional<CaptureTimestamp> parse_ts_field(const std::string& f) {
    if (f.empty()) return std::nullopt;
    size_t dot = f.find('.');
    if (dot == std::string::npos || f.size() - dot - 1 != 9) return std::nullopt;
    uint64_t sec = 0;
    uint32_t ns = 0;
    auto r1 = std::from_chars(f.data(), f.data() + dot, sec);
    auto r2 = std::from_chars(f.data() + dot + 1, f.data() + f.size(), ns);
    if (r1.ec != std::errc() || r2.ec != std::errc() || ns >= kNanosPerSecond) {
        return std::nullopt;
    }
    return CaptureTimestamp{sec, ns};
}

}  // namespace

bool record_less(const TransactionRecord& a, const TransactionRecord& b) {
    auto ts_key = [](const std::optional<CaptureTimestamp>& t) {
        return t ? std::pair<uint64_t, uint32_t>{t->seconds, t->nanos}
                 : std::pair<uint64_t, uint32_t>{UINT64_MAX, UINT32_MAX};
    };
    auto key = [&](const TransactionRecord& r) {
        return std::tuple(ts_key(r.request_ts), r.match_number, r.client_ip,
                          r.client_port, r.server_ip, r.server_port,
                          ts_key(r.response_ts), r.response_code.value_or(0),
                          std::string_view(r.method), std::string_view(r.uri),
                          std::string_view(r.host), std::string_view(r.agent),
                          std::string_view(r.response_message),
                          r.response_time_ns.value_or(INT64_MIN));
    };
    return key(a) < key(b);
}

std::string format_ipv4(uint32_t ip) {
    char buf[16];
    int n = std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", ip >> 24 & 0xFF,
                          ip >> 16 & 0xFF, ip >> 8 & 0xFF, ip & 0xFF);
    return std::string(buf, static_cast<size_t>(n));
}

std::optional<uint32_t> parse_ipv4(const std::string& text) {
    uint32_t parts[4];
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 4; ++i) {
        auto r = std::from_chars(p, end, parts[i]);
        if (r.ec != std::errc() || parts[i] > 255) return std::nullopt;
        p = r.ptr;
        if (i < 3) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return parts[0] << 24 | parts[1] << 16 | parts[2] << 8 | parts[3];
}

std::string format_record(const TransactionRecord& rec) {
    std::string out;
    out.reserve(160);
    out += format_ipv4(rec.client_ip);
    out += '|';
    out += std::to_string(rec.client_port);
    out += '|';
    out += format_ipv4(rec.server_ip);
    out += '|';
    out += std::to_string(rec.server_port);
    out += '|';
    if (rec.request_ts) out += format_timestamp(*rec.request_ts);
    out += '|';
    if (rec.response_ts) out += format_timestamp(*rec.response_ts);
    out += '|';
    if (rec.response_time_ns) out += format_duration_ns(*rec.response_time_ns);
    out += '|';
    out += escape_field(rec.response_message);
    out += '|';
    if (rec.response_code) out += std::to_string(*rec.response_code);
    out += '|';
    out += escape_field(rec.method);
    out += '|';
    out += escape_field(rec.agent);
    out += '|';
    out += escape_field(rec.host);
    out += '|';
    out += escape_field(render_uri(rec));
    out += '\n';
    return out;
}

std::optional<TransactionRecord> parse_record_line(const std::string& line) {
    std::string body = line;
    if (!body.empty() && body.back() == '\n') body.pop_back();

    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t bar = body.find('|', start);
        if (bar == std::string::npos) {
            fields.push_back(body.substr(start));
            break;
        }
        fields.push_back(body.substr(start, bar - start));
        start = bar + 1;
    }
    if (fields.size() != 13) return std::nullopt;

    TransactionRecord rec;
    auto ip = parse_ipv4(fields[0]);
    auto sip = parse_ipv4(fields[2]);
    if (!ip || !sip) return std::nullopt;
    rec.client_ip = *ip;
    rec.server_ip = *sip;

    auto parse_port = [](const std::string& f) -> std::optional<uint16_t> {
        uint32_t v = 0;
        auto r = std::from_chars(f.data(), f.data() + f.size(), v);
        if (r.ec != std::errc() || r.ptr != f.data() + f.size() || v > 65535) {
            return std::nullopt;
        }
        return static_cast<uint16_t>(v);
    };
    auto cp = parse_port(fields[1]);
    auto sp = parse_port(fields[3]);
    if (!cp || !sp) return std::nullopt;
    rec.client_port = *cp;
    rec.server_port = *sp;

    rec.request_ts = parse_ts_field(fields[4]);
    rec.response_ts = parse_ts_field(fields[5]);
    if (!rec.request_ts && !fields[4].empty()) return std::nullopt;
    if (!rec.response_ts && !fields[5].empty()) return std::nullopt;

    if (!fields[6].empty()) {
        const std::string& f = fields[6];
        bool neg = !f.empty() && f[0] == '-';
        auto ts = parse_ts_field(neg ? f.substr(1) : f);
        if (!ts) return std::nullopt;
        int64_t mag = static_cast<int64_t>(ts->seconds) * kNanosPerSecond + ts->nanos;
        rec.response_time_ns = neg ? -mag : mag;
    }

    rec.response_message = unescape_field(fields[7]);
    if (!fields[8].empty()) {
        uint32_t code = 0;
        auto r = std::from_chars(fields[8].data(), fields[8].data() + fields[8].size(), code);
        if (r.ec != std::errc() || code > 999) return std::nullopt;
        rec.response_code = static_cast<uint16_t>(code);
    }
    rec.method = unescape_field(fields[9]);
    rec.agent = unescape_field(fields[10]);
    rec.host = unescape_field(fields[11]);
    rec.uri = unrender_uri(unescape_field(fields[12]), rec.host);
    return rec;
}

std::vector<TransactionRecord> dedup_records(std::vector<TransactionRecord> records) {
    std::unordered_set<TransactionKey, TransactionKeyHash> seen;
    seen.reserve(records.size());
    std::vector<TransactionRecord> out;
    out.reserve(records.size());
    for (auto& rec : records) {
        if (seen.insert(record_key(rec)).second) {
            out.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace httptap
