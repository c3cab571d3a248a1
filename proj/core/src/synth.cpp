#include "httptap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "httptap/pcap.hpp"

namespace httptap {

namespace {

// SplitMix64: tiny, well-mixed, and identical on every platform, which
// keeps generated traces byte-stable across standard libraries.
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    uint32_t next_u32() { return static_cast<uint32_t>(next() >> 32); }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    uint64_t below(uint64_t n) { return next() % n; }

    bool flip(double prob) { return unit() < prob; }
};

struct CodeChoice {
    uint16_t code;
    const char* reason;
    double weight;
};

constexpr CodeChoice kCodes[] = {
    {200, "OK", 0.80},       {404, "Not Found", 0.08},
    {302, "Found", 0.05},    {500, "Internal Server Error", 0.03},
    {304, "Not Modified", 0.02}, {403, "Forbidden", 0.02},
};

struct MethodChoice {
    const char* token;
    double weight;
};

constexpr MethodChoice kMethodMix[] = {
    {"GET", 0.70}, {"POST", 0.20}, {"HEAD", 0.04},
    {"PUT", 0.03}, {"DELETE", 0.02}, {"OPTIONS", 0.01},
};

struct FlowState {
    uint32_t client_ip = 0;
    uint16_t client_port = 0;
    uint32_t server_ip = 0;
    uint16_t server_port = 80;
    uint32_t client_seq = 0;
    uint32_t server_seq = 0;
    uint64_t avail_ns = 0;  // offset when the flow is free again
    std::string host;
    bool opened = false;
};

struct GenEvent {
    uint64_t sort_ns = 0;   // position key in the capture
    uint64_t seqno = 0;     // creation order, ties broken stably
    CaptureTimestamp ts;    // packet timestamp (kept under reordering)
    uint32_t src_ip = 0, dst_ip = 0;
    uint16_t src_port = 0, dst_port = 0;
    uint32_t seq = 0, ack = 0;
    std::string payload;
    bool is_http_head = false;
};

void validate(const WorkloadSpec& spec) {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(spec.retransmit_prob) || !prob_ok(spec.reorder_prob) ||
        !prob_ok(spec.continue_prob)) {
        throw SpecInvalid("probabilities must lie in [0,1]");
    }
    if (spec.flows == 0) throw SpecInvalid("flows must be >= 1");
    if (spec.url_len_min == 0 || spec.url_len_min > spec.url_len_max) {
        throw SpecInvalid("bad url length bounds");
    }
    if (spec.url_len_max > 3000) throw SpecInvalid("url_len_max over 3000");
    if (spec.inter_arrival_ns == 0) throw SpecInvalid("inter_arrival_ns must be > 0");
    if (spec.rt_dist == RtDist::Constant && spec.rt_constant_s < 0) {
        throw SpecInvalid("negative constant response time");
    }
    if (spec.rt_dist == RtDist::Exponential && spec.rt_lambda <= 0) {
        throw SpecInvalid("rt_lambda must be > 0");
    }
    if (spec.rt_dist == RtDist::Empirical && spec.rt_values.empty()) {
        throw SpecInvalid("empirical rt pool is empty");
    }
}

// Shared flow/timing/content machinery behind generate() and
// for_each_transaction().
class Generator {
public:
    explicit Generator(const WorkloadSpec& spec) : spec_(spec), rng_(spec.seed) {
        validate(spec);
        flows_.resize(spec.flows);
        if (spec.flow_dist == FlowSizeDist::Zipf) {
            zipf_cum_.reserve(spec.flows);
            double total = 0;
            for (uint64_t k = 1; k <= spec.flows; ++k) {
                total += 1.0 / std::pow(static_cast<double>(k), spec.zipf_s);
                zipf_cum_.push_back(total);
            }
        }
    }

    uint64_t pick_flow() {
        if (spec_.flow_dist == FlowSizeDist::Uniform) return rng_.below(spec_.flows);
        double u = rng_.unit() * zipf_cum_.back();
        auto it = std::lower_bound(zipf_cum_.begin(), zipf_cum_.end(), u);
        return static_cast<uint64_t>(it - zipf_cum_.begin());
    }

    FlowState& open_flow(uint64_t f) {
        FlowState& flow = flows_[f];
        if (!flow.opened) {
            flow.client_ip = 0x0A000000u | (static_cast<uint32_t>(f + 1) & 0x00FFFFFFu);
            flow.client_port = static_cast<uint16_t>(1024 + rng_.below(60000));
            flow.server_ip = 0xAC100000u | static_cast<uint32_t>(rng_.below(4096));
            flow.server_port = 80;
            flow.client_seq = rng_.next_u32();
            flow.server_seq = rng_.next_u32();
            flow.host = "h" + std::to_string(f) + ".example.test";
            flow.opened = true;
        }
        return flow;
    }

    uint64_t sample_rt_ns() {
        switch (spec_.rt_dist) {
            case RtDist::Constant:
                return static_cast<uint64_t>(std::llround(spec_.rt_constant_s * 1e9));
            case RtDist::Exponential: {
                double u = rng_.unit();
                double rt = -std::log(1.0 - u) / spec_.rt_lambda;
                return static_cast<uint64_t>(std::llround(rt * 1e9));
            }
            case RtDist::Empirical: {
                double rt = spec_.rt_values[rng_.below(spec_.rt_values.size())];
                return static_cast<uint64_t>(std::llround(rt * 1e9));
            }
        }
        return 0;
    }

    const MethodChoice& pick_method() {
        double u = rng_.unit();
        double acc = 0;
        for (const MethodChoice& m : kMethodMix) {
            acc += m.weight;
            if (u < acc) return m;
        }
        return kMethodMix[0];
    }

    const CodeChoice& pick_code() {
        double u = rng_.unit();
        double acc = 0;
        for (const CodeChoice& c : kCodes) {
            acc += c.weight;
            if (u < acc) return c;
        }
        return kCodes[0];
    }

    std::string make_uri(uint64_t tx) {
        uint32_t len = spec_.url_len_min;
        if (spec_.url_len_max > spec_.url_len_min) {
            len += static_cast<uint32_t>(
                rng_.below(spec_.url_len_max - spec_.url_len_min + 1));
        }
        std::string uri = "/r" + std::to_string(tx);
        if (uri.size() < len) uri.append(len - uri.size(), 'a');
        if (uri.size() > len) uri.resize(len);
        if (uri.empty() || uri[0] != '/') uri.insert(uri.begin(), '/');
        return uri;
    }

    CaptureTimestamp at(uint64_t offset_ns) const {
        return CaptureTimestamp{spec_.start_seconds, 0}.plus_nanos(offset_ns);
    }

    const WorkloadSpec& spec_;
    Rng rng_;
    std::vector<FlowState> flows_;
    std::vector<double> zipf_cum_;
    uint64_t clock_ns_ = 0;
};

std::string request_head(const std::string& method, const std::string& uri,
                         const std::string& host, const std::string& agent,
                         bool expect_continue) {
    std::string head;
    head.reserve(128 + uri.size());
    head += method;
    head += ' ';
    head += uri;
    head += " HTTP/1.1\r\nHost: ";
    head += host;
    head += "\r\nUser-Agent: ";
    head += agent;
    head += "\r\nAccept: */*\r\n";
    if (expect_continue) head += "Expect: 100-continue\r\n";
    head += "\r\n";
    return head;
}

std::string response_head(uint16_t code, const std::string& reason, size_t body_len) {
    std::string head;
    head.reserve(96 + body_len);
    head += "HTTP/1.1 ";
    head += std::to_string(code);
    head += ' ';
    head += reason;
    head += "\r\nServer: tap/1\r\nContent-Length: ";
    head += std::to_string(body_len);
    head += "\r\n\r\n";
    head.append(body_len, 'b');
    return head;
}

constexpr const char* kAgent = "tapgen/1.0";

}  // namespace

std::vector<uint8_t> build_ethernet_tcp_frame(uint32_t src_ip, uint16_t src_port,
                                              uint32_t dst_ip, uint16_t dst_port,
                                              uint32_t seq, uint32_t ack, bool ack_flag,
                                              std::span<const uint8_t> payload) {
    std::vector<uint8_t> frame;
    frame.reserve(54 + payload.size());

    auto put8 = [&frame](uint8_t v) { frame.push_back(v); };
    auto put16 = [&frame](uint16_t v) {
        frame.push_back(static_cast<uint8_t>(v >> 8));
        frame.push_back(static_cast<uint8_t>(v));
    };
    auto put32 = [&frame](uint32_t v) {
        frame.push_back(static_cast<uint8_t>(v >> 24));
        frame.push_back(static_cast<uint8_t>(v >> 16));
        frame.push_back(static_cast<uint8_t>(v >> 8));
        frame.push_back(static_cast<uint8_t>(v));
    };

    // Ethernet II
    for (int i = 0; i < 6; ++i) put8(0x02);
    for (int i = 0; i < 6; ++i) put8(0x04);
    put16(0x0800);

    // IPv4, 20-byte header
    uint16_t ip_total = static_cast<uint16_t>(20 + 20 + payload.size());
    put8(0x45);
    put8(0);
    put16(ip_total);
    put16(0);        // id
    put16(0x4000);   // DF, offset 0
    put8(64);        // TTL
    put8(6);         // TCP
    put16(0);        // checksum (unchecked)
    put32(src_ip);
    put32(dst_ip);

    // TCP, 20-byte header
    put16(src_port);
    put16(dst_port);
    put32(seq);
    put32(ack);
    put8(0x50);  // data offset 5
    put8(static_cast<uint8_t>((ack_flag ? 0x10 : 0) | (payload.empty() ? 0 : 0x08)));
    put16(65535);  // window
    put16(0);      // checksum (unchecked)
    put16(0);      // urgent

    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

SynthTrace generate(const WorkloadSpec& spec) {
    Generator gen(spec);
    SynthTrace out;
    out.truth.transactions.reserve(spec.transactions);

    std::vector<GenEvent> events;
    events.reserve(spec.transactions * 2 + 16);
    uint64_t seqno = 0;

    auto add_event = [&](uint64_t sort_ns, const CaptureTimestamp& ts, const FlowState& f,
                         bool from_client, uint32_t seq, uint32_t ack,
                         std::string payload, bool is_head) -> size_t {
        GenEvent ev;
        ev.sort_ns = sort_ns;
        ev.seqno = seqno++;
        ev.ts = ts;
        if (from_client) {
            ev.src_ip = f.client_ip; ev.src_port = f.client_port;
            ev.dst_ip = f.server_ip; ev.dst_port = f.server_port;
        } else {
            ev.src_ip = f.server_ip; ev.src_port = f.server_port;
            ev.dst_ip = f.client_ip; ev.dst_port = f.client_port;
        }
        ev.seq = seq;
        ev.ack = ack;
        ev.payload = std::move(payload);
        ev.is_http_head = is_head;
        events.push_back(std::move(ev));
        return events.size() - 1;
    };

    for (uint64_t tx = 0; tx < spec.transactions; ++tx) {
        uint64_t f = gen.pick_flow();
        FlowState& flow = gen.open_flow(f);

        uint64_t base_ns = std::max(gen.clock_ns_, flow.avail_ns);
        gen.clock_ns_ += spec.inter_arrival_ns;

        bool want_continue = gen.rng_.flip(spec.continue_prob);
        bool want_retrans = gen.rng_.flip(spec.retransmit_prob);
        bool reorder_draw = gen.rng_.flip(spec.reorder_prob);
        // Reordering fires only for plain request/response pairs.
        bool want_reorder = reorder_draw && !want_continue && !want_retrans;

        const MethodChoice& method = gen.pick_method();
        const CodeChoice& code = gen.pick_code();
        std::string method_token = want_continue ? "POST" : method.token;
        std::string uri = gen.make_uri(tx);
        uint64_t rt_ns = gen.sample_rt_ns();

        TruthTransaction truth;
        truth.client_ip = flow.client_ip;
        truth.client_port = flow.client_port;
        truth.server_ip = flow.server_ip;
        truth.server_port = flow.server_port;
        truth.method = method_token;
        truth.uri = uri;
        truth.host = flow.host;
        truth.agent = kAgent;
        truth.code = code.code;
        truth.reason = code.reason;
        truth.request_ts = gen.at(base_ns);
        truth.match_number = flow.server_seq;
        truth.retransmitted = want_retrans;
        truth.reordered = want_reorder;
        truth.continue_pair = want_continue;

        std::string req_payload =
            request_head(method_token, uri, flow.host, kAgent, want_continue);
        uint32_t req_len = static_cast<uint32_t>(req_payload.size());
        uint32_t req_seq = flow.client_seq;
        uint32_t req_ack = flow.server_seq;

        size_t req_idx = add_event(base_ns, gen.at(base_ns), flow, true, req_seq,
                                   req_ack, std::move(req_payload), true);

        size_t first_resp_idx;
        uint64_t done_ns;
        if (want_continue) {
            // POST head, interim 100, opaque body, then the final status.
            uint64_t t100 = base_ns + std::max<uint64_t>(rt_ns / 3, 1);
            uint64_t tbody = base_ns + std::max<uint64_t>(rt_ns / 2, 2);
            uint64_t tfinal = base_ns + std::max<uint64_t>(rt_ns, 3);

            std::string p100 = response_head(100, "Continue", 0);
            uint32_t len100 = static_cast<uint32_t>(p100.size());
            first_resp_idx = add_event(t100, gen.at(t100), flow, false, flow.server_seq,
                                       req_seq + req_len, std::move(p100), true);

            uint32_t body_len = static_cast<uint32_t>(50 + gen.rng_.below(450));
            std::string body(body_len, 'x');
            add_event(tbody, gen.at(tbody), flow, true, req_seq + req_len,
                      flow.server_seq + len100, std::move(body), false);

            std::string pfinal = response_head(code.code, code.reason,
                                               static_cast<size_t>(gen.rng_.below(200)));
            truth.final_seq = flow.server_seq + len100;
            truth.continue_ts = gen.at(t100);
            truth.response_ts = gen.at(tfinal);
            add_event(tfinal, gen.at(tfinal), flow, false, flow.server_seq + len100,
                      req_seq + req_len + body_len,
                      std::move(pfinal), true);

            uint32_t final_len = static_cast<uint32_t>(events.back().payload.size());
            flow.client_seq = req_seq + req_len + body_len;
            flow.server_seq = flow.server_seq + len100 + final_len;
            done_ns = tfinal;
        } else {
            uint64_t tresp = base_ns + std::max<uint64_t>(rt_ns, 1);
            std::string presp = response_head(code.code, code.reason,
                                              static_cast<size_t>(gen.rng_.below(200)));
            uint32_t resp_len = static_cast<uint32_t>(presp.size());
            truth.final_seq = flow.server_seq;
            truth.response_ts = gen.at(tresp);
            first_resp_idx = add_event(tresp, gen.at(tresp), flow, false, flow.server_seq,
                                       req_seq + req_len, std::move(presp), true);
            flow.client_seq = req_seq + req_len;
            flow.server_seq = flow.server_seq + resp_len;
            done_ns = tresp;
        }

        if (want_retrans) {
            // Duplicate one of the transaction's HTTP packets a bit later.
            size_t dup_from = gen.rng_.flip(0.5) ? req_idx : first_resp_idx;
            uint64_t delta = 1'000'000 + gen.rng_.below(19'000'000);  // 1..20 ms
            GenEvent dup = events[dup_from];
            dup.sort_ns = events[dup_from].sort_ns + delta;
            dup.ts = gen.at(dup.sort_ns);
            dup.seqno = seqno++;
            done_ns = std::max(done_ns, dup.sort_ns);
            events.push_back(std::move(dup));
        }

        if (want_reorder) {
            std::swap(events[req_idx].sort_ns, events[first_resp_idx].sort_ns);
        }

        flow.avail_ns = done_ns + spec.inter_arrival_ns;
        out.truth.transactions.push_back(std::move(truth));
    }

    std::stable_sort(events.begin(), events.end(),
                     [](const GenEvent& a, const GenEvent& b) {
                         if (a.sort_ns != b.sort_ns) return a.sort_ns < b.sort_ns;
                         return a.seqno < b.seqno;
                     });

    PcapWriter writer;
    for (const GenEvent& ev : events) {
        std::span<const uint8_t> payload(
            reinterpret_cast<const uint8_t*>(ev.payload.data()), ev.payload.size());
        std::vector<uint8_t> frame = build_ethernet_tcp_frame(
            ev.src_ip, ev.src_port, ev.dst_ip, ev.dst_port, ev.seq, ev.ack, true,
            payload);
        writer.add_frame(ev.ts, frame);
        ++out.truth.packet_count;
        if (ev.is_http_head) ++out.truth.http_message_count;
    }
    out.pcap = writer.take();
    return out;
}

void for_each_transaction(
    const WorkloadSpec& spec,
    const std::function<void(const HttpMessage&, const HttpMessage&, uint64_t)>& fn) {
    Generator gen(spec);

    for (uint64_t tx = 0; tx < spec.transactions; ++tx) {
        uint64_t f = gen.pick_flow();
        FlowState& flow = gen.open_flow(f);

        uint64_t base_ns = std::max(gen.clock_ns_, flow.avail_ns);
        gen.clock_ns_ += spec.inter_arrival_ns;

        const MethodChoice& method = gen.pick_method();
        const CodeChoice& code = gen.pick_code();
        std::string uri = gen.make_uri(tx);
        uint64_t rt_ns = gen.sample_rt_ns();
        uint64_t tresp = base_ns + std::max<uint64_t>(rt_ns, 1);

        uint32_t req_len = static_cast<uint32_t>(
            request_head(method.token, uri, flow.host, kAgent, false).size());
        uint32_t resp_len = static_cast<uint32_t>(
            response_head(code.code, code.reason, 0).size());

        HttpMessage req;
        req.kind = HttpKind::Request;
        req.pkt.ts = gen.at(base_ns);
        req.pkt.src_ip = flow.client_ip;
        req.pkt.src_port = flow.client_port;
        req.pkt.dst_ip = flow.server_ip;
        req.pkt.dst_port = flow.server_port;
        req.pkt.seq = flow.client_seq;
        req.pkt.ack = flow.server_seq;
        req.pkt.ack_valid = true;
        req.method = method.token;
        req.uri = uri;
        req.host = flow.host;
        req.agent = kAgent;

        HttpMessage resp;
        resp.kind = HttpKind::Response;
        resp.pkt.ts = gen.at(tresp);
        resp.pkt.src_ip = flow.server_ip;
        resp.pkt.src_port = flow.server_port;
        resp.pkt.dst_ip = flow.client_ip;
        resp.pkt.dst_port = flow.client_port;
        resp.pkt.seq = flow.server_seq;
        resp.pkt.ack = flow.client_seq + req_len;
        resp.pkt.ack_valid = true;
        resp.status_code = code.code;
        resp.status_message = code.reason;

        flow.client_seq += req_len;
        flow.server_seq += resp_len;
        flow.avail_ns = tresp + spec.inter_arrival_ns;

        fn(req, resp, tx);
    }
}

std::vector<TransactionRecord> oracle_match(std::span<const uint8_t> pcap_bytes) {
    PcapReader reader(pcap_bytes);
    std::vector<HttpMessage> pending;
    std::vector<TransactionRecord> out;

    auto build_matched = [](const HttpMessage& req, const HttpMessage& resp) {
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
    };
    auto build_unmatched = [](const HttpMessage& m) {
        TransactionRecord rec;
        if (m.kind == HttpKind::Request) {
            rec.client_ip = m.pkt.src_ip;
            rec.client_port = m.pkt.src_port;
            rec.server_ip = m.pkt.dst_ip;
            rec.server_port = m.pkt.dst_port;
            rec.request_ts = m.pkt.ts;
            rec.method = m.method;
            rec.agent = m.agent;
            rec.host = m.host;
            rec.uri = m.uri;
            rec.match_number = m.pkt.ack;
        } else {
            rec.client_ip = m.pkt.dst_ip;
            rec.client_port = m.pkt.dst_port;
            rec.server_ip = m.pkt.src_ip;
            rec.server_port = m.pkt.src_port;
            rec.response_ts = m.pkt.ts;
            rec.response_message = m.status_message;
            rec.response_code = m.status_code;
            rec.match_number = m.pkt.seq;
        }
        return rec;
    };

    auto pairs = [](const HttpMessage& req, const HttpMessage& resp) {
        return req.pkt.src_ip == resp.pkt.dst_ip && req.pkt.src_port == resp.pkt.dst_port &&
               req.pkt.dst_ip == resp.pkt.src_ip && req.pkt.dst_port == resp.pkt.src_port &&
               resp.pkt.seq == req.pkt.ack;
    };

    FrameView frame;
    while (reader.next(frame)) {
        ParseResult parsed = parse_frame(frame.bytes, frame.ts);
        const PacketView* pkt = std::get_if<PacketView>(&parsed);
        if (pkt == nullptr) continue;
        std::optional<HttpMessage> msg = classify_http(*pkt);
        if (!msg) continue;
        if (msg->kind == HttpKind::Request && !msg->pkt.ack_valid) continue;

        bool matched = false;
        for (size_t i = 0; i < pending.size(); ++i) {
            const HttpMessage& other = pending[i];
            if (other.kind == msg->kind) continue;
            const HttpMessage& req = msg->kind == HttpKind::Request ? *msg : other;
            const HttpMessage& resp = msg->kind == HttpKind::Request ? other : *msg;
            if (pairs(req, resp)) {
                out.push_back(build_matched(req, resp));
                pending.erase(pending.begin() + static_cast<ptrdiff_t>(i));
                matched = true;
                break;
            }
        }
        if (!matched) pending.push_back(std::move(*msg));
    }
    for (const HttpMessage& m : pending) {
        out.push_back(build_unmatched(m));
    }
    return out;
}

void GroundTruth::write_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (f == nullptr) throw std::runtime_error("cannot write " + path);
    std::fputs(
        "client_ip,client_port,server_ip,server_port,request_ts,response_ts,"
        "response_time,response_message,response_code,method,agent,host,uri,"
        "match_number,flags\n",
        f);
    for (const TruthTransaction& t : transactions) {
        std::string flags;
        if (t.retransmitted) flags += "retransmitted;";
        if (t.reordered) flags += "reordered;";
        if (t.continue_pair) flags += "continue;";
        std::fprintf(f, "%s,%u,%s,%u,%s,%s,%s,%s,%u,%s,%s,%s,%s,%u,%s\n",
                     format_ipv4(t.client_ip).c_str(), t.client_port,
                     format_ipv4(t.server_ip).c_str(), t.server_port,
                     format_timestamp(t.request_ts).c_str(),
                     format_timestamp(t.response_ts).c_str(),
                     format_duration_ns(diff_nanos(t.response_ts, t.request_ts)).c_str(),
                     t.reason.c_str(), t.code, t.method.c_str(), t.agent.c_str(),
                     t.host.c_str(), t.uri.c_str(), t.match_number, flags.c_str());
    }
    std::fclose(f);
}

}  // namespace httptap
