#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "httptap/match_table.hpp"

using namespace httptap;

namespace {

constexpr uint32_t kClientIp = 123u << 24 | 111u << 16 | 50u << 8 | 23u;
constexpr uint32_t kServerIp = 214u << 24 | 223u << 16 | 22u << 8 | 6u;

HttpMessage request(uint32_t ack, uint64_t ts_sec, uint32_t ts_ns = 0,
                    uint32_t seq = 1000, const std::string& uri = "/icon.gif") {
    HttpMessage msg;
    msg.kind = HttpKind::Request;
    msg.pkt.ts = {ts_sec, ts_ns};
    msg.pkt.src_ip = kClientIp;
    msg.pkt.src_port = 2311;
    msg.pkt.dst_ip = kServerIp;
    msg.pkt.dst_port = 80;
    msg.pkt.seq = seq;
    msg.pkt.ack = ack;
    msg.pkt.ack_valid = true;
    msg.method = "GET";
    msg.uri = uri;
    msg.host = "service.host.com";
    msg.agent = "Mozilla/4.0";
    return msg;
}

HttpMessage response(uint32_t seq, uint64_t ts_sec, uint32_t ts_ns = 0,
                     uint16_t code = 200, const std::string& reason = "OK") {
    HttpMessage msg;
    msg.kind = HttpKind::Response;
    msg.pkt.ts = {ts_sec, ts_ns};
    msg.pkt.src_ip = kServerIp;
    msg.pkt.src_port = 80;
    msg.pkt.dst_ip = kClientIp;
    msg.pkt.dst_port = 2311;
    msg.pkt.seq = seq;
    msg.pkt.ack = 1100;
    msg.pkt.ack_valid = true;
    msg.status_code = code;
    msg.status_message = reason;
    return msg;
}

}  // namespace

TEST_CASE("match condition requires reversed tuple and seq == ack") {
    HttpMessage req = request(0xAAAA, 1);
    CHECK(match_condition(req, response(0xAAAA, 2)));
    CHECK_FALSE(match_condition(req, response(0xAAAB, 2)));

    HttpMessage other = response(0xAAAA, 2);
    other.pkt.src_port = 81;  // same ips, different port
    CHECK_FALSE(match_condition(req, other));
}

TEST_CASE("request then response emits one record with exact response time") {
    MatchTable table(64);
    CHECK_FALSE(table.insert(request(0xAAAA, 1393978285, 777375000)).has_value());
    auto rec = table.insert(response(0xAAAA, 1393978285, 881505000));
    REQUIRE(rec.has_value());
    CHECK(rec->client_ip == kClientIp);
    CHECK(rec->client_port == 2311);
    CHECK(rec->server_ip == kServerIp);
    CHECK(rec->server_port == 80);
    CHECK(rec->response_time_ns == 104130000);
    CHECK(rec->response_code == 200);
    CHECK(rec->response_message == "OK");
    CHECK(rec->method == "GET");
    CHECK(rec->uri == "/icon.gif");
    CHECK(rec->match_number == 0xAAAA);
    CHECK(table.pending() == 0);
    CHECK(table.matched_count() == 1);
}

TEST_CASE("response arriving before its request still pairs") {
    MatchTable table(64);
    CHECK_FALSE(table.insert(response(0xBBBB, 10)).has_value());
    auto rec = table.insert(request(0xBBBB, 9));
    REQUIRE(rec.has_value());
    CHECK(rec->request_ts == CaptureTimestamp{9, 0});
    CHECK(rec->response_ts == CaptureTimestamp{10, 0});
    CHECK(rec->client_ip == kClientIp);  // orientation from the request
}

TEST_CASE("swapping arrival order changes only the emission point") {
    MatchTable a(64);
    MatchTable b(64);
    a.insert(request(0xCCCC, 5));
    auto rec_a = a.insert(response(0xCCCC, 6));
    b.insert(response(0xCCCC, 6));
    auto rec_b = b.insert(request(0xCCCC, 5));
    REQUIRE(rec_a.has_value());
    REQUIRE(rec_b.has_value());
    CHECK(*rec_a == *rec_b);
}

TEST_CASE("retransmitted request leaves a pending duplicate") {
    MatchTable table(64);
    CHECK_FALSE(table.insert(request(0xDDDD, 1)).has_value());
    CHECK_FALSE(table.insert(request(0xDDDD, 2)).has_value());  // duplicate key stored
    auto rec = table.insert(response(0xDDDD, 3));
    REQUIRE(rec.has_value());
    CHECK(rec->request_ts == CaptureTimestamp{1, 0});  // first-inserted wins
    CHECK(table.pending() == 1);

    auto leftovers = table.drain();
    REQUIRE(leftovers.size() == 1);
    CHECK(leftovers[0].request_ts == CaptureTimestamp{2, 0});
    CHECK(leftovers[0].match_number == 0xDDDD);

    std::vector<TransactionRecord> all{*rec, leftovers[0]};
    CHECK(dedup_records(all).size() == 1);
}

TEST_CASE("duplicate responses: first-inserted matches first") {
    MatchTable table(64);
    CHECK_FALSE(table.insert(response(0xEEEE, 10)).has_value());
    CHECK_FALSE(table.insert(response(0xEEEE, 11)).has_value());
    auto rec = table.insert(request(0xEEEE, 9));
    REQUIRE(rec.has_value());
    CHECK(rec->response_ts == CaptureTimestamp{10, 0});
    CHECK(table.pending() == 1);
}

TEST_CASE("100-Continue: interim pairs with the POST, final stays unmatched") {
    // POST head: seq=C, ack=S. Interim 100: seq=S, len L100. Body: opaque.
    // Final: seq=S+L100. Only the interim satisfies seq == request ack.
    const uint32_t S = 50'000;
    const uint32_t L100 = 25;

    MatchTable table(64);
    HttpMessage post = request(S, 1);
    post.method = "POST";
    CHECK_FALSE(table.insert(std::move(post)).has_value());

    auto interim = table.insert(response(S, 2, 0, 100, "Continue"));
    REQUIRE(interim.has_value());
    CHECK(interim->response_code == 100);
    CHECK(interim->method == "POST");
    CHECK(interim->match_number == S);

    auto final_rec = table.insert(response(S + L100, 3, 0, 200, "OK"));
    CHECK_FALSE(final_rec.has_value());  // different seq, no waiting request

    auto leftovers = table.drain();
    REQUIRE(leftovers.size() == 1);
    CHECK(leftovers[0].response_code == 200);
    CHECK(leftovers[0].match_number == S + L100);
    CHECK_FALSE(leftovers[0].request_ts.has_value());
    CHECK(leftovers[0].client_ip == kClientIp);  // reversed from the response
}

TEST_CASE("retransmitted request and response both pair, duplicating the record key") {
    MatchTable table(64);
    CHECK_FALSE(table.insert(request(0xF1F1, 1)).has_value());
    CHECK_FALSE(table.insert(request(0xF1F1, 2)).has_value());  // dup request
    auto first = table.insert(response(0xF1F1, 3));
    REQUIRE(first.has_value());
    CHECK(first->request_ts == CaptureTimestamp{1, 0});
    auto second = table.insert(response(0xF1F1, 4));  // dup response
    REQUIRE(second.has_value());
    CHECK(second->request_ts == CaptureTimestamp{2, 0});
    CHECK(second->response_ts == CaptureTimestamp{4, 0});
    CHECK(record_key(*first) == record_key(*second));
    CHECK(dedup_records({*first, *second}).size() == 1);
    CHECK(table.pending() == 0);
}

TEST_CASE("gc: empty table sweeps to nothing") {
    MatchTable table(64);
    GcPolicy policy;
    CHECK(table.gc_sweep({100, 0}, policy).empty());
}

TEST_CASE("gc evicts after the 60 s idle timeout, not before") {
    GcPolicy policy;  // 60 s default

    MatchTable table(64);
    table.insert(request(0xAB, 0));
    CHECK(table.gc_sweep({59, 0}, policy).empty());
    CHECK(table.pending() == 1);

    // exactly at the timeout boundary the entry is not yet idle-longer-than
    CHECK(table.gc_sweep({60, 0}, policy).empty());

    auto evicted = table.gc_sweep({61, 0}, policy);
    REQUIRE(evicted.size() == 1);
    CHECK(evicted[0].method == "GET");
    CHECK(evicted[0].uri == "/icon.gif");
    CHECK_FALSE(evicted[0].response_ts.has_value());
    CHECK_FALSE(evicted[0].response_code.has_value());
    CHECK(table.pending() == 0);
}

TEST_CASE("gc idleness is per cell: any insertion refreshes it") {
    MatchTable table(1, 8);  // everything collides into one cell
    GcPolicy policy;
    table.insert(request(0x01, 0));
    table.insert(request(0x02, 30));  // refreshes the cell
    CHECK(table.gc_sweep({65, 0}, policy).empty());  // 30+60 > 65
    auto evicted = table.gc_sweep({91, 0}, policy);  // 30+60 < 91
    CHECK(evicted.size() == 2);
}

TEST_CASE("drain flushes all pending messages as unmatched") {
    MatchTable table(64);
    CHECK(table.drain().empty());
    table.insert(request(0x11, 1));
    table.insert(request(0x12, 2));
    table.insert(response(0x7777, 3));
    auto records = table.drain();
    CHECK(records.size() == 3);
    CHECK(table.pending() == 0);
    CHECK(table.unmatched_emitted() == 3);

    // fully matched stream drains to nothing
    MatchTable clean(64);
    clean.insert(request(0x21, 1));
    clean.insert(response(0x21, 2));
    CHECK(clean.drain().empty());
}

TEST_CASE("pool exhaustion drops new messages without touching pending state") {
    MatchTable table(4, 2);
    CHECK_FALSE(table.insert(request(0x01, 1)).has_value());
    CHECK_FALSE(table.insert(request(0x02, 2)).has_value());
    CHECK_FALSE(table.insert(request(0x03, 3)).has_value());  // dropped
    CHECK(table.pool_dropped() == 1);
    CHECK(table.pending() == 2);

    // pending entries still match fine
    auto rec = table.insert(response(0x01, 4));
    REQUIRE(rec.has_value());
    CHECK(rec->match_number == 0x01);

    // the freed slot is reusable
    CHECK_FALSE(table.insert(request(0x04, 5)).has_value());
    CHECK(table.pool_dropped() == 1);
    CHECK(table.pending() == 2);
}

TEST_CASE("request without ACK flag is skipped and counted") {
    MatchTable table(16);
    HttpMessage req = request(0x5555, 1);
    req.pkt.ack_valid = false;
    CHECK_FALSE(table.insert(std::move(req)).has_value());
    CHECK(table.pending() == 0);
    CHECK(table.no_ack_skipped() == 1);
}

TEST_CASE("conservation: classified = 2*matched + unmatched + dropped") {
    std::mt19937_64 rng(43);
    MatchTable table(16, 8);
    uint64_t classified = 0;
    for (int i = 0; i < 500; ++i) {
        uint32_t key = static_cast<uint32_t>(rng() % 40);
        ++classified;
        if (rng() & 1) {
            table.insert(request(key, static_cast<uint64_t>(i)));
        } else {
            table.insert(response(key, static_cast<uint64_t>(i)));
        }
    }
    table.drain();
    CHECK(classified ==
          2 * table.matched_count() + table.unmatched_emitted() +
              table.pool_dropped() + table.no_ack_skipped());
}

TEST_CASE("every pending message recomputes to its stored cell") {
    std::mt19937_64 rng(47);
    MatchTable table(32);
    for (int i = 0; i < 300; ++i) {
        uint32_t key = static_cast<uint32_t>(rng());
        if (rng() & 1) {
            table.insert(request(key, static_cast<uint64_t>(i)));
        } else {
            table.insert(response(key, static_cast<uint64_t>(i)));
        }
    }
    CHECK(table.check_residency());
}
