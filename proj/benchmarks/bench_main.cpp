// Microbenchmarks for the per-packet hot path and the end-to-end pipeline.
//
// The end-to-end numbers are the desk-scale counterpart of throughput
// measurements on real captures: packets/s and bits/s for a single
// consumer over an in-memory trace.

#include <benchmark/benchmark.h>

#include <cstring>
#include <random>
#include <vector>

#include "httptap/hash.hpp"
#include "httptap/pcap.hpp"
#include "httptap/pipeline.hpp"
#include "httptap/synth.hpp"

using namespace httptap;

namespace {

std::vector<uint8_t> sample_request_frame() {
    const char* payload =
        "GET /assets/app.js?v=12345 HTTP/1.1\r\nHost: www.example.test\r\n"
        "User-Agent: bench/1.0\r\nAccept: */*\r\n\r\n";
    return build_ethernet_tcp_frame(0x0A010203u, 40211, 0xC0A80001u, 80, 0x11111111u,
                                    0x22222222u, true,
                                    {reinterpret_cast<const uint8_t*>(payload),
                                     std::strlen(payload)});
}

std::vector<uint8_t> sample_response_frame() {
    const char* payload =
        "HTTP/1.1 200 OK\r\nServer: bench\r\nContent-Length: 512\r\n\r\n";
    return build_ethernet_tcp_frame(0xC0A80001u, 80, 0x0A010203u, 40211, 0x22222222u,
                                    0x11111111u, true,
                                    {reinterpret_cast<const uint8_t*>(payload),
                                     std::strlen(payload)});
}

const SynthTrace& bench_trace() {
    static SynthTrace trace = [] {
        WorkloadSpec spec;
        spec.transactions = 50'000;
        spec.flows = 1000;
        spec.seed = 2024;
        return generate(spec);
    }();
    return trace;
}

void BM_parse_frame(benchmark::State& state) {
    std::vector<uint8_t> frame = sample_request_frame();
    CaptureTimestamp ts{1, 0};
    for (auto _ : state) {
        ParseResult r = parse_frame(frame, ts);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_parse_frame);

void BM_classify_request(benchmark::State& state) {
    std::vector<uint8_t> frame = sample_request_frame();
    ParseResult r = parse_frame(frame, {1, 0});
    const PacketView& pkt = std::get<PacketView>(r);
    for (auto _ : state) {
        auto msg = classify_http(pkt);
        benchmark::DoNotOptimize(msg);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_classify_request);

void BM_classify_response(benchmark::State& state) {
    std::vector<uint8_t> frame = sample_response_frame();
    ParseResult r = parse_frame(frame, {1, 0});
    const PacketView& pkt = std::get<PacketView>(r);
    for (auto _ : state) {
        auto msg = classify_http(pkt);
        benchmark::DoNotOptimize(msg);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_classify_response);

void BM_feeder_hash(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::vector<PacketView> pkts(1024);
    for (PacketView& p : pkts) {
        p.src_ip = static_cast<uint32_t>(rng());
        p.dst_ip = static_cast<uint32_t>(rng());
        p.src_port = static_cast<uint16_t>(rng());
        p.dst_port = static_cast<uint16_t>(rng());
        p.ack = static_cast<uint32_t>(rng());
        p.ack_valid = true;
    }
    size_t i = 0;
    for (auto _ : state) {
        auto h = feeder_hash(pkts[i++ & 1023], HttpKind::Request);
        benchmark::DoNotOptimize(h);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_feeder_hash);

void BM_match_pair(benchmark::State& state) {
    std::vector<uint8_t> req_frame = sample_request_frame();
    std::vector<uint8_t> resp_frame = sample_response_frame();
    ParseResult rr = parse_frame(req_frame, {1, 0});
    ParseResult sr = parse_frame(resp_frame, {1, 1000});
    HttpMessage req = *classify_http(std::get<PacketView>(rr));
    HttpMessage resp = *classify_http(std::get<PacketView>(sr));

    MatchTable table(1 << 16);
    for (auto _ : state) {
        HttpMessage r1 = req;
        HttpMessage r2 = resp;
        benchmark::DoNotOptimize(table.insert(std::move(r1)));
        benchmark::DoNotOptimize(table.insert(std::move(r2)));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 2);
}
BENCHMARK(BM_match_pair);

void BM_pipeline_single_consumer(benchmark::State& state) {
    const SynthTrace& trace = bench_trace();
    uint64_t packets = 0;
    for (auto _ : state) {
        ConsumerState consumer(1 << 16, 0, GcPolicy{}, StatsConfig{}, false);
        std::vector<TransactionRecord> records;
        PcapReader reader(trace.pcap);
        FrameView frame;
        while (reader.next(frame)) {
            ParseResult parsed = parse_frame(frame.bytes, frame.ts);
            const PacketView* pkt = std::get_if<PacketView>(&parsed);
            if (pkt == nullptr) continue;
            auto msg = classify_http(*pkt);
            if (!msg) continue;
            consumer.process(std::move(*msg), records);
            records.clear();
        }
        consumer.finish(records);
        packets += trace.truth.packet_count;
    }
    state.SetItemsProcessed(static_cast<int64_t>(packets));
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(trace.pcap.size()));
}
BENCHMARK(BM_pipeline_single_consumer)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
