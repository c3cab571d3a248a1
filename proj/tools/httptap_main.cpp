// httptap: reassembly-free HTTP transaction analyzer for PCAP captures.
//
// Pairs HTTP requests and responses using only each message's first packet
// and TCP seq/ack arithmetic, emits per-transaction records, and reports
// aggregate QoS statistics.

#include <cinttypes>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "httptap/pcap.hpp"
#include "httptap/pipeline.hpp"

namespace {

void print_summary(const httptap::RunSummary& summary) {
    using std::printf;
    for (const httptap::SourceSummary& src : summary.sources) {
        double pps = src.elapsed_seconds > 0
                         ? static_cast<double>(src.frames) / src.elapsed_seconds
                         : 0;
        double gbps = src.elapsed_seconds > 0
                          ? static_cast<double>(src.wire_bytes) * 8.0 /
                                src.elapsed_seconds / 1e9
                          : 0;
        printf("source %s\n", src.name.c_str());
        printf("  packets %" PRIu64 "  bytes %" PRIu64
               "  http-heads %" PRIu64 "  elapsed %.3f s  (%.0f pkt/s, %.3f Gbit/s)\n",
               src.frames, src.wire_bytes, src.classified_total(),
               src.elapsed_seconds, pps, gbps);
        printf("  skipped: non-ip %" PRIu64 ", non-tcp %" PRIu64 ", fragment %" PRIu64
               ", truncated %" PRIu64 ", non-http %" PRIu64 "\n",
               src.skipped_non_ip, src.skipped_non_tcp, src.skipped_fragment,
               src.skipped_truncated, src.not_http);
        uint64_t dispatched = src.feeder.total_dispatched();
        uint64_t src_matched = 0;
        for (uint64_t m : src.consumer_matched) src_matched += m;
        for (size_t i = 0; i < src.feeder.dispatched.size(); ++i) {
            uint64_t pkts = src.feeder.dispatched[i];
            uint64_t tx = src.consumer_matched[i];
            double pkt_share = dispatched > 0
                                   ? 100.0 * static_cast<double>(pkts) /
                                         static_cast<double>(dispatched)
                                   : 0;
            double tx_share = src_matched > 0
                                  ? 100.0 * static_cast<double>(tx) /
                                        static_cast<double>(src_matched)
                                  : 0;
            printf("  consumer %zu: packets %" PRIu64 " (%.2f%%)  transactions %" PRIu64
                   " (%.2f%%)  drops %" PRIu64 "\n",
                   i, pkts, pkt_share, tx, tx_share, src.feeder.drops[i]);
        }
    }
    printf("total: matched %" PRIu64 "  unmatched %" PRIu64 "  duplicates %" PRIu64
           "  records %" PRIu64 "  pool-drops %" PRIu64 "  queue-drops %" PRIu64 "\n",
           summary.matched, summary.unmatched, summary.stats.duplicate_suspects(),
           summary.records_emitted, summary.pool_dropped, summary.queue_drops);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "httptap: HTTP transaction analysis from PCAP files without TCP "
        "reassembly"};

    httptap::RunConfig cfg;
    double gc_timeout_s = 60.0;
    std::string report_format = "csv";

    app.add_option("--input", cfg.inputs,
                   "PCAP file(s); each is one capture source with its own feeder")
        ->required()
        ->expected(-1);
    app.add_option("--consumers", cfg.consumers_per_source,
                   "analyzer consumers per capture source")
        ->check(CLI::PositiveNumber);
    app.add_option("--table-size", cfg.table_size,
                   "match table cells (rounded up to a power of two)")
        ->check(CLI::PositiveNumber);
    app.add_option("--gc-timeout", gc_timeout_s,
                   "idle seconds of capture time before eviction")
        ->check(CLI::PositiveNumber);
    app.add_option("--records", cfg.records_path,
                   "transaction record output path ('-' for stdout)");
    app.add_option("--report", cfg.report_path, "aggregate report output path");
    app.add_option("--report-format", report_format, "csv or text")
        ->check(CLI::IsMember({"csv", "text"}));
    app.add_flag("--dedup", cfg.dedup,
                 "drop duplicate records (same endpoints and seq/ack key)");
    app.add_flag("--sort-records", cfg.sort_records,
                 "sort records by request timestamp before writing");
    app.add_flag("--chunked", cfg.chunked,
                 "treat all inputs as one logical stream without draining between files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    cfg.gc.idle_timeout_ns =
        static_cast<uint64_t>(gc_timeout_s * static_cast<double>(httptap::kNanosPerSecond));
    cfg.report_format = report_format == "text" ? httptap::ReportFormat::Text
                                                : httptap::ReportFormat::Csv;

    try {
        httptap::RunSummary summary = httptap::run(cfg);
        print_summary(summary);
        return 0;
    } catch (const httptap::ConfigError& e) {
        std::fprintf(stderr, "httptap: config error: %s\n", e.what());
        return 2;
    } catch (const httptap::PcapFormatError& e) {
        std::fprintf(stderr, "httptap: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "httptap: %s\n", e.what());
        return 1;
    }
}
