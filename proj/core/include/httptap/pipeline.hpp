// End-to-end capture processing: sources -> feeder -> consumers -> output.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "httptap/feeder.hpp"
#include "httptap/match_table.hpp"
#include "httptap/record.hpp"
#include "httptap/stats.hpp"

namespace httptap {

class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct RunConfig {
    std::vector<std::string> inputs;
    uint32_t consumers_per_source = 1;
    size_t table_size = 1u << 20;
    size_t pool_capacity = 0;  // 0 = table_size
    GcPolicy gc;
    std::string records_path;  // empty = discard records, "-" = stdout
    std::string report_path;   // empty = no report file
    ReportFormat report_format = ReportFormat::Csv;
    bool dedup = false;
    bool sort_records = false;
    bool chunked = false;  // all inputs as one logical stream, no drain between
    StatsConfig stats;
    size_t queue_capacity = 65536;
    OverflowPolicy overflow_policy = OverflowPolicy::Block;
};

// Per-source counters; in chunked mode all inputs form one source.
struct SourceSummary {
    std::string name;
    uint64_t frames = 0;
    uint64_t wire_bytes = 0;
    uint64_t skipped_non_ip = 0;
    uint64_t skipped_non_tcp = 0;
    uint64_t skipped_fragment = 0;
    uint64_t skipped_truncated = 0;
    uint64_t not_http = 0;
    uint64_t classified_requests = 0;
    uint64_t classified_responses = 0;
    FeederStats feeder;
    std::vector<uint64_t> consumer_matched;
    std::vector<uint64_t> consumer_unmatched;
    double elapsed_seconds = 0;

    uint64_t classified_total() const {
        return classified_requests + classified_responses;
    }
};

struct RunSummary {
    std::vector<SourceSummary> sources;
    StatsAccumulator stats;
    uint64_t matched = 0;
    uint64_t unmatched = 0;
    uint64_t pool_dropped = 0;
    uint64_t skipped_no_ack = 0;
    uint64_t queue_drops = 0;
    uint64_t records_emitted = 0;  // after optional dedup
    uint64_t records_written = 0;

    uint64_t classified_total() const {
        uint64_t t = 0;
        for (const SourceSummary& s : sources) t += s.classified_total();
        return t;
    }

    // classified = 2*matched + unmatched + drops at every stage.
    bool conservation_holds() const {
        return classified_total() ==
               2 * matched + unmatched + pool_dropped + skipped_no_ack + queue_drops;
    }
};

// Processes every input to completion (drain at end of source), writing
// the record stream and report per the config. Throws ConfigError for bad
// configuration and PcapFormatError for unreadable or malformed captures;
// records already written stay flushed.
RunSummary run(const RunConfig& cfg);

// Single-threaded consumer core: match table + GC scheduling + stats +
// optional dedup of the emitted record stream. The threaded pipeline runs
// one per consumer thread; tests drive it inline.
class ConsumerState {
public:
    ConsumerState(size_t table_size, size_t pool_capacity, GcPolicy gc,
                  StatsConfig stats_cfg, bool dedup);

    // Feeds one message through GC scheduling and the match table,
    // appending any emitted records to `out` (post-dedup).
    void process(HttpMessage&& msg, std::vector<TransactionRecord>& out);

    // End of input: drain everything pending.
    void finish(std::vector<TransactionRecord>& out);

    const MatchTable& table() const { return table_; }
    StatsAccumulator& stats() { return stats_; }
    uint64_t records_emitted() const { return records_emitted_; }

private:
    void emit(TransactionRecord&& rec, std::vector<TransactionRecord>& out);

    MatchTable table_;
    GcPolicy gc_;
    bool dedup_;
    bool saw_any_ = false;
    CaptureTimestamp now_;
    CaptureTimestamp next_sweep_;
    StatsAccumulator stats_;
    std::unordered_set<TransactionKey, TransactionKeyHash> emitted_keys_;
    uint64_t records_emitted_ = 0;
};

}  // namespace httptap
