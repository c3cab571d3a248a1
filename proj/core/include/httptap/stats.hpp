// Aggregate QoS statistics over transaction records.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "httptap/record.hpp"

namespace httptap {

class EmptyAccumulator : public std::logic_error {
public:
    EmptyAccumulator() : std::logic_error("no response-time samples") {}
};

class BinningMismatch : public std::invalid_argument {
public:
    BinningMismatch() : std::invalid_argument("accumulators use different binning") {}
};

// Response-time histogram layout: log-spaced bins from 1 us to 1000 s,
// 90 bins per decade, plus one underflow and one overflow bin.
struct RtBinning {
    static constexpr int kBinsPerDecade = 90;
    static constexpr int kDecades = 9;  // 1e-6 s .. 1e3 s
    static constexpr int kBins = kBinsPerDecade * kDecades + 2;
    static constexpr double kLoSeconds = 1e-6;

    // Descriptor echoed in report headers so a mismatch is detectable
    // across builds.
    static std::string descriptor();
    static int bin_index(int64_t rt_ns);
    // Upper edge of a regular bin, in seconds.
    static double bin_upper_edge(int index);
};

struct StatsConfig {
    size_t rt_sample_cap = 10'000'000;

    friend bool operator==(const StatsConfig&, const StatsConfig&) = default;
};

// One point of the complementary cumulative distribution: P(RT > t).
struct CcdfPoint {
    double t = 0;
    double p = 0;

    friend bool operator==(const CcdfPoint&, const CcdfPoint&) = default;
};

enum class ReportFormat : uint8_t { Csv, Text };

// Mergeable aggregate of response times, codes, methods and URL lengths.
// Single-owner per consumer; merge after processing.
class StatsAccumulator {
public:
    StatsAccumulator() = default;
    explicit StatsAccumulator(StatsConfig cfg) : cfg_(cfg) {}

    // Matched records feed every structure; unmatched ones count toward
    // the unmatched counter plus method/URL tallies when the request side
    // is present. Every record's dedup key feeds the duplicate-suspect
    // counter.
    void record_transaction(const TransactionRecord& rec);

    // CCDF points, t ascending, P non-increasing. Computed from exact
    // samples while under the sample cap, from histogram bins afterwards.
    // Throws EmptyAccumulator when no samples exist.
    std::vector<CcdfPoint> ccdf() const;

    // Adds other's counters and bins into this. Commutative and
    // associative with the default-constructed accumulator as identity.
    void merge(const StatsAccumulator& other);

    std::string render_report(ReportFormat format) const;

    uint64_t matched() const { return matched_; }
    uint64_t unmatched() const { return unmatched_; }
    uint64_t duplicate_suspects() const { return duplicate_suspects_; }
    uint64_t rt_total() const { return rt_total_; }
    const std::vector<int64_t>& rt_samples() const { return rt_samples_; }
    const std::map<uint16_t, uint64_t>& code_counts() const { return code_counts_; }
    const std::map<uint32_t, uint64_t>& url_len_counts() const { return url_len_counts_; }
    uint64_t method_count(std::string_view method) const;
    const StatsConfig& config() const { return cfg_; }

private:
    bool samples_exact() const { return rt_total_ == rt_samples_.size(); }

    StatsConfig cfg_;
    std::map<uint16_t, uint64_t> code_counts_;
    std::array<uint64_t, 9> method_counts_{};  // indexed like http_method_tokens()
    std::map<uint32_t, uint64_t> url_len_counts_;
    std::vector<int64_t> rt_samples_;
    std::array<uint64_t, RtBinning::kBins> rt_histogram_{};
    uint64_t rt_total_ = 0;
    uint64_t matched_ = 0;
    uint64_t unmatched_ = 0;
    uint64_t duplicate_suspects_ = 0;
    std::unordered_set<TransactionKey, TransactionKeyHash> seen_keys_;
};

// Evaluates a CCDF step function at t: 1 before the first point, then the
// value of the last point at or before t.
double ccdf_value(const std::vector<CcdfPoint>& points, double t);

}  // namespace httptap
