#include "httptap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "httptap/http.hpp"

namespace httptap {

std::string RtBinning::descriptor() {
    return "rt_bins=1e-6s..1e3s/90";
}

int RtBinning::bin_index(int64_t rt_ns) {
    if (rt_ns < 1000) return 0;  // underflow: below 1 us
    double seconds = static_cast<double>(rt_ns) * 1e-9;
    double pos = std::log10(seconds / kLoSeconds) * kBinsPerDecade;
    int idx = static_cast<int>(pos) + 1;
    if (idx > kBins - 1) idx = kBins - 1;  // overflow: 1000 s and beyond
    return idx;
}

double RtBinning::bin_upper_edge(int index) {
    return kLoSeconds * std::pow(10.0, static_cast<double>(index) / kBinsPerDecade);
}

void StatsAccumulator::record_transaction(const TransactionRecord& rec) {
    if (!seen_keys_.insert(record_key(rec)).second) {
        ++duplicate_suspects_;
    }
    bool request_side = rec.request_ts.has_value();
    if (request_side && !rec.method.empty()) {
        auto tokens = http_method_tokens();
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (tokens[i] == rec.method) {
                ++method_counts_[i];
                break;
            }
        }
        ++url_len_counts_[static_cast<uint32_t>(rec.uri.size())];
    }
    if (!rec.matched()) {
        ++unmatched_;
        return;
    }
    ++matched_;
    if (rec.response_code) ++code_counts_[*rec.response_code];
    int64_t rt = rec.response_time_ns.value_or(0);
    ++rt_histogram_[static_cast<size_t>(RtBinning::bin_index(rt))];
    ++rt_total_;
    if (rt_samples_.size() < cfg_.rt_sample_cap) rt_samples_.push_back(rt);
}

std::vector<CcdfPoint> StatsAccumulator::ccdf() const {
    if (rt_total_ == 0) throw EmptyAccumulator();
    std::vector<CcdfPoint> points;
    if (samples_exact()) {
        std::vector<int64_t> sorted = rt_samples_;
        std::sort(sorted.begin(), sorted.end());
        double n = static_cast<double>(sorted.size());
        size_t i = 0;
        while (i < sorted.size()) {
            size_t j = i;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            points.push_back({static_cast<double>(sorted[i]) * 1e-9,
                              static_cast<double>(sorted.size() - j) / n});
            i = j;
        }
        return points;
    }
    // Histogram route: one point per nonempty bin at its upper edge.
    double n = static_cast<double>(rt_total_);
    uint64_t above = rt_total_;
    for (int b = 0; b < RtBinning::kBins; ++b) {
        uint64_t c = rt_histogram_[static_cast<size_t>(b)];
        if (c == 0) continue;
        above -= c;
        points.push_back({RtBinning::bin_upper_edge(b), static_cast<double>(above) / n});
    }
    return points;
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
    if (cfg_ != other.cfg_) throw BinningMismatch();
    for (auto [code, count] : other.code_counts_) code_counts_[code] += count;
    for (size_t i = 0; i < method_counts_.size(); ++i) {
        method_counts_[i] += other.method_counts_[i];
    }
    for (auto [len, count] : other.url_len_counts_) url_len_counts_[len] += count;
    for (size_t i = 0; i < rt_histogram_.size(); ++i) {
        rt_histogram_[i] += other.rt_histogram_[i];
    }
    for (int64_t s : other.rt_samples_) {
        if (rt_samples_.size() >= cfg_.rt_sample_cap) break;
        rt_samples_.push_back(s);
    }
    rt_total_ += other.rt_total_;
    matched_ += other.matched_;
    unmatched_ += other.unmatched_;
    duplicate_suspects_ += other.duplicate_suspects_;
    seen_keys_.insert(other.seen_keys_.begin(), other.seen_keys_.end());
}

uint64_t StatsAccumulator::method_count(std::string_view method) const {
    auto tokens = http_method_tokens();
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == method) return method_counts_[i];
    }
    return 0;
}

double ccdf_value(const std::vector<CcdfPoint>& points, double t) {
    double p = 1.0;
    for (const CcdfPoint& pt : points) {
        if (pt.t > t) break;
        p = pt.p;
    }
    return p;
}

namespace {

std::string format_seconds(double s) {
    char buf[40];
    int n = std::snprintf(buf, sizeof(buf), "%.9f", s);
    return std::string(buf, static_cast<size_t>(n));
}

}  // namespace

std::string StatsAccumulator::render_report(ReportFormat format) const {
    std::string out;
    auto tokens = http_method_tokens();
    bool have_ccdf = rt_total_ > 0;
    std::vector<CcdfPoint> points;
    if (have_ccdf) points = ccdf();

    if (format == ReportFormat::Csv) {
        out += "# httptap report, " + RtBinning::descriptor() + "\n";
        out += "codes,code,count\n";
        for (auto [code, count] : code_counts_) {
            out += "codes," + std::to_string(code) + "," + std::to_string(count) + "\n";
        }
        out += "methods,method,count\n";
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (method_counts_[i] == 0) continue;
            out += "methods,";
            out += tokens[i];
            out += "," + std::to_string(method_counts_[i]) + "\n";
        }
        out += "ccdf,t_seconds,p\n";
        for (const CcdfPoint& pt : points) {
            out += "ccdf," + format_seconds(pt.t) + "," + format_seconds(pt.p) + "\n";
        }
        out += "urllen,length,count\n";
        for (auto [len, count] : url_len_counts_) {
            out += "urllen," + std::to_string(len) + "," + std::to_string(count) + "\n";
        }
        out += "summary,key,value\n";
        if (matched_ != 0) out += "summary,matched," + std::to_string(matched_) + "\n";
        if (unmatched_ != 0) out += "summary,unmatched," + std::to_string(unmatched_) + "\n";
        if (duplicate_suspects_ != 0) {
            out += "summary,duplicate_suspects," + std::to_string(duplicate_suspects_) + "\n";
        }
        if (matched_ != 0 || unmatched_ != 0) {
            uint64_t unique = matched_ + unmatched_ - duplicate_suspects_;
            out += "summary,records_after_dedup," + std::to_string(unique) + "\n";
        }
        return out;
    }

    out += "httptap report (" + RtBinning::descriptor() + ")\n";
    out += "  matched: " + std::to_string(matched_) + "\n";
    out += "  unmatched: " + std::to_string(unmatched_) + "\n";
    out += "  duplicate suspects: " + std::to_string(duplicate_suspects_) + "\n";
    out += "  response codes:\n";
    for (auto [code, count] : code_counts_) {
        out += "    " + std::to_string(code) + ": " + std::to_string(count) + "\n";
    }
    out += "  methods:\n";
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (method_counts_[i] == 0) continue;
        out += "    ";
        out += tokens[i];
        out += ": " + std::to_string(method_counts_[i]) + "\n";
    }
    if (have_ccdf) {
        static constexpr double kQuantiles[] = {0.5, 0.9, 0.99};
        out += "  response time:\n";
        for (double q : kQuantiles) {
            // Smallest t with P(RT > t) <= 1 - q.
            double target = 1.0 - q;
            double t = points.empty() ? 0.0 : points.back().t;
            for (const CcdfPoint& pt : points) {
                if (pt.p <= target) {
                    t = pt.t;
                    break;
                }
            }
            char line[64];
            std::snprintf(line, sizeof(line), "    p%02d: %.9f s\n",
                          static_cast<int>(q * 100), t);
            out += line;
        }
    }
    uint64_t urls = 0;
    for (auto [len, count] : url_len_counts_) urls += count;
    out += "  urls seen: " + std::to_string(urls) + "\n";
    return out;
}

}  // namespace httptap
