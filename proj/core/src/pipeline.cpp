#include "httptap/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <memory>
#include <thread>

#include "httptap/pcap.hpp"
#include "httptap/spsc_queue.hpp"

namespace httptap {

ConsumerState::ConsumerState(size_t table_size, size_t pool_capacity, GcPolicy gc,
                             StatsConfig stats_cfg, bool dedup)
    : table_(table_size, pool_capacity), gc_(gc), dedup_(dedup), stats_(stats_cfg) {}

void ConsumerState::emit(TransactionRecord&& rec, std::vector<TransactionRecord>& out) {
    stats_.record_transaction(rec);
    if (dedup_ && !emitted_keys_.insert(record_key(rec)).second) return;
    ++records_emitted_;
    out.push_back(std::move(rec));
}

void ConsumerState::process(HttpMessage&& msg, std::vector<TransactionRecord>& out) {
    CaptureTimestamp ts = msg.pkt.ts;
    if (!saw_any_) {
        saw_any_ = true;
        now_ = ts;
        next_sweep_ = ts.plus_nanos(gc_.sweep_period_ns);
    } else if (now_ < ts) {
        now_ = ts;
    }
    // Sweep before inserting so an arrival after a long gap cannot pair
    // with state the garbage collector already owed an eviction for.
    if (next_sweep_ <= now_) {
        for (TransactionRecord& rec : table_.gc_sweep(now_, gc_)) {
            emit(std::move(rec), out);
        }
        next_sweep_ = now_.plus_nanos(gc_.sweep_period_ns);
    }
    if (std::optional<TransactionRecord> rec = table_.insert(std::move(msg))) {
        emit(std::move(*rec), out);
    }
}

void ConsumerState::finish(std::vector<TransactionRecord>& out) {
    for (TransactionRecord& rec : table_.drain()) {
        emit(std::move(rec), out);
    }
}

namespace {

struct QueueRef {
    SpscQueue<HttpMessage>* q;
    bool try_push(HttpMessage&& m) { return q->try_push(std::move(m)); }
};

// Owns the optional record output file for a whole run.
class RecordWriter {
public:
    RecordWriter(const RunConfig& cfg) : sort_(cfg.sort_records) {
        if (cfg.records_path.empty()) return;
        if (cfg.records_path == "-") {
            file_ = stdout;
            owned_ = false;
        } else {
            file_ = std::fopen(cfg.records_path.c_str(), "wb");
            if (file_ == nullptr) {
                throw PcapFormatError(PcapError::Io,
                                      "cannot write " + cfg.records_path);
            }
            owned_ = true;
        }
    }

    ~RecordWriter() { close(); }

    bool enabled() const { return file_ != nullptr; }

    void write(TransactionRecord&& rec) {
        if (file_ == nullptr) return;
        if (sort_) {
            buffer_.push_back(std::move(rec));
            return;
        }
        std::string line = format_record(rec);
        std::fwrite(line.data(), 1, line.size(), file_);
        ++written_;
    }

    void flush() {
        if (file_ != nullptr) std::fflush(file_);
    }

    // Sorted output is deferred until the end of the run.
    void finalize() {
        if (file_ == nullptr) return;
        if (sort_) {
            std::sort(buffer_.begin(), buffer_.end(), record_less);
            for (const TransactionRecord& rec : buffer_) {
                std::string line = format_record(rec);
                std::fwrite(line.data(), 1, line.size(), file_);
                ++written_;
            }
            buffer_.clear();
        }
        flush();
    }

    uint64_t written() const { return written_; }

private:
    void close() {
        if (file_ != nullptr && owned_) std::fclose(file_);
        file_ = nullptr;
    }

    std::FILE* file_ = nullptr;
    bool owned_ = false;
    bool sort_ = false;
    std::vector<TransactionRecord> buffer_;
    uint64_t written_ = 0;
};

void validate(const RunConfig& cfg) {
    if (cfg.inputs.empty()) throw ConfigError("at least one input is required");
    if (cfg.consumers_per_source < 1) throw ConfigError("consumers must be >= 1");
    if (cfg.table_size < 1) throw ConfigError("table size must be >= 1");
    if (cfg.queue_capacity < 1) throw ConfigError("queue capacity must be >= 1");
    if (cfg.gc.idle_timeout_ns == 0) throw ConfigError("gc timeout must be > 0");
    if (cfg.gc.sweep_period_ns == 0) throw ConfigError("gc sweep period must be > 0");
}

void process_source(const std::vector<std::string>& files, const RunConfig& cfg,
                    RecordWriter& writer, RunSummary& total) {
    const uint32_t n = cfg.consumers_per_source;
    SourceSummary src;
    src.name = files[0];
    for (size_t i = 1; i < files.size(); ++i) src.name += "," + files[i];

    // Open and header-check everything first so a bad path or malformed
    // capture fails before any thread starts.
    std::vector<MappedFile> mapped;
    mapped.reserve(files.size());
    for (const std::string& f : files) {
        mapped.emplace_back(f);
        PcapReader probe(mapped.back().bytes());
    }

    std::vector<std::unique_ptr<SpscQueue<HttpMessage>>> msg_queues;
    std::vector<std::unique_ptr<SpscQueue<TransactionRecord>>> rec_queues;
    for (uint32_t i = 0; i < n; ++i) {
        msg_queues.push_back(std::make_unique<SpscQueue<HttpMessage>>(cfg.queue_capacity));
        rec_queues.push_back(
            std::make_unique<SpscQueue<TransactionRecord>>(cfg.queue_capacity));
    }

    std::atomic<bool> feeder_done{false};
    std::vector<std::unique_ptr<std::atomic<bool>>> consumer_done;
    for (uint32_t i = 0; i < n; ++i) {
        consumer_done.push_back(std::make_unique<std::atomic<bool>>(false));
    }
    std::exception_ptr feeder_error;

    auto started = std::chrono::steady_clock::now();

    std::thread feeder_thread([&] {
      try {
        size_t file_idx = 0;
        std::unique_ptr<PcapReader> reader;
        auto source = [&](HttpMessage& out) -> bool {
            FrameView frame;
            for (;;) {
                if (reader == nullptr) {
                    if (file_idx >= mapped.size()) return false;
                    reader = std::make_unique<PcapReader>(mapped[file_idx].bytes());
                    ++file_idx;
                }
                if (!reader->next(frame)) {
                    reader.reset();
                    continue;
                }
                ++src.frames;
                src.wire_bytes += frame.orig_len;
                ParseResult parsed = parse_frame(frame.bytes, frame.ts);
                if (const SkipReason* why = std::get_if<SkipReason>(&parsed)) {
                    switch (*why) {
                        case SkipReason::NonIp: ++src.skipped_non_ip; break;
                        case SkipReason::NonTcp: ++src.skipped_non_tcp; break;
                        case SkipReason::Fragment: ++src.skipped_fragment; break;
                        case SkipReason::Truncated: ++src.skipped_truncated; break;
                    }
                    continue;
                }
                const PacketView& pkt = std::get<PacketView>(parsed);
                std::optional<HttpMessage> msg = classify_http(pkt);
                if (!msg) {
                    ++src.not_http;
                    continue;
                }
                if (msg->kind == HttpKind::Request) {
                    ++src.classified_requests;
                } else {
                    ++src.classified_responses;
                }
                out = std::move(*msg);
                return true;
            }
        };
        FeederConfig fcfg;
        fcfg.consumers = n;
        fcfg.queue_capacity = cfg.queue_capacity;
        fcfg.overflow_policy = cfg.overflow_policy;
        std::vector<QueueRef> sinks;
        for (auto& q : msg_queues) sinks.push_back(QueueRef{q.get()});
        src.feeder = run_feeder(source, fcfg, sinks);
      } catch (...) {
        feeder_error = std::current_exception();
      }
      feeder_done.store(true, std::memory_order_release);
    });

    std::vector<ConsumerState> consumers;
    consumers.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        consumers.emplace_back(cfg.table_size, cfg.pool_capacity, cfg.gc, cfg.stats,
                               cfg.dedup);
    }

    std::vector<std::thread> consumer_threads;
    for (uint32_t i = 0; i < n; ++i) {
        consumer_threads.emplace_back([&, i] {
            ConsumerState& state = consumers[i];
            SpscQueue<HttpMessage>& in = *msg_queues[i];
            SpscQueue<TransactionRecord>& out_q = *rec_queues[i];
            std::vector<TransactionRecord> emitted;
            auto push_all = [&] {
                for (TransactionRecord& rec : emitted) {
                    while (!out_q.try_push(std::move(rec))) {
                        std::this_thread::yield();
                    }
                }
                emitted.clear();
            };
            HttpMessage msg;
            for (;;) {
                if (in.try_pop(msg)) {
                    state.process(std::move(msg), emitted);
                    if (!emitted.empty()) push_all();
                    continue;
                }
                if (feeder_done.load(std::memory_order_acquire) && in.empty()) break;
                std::this_thread::yield();
            }
            state.finish(emitted);
            push_all();
            consumer_done[i]->store(true, std::memory_order_release);
        });
    }

    // The calling thread pumps records from the consumers to the writer.
    for (;;) {
        bool any = false;
        TransactionRecord rec;
        for (uint32_t i = 0; i < n; ++i) {
            while (rec_queues[i]->try_pop(rec)) {
                total.records_emitted += 1;
                writer.write(std::move(rec));
                any = true;
            }
        }
        if (!any) {
            bool all_done = true;
            for (uint32_t i = 0; i < n; ++i) {
                if (!consumer_done[i]->load(std::memory_order_acquire)) {
                    all_done = false;
                    break;
                }
            }
            if (all_done) {
                bool empty = true;
                for (uint32_t i = 0; i < n; ++i) {
                    if (!rec_queues[i]->empty()) empty = false;
                }
                if (empty) break;
            }
            std::this_thread::yield();
        }
    }

    feeder_thread.join();
    for (std::thread& t : consumer_threads) t.join();
    if (feeder_error) std::rethrow_exception(feeder_error);

    src.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();

    for (uint32_t i = 0; i < n; ++i) {
        src.feeder.transactions_completed.push_back(consumers[i].table().matched_count());
        src.consumer_matched.push_back(consumers[i].table().matched_count());
        src.consumer_unmatched.push_back(consumers[i].table().unmatched_emitted());
        total.matched += consumers[i].table().matched_count();
        total.unmatched += consumers[i].table().unmatched_emitted();
        total.pool_dropped += consumers[i].table().pool_dropped();
        total.stats.merge(consumers[i].stats());
    }
    total.skipped_no_ack += src.feeder.skipped_no_ack;
    total.queue_drops += src.feeder.total_drops();
    writer.flush();
    total.sources.push_back(std::move(src));
}

}  // namespace

RunSummary run(const RunConfig& cfg) {
    validate(cfg);
    RecordWriter writer(cfg);
    RunSummary total;
    total.stats = StatsAccumulator(cfg.stats);

    try {
        if (cfg.chunked) {
            process_source(cfg.inputs, cfg, writer, total);
        } else {
            for (const std::string& input : cfg.inputs) {
                process_source({input}, cfg, writer, total);
            }
        }
    } catch (...) {
        writer.finalize();  // keep whatever was produced before the failure
        throw;
    }

    writer.finalize();
    total.records_written = writer.written();

    if (!cfg.report_path.empty()) {
        std::string report = total.stats.render_report(cfg.report_format);
        std::FILE* f = std::fopen(cfg.report_path.c_str(), "wb");
        if (f == nullptr) {
            throw PcapFormatError(PcapError::Io, "cannot write " + cfg.report_path);
        }
        std::fwrite(report.data(), 1, report.size(), f);
        std::fclose(f);
    }
    return total;
}

}  // namespace httptap
