// Synthetic HTTP trace generation with exact ground truth, plus the
// brute-force reference matcher used to cross-check the hash-table path.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "httptap/http.hpp"
#include "httptap/packet.hpp"
#include "httptap/record.hpp"

namespace httptap {

class SpecInvalid : public std::invalid_argument {
public:
    explicit SpecInvalid(const std::string& what) : std::invalid_argument(what) {}
};

enum class FlowSizeDist : uint8_t { Uniform, Zipf };
enum class RtDist : uint8_t { Constant, Exponential, Empirical };

// Workload description. Output is a deterministic function of these
// fields (including the seed).
struct WorkloadSpec {
    uint64_t transactions = 1000;
    uint64_t flows = 10;
    FlowSizeDist flow_dist = FlowSizeDist::Uniform;
    double zipf_s = 1.2;

    RtDist rt_dist = RtDist::Constant;
    double rt_constant_s = 0.05;
    double rt_lambda = 10.0;         // Exponential rate, events per second
    std::vector<double> rt_values;   // Empirical pool, seconds

    double retransmit_prob = 0.0;    // duplicate one packet of the transaction
    double reorder_prob = 0.0;       // swap request/response emission order
    double continue_prob = 0.0;      // insert a 100-Continue exchange

    uint32_t url_len_min = 8;
    uint32_t url_len_max = 48;
    uint64_t inter_arrival_ns = 100'000;
    uint64_t start_seconds = 1'400'000'000;
    uint64_t seed = 1;
};

// One logical transaction as the generator created it.
struct TruthTransaction {
    uint32_t client_ip = 0;
    uint16_t client_port = 0;
    uint32_t server_ip = 0;
    uint16_t server_port = 0;
    std::string method;
    std::string uri;
    std::string host;
    std::string agent;
    uint16_t code = 0;
    std::string reason;
    CaptureTimestamp request_ts;
    CaptureTimestamp response_ts;     // final response
    uint32_t match_number = 0;        // request ack = first response seq
    bool retransmitted = false;
    bool reordered = false;
    bool continue_pair = false;
    CaptureTimestamp continue_ts;     // interim 100 timestamp, when continue_pair
    uint32_t final_seq = 0;           // sequence number of the final response
};

struct GroundTruth {
    std::vector<TruthTransaction> transactions;
    uint64_t packet_count = 0;        // frames written to the capture
    uint64_t http_message_count = 0;  // frames that classify as HTTP heads

    void write_csv(const std::string& path) const;
};

struct SynthTrace {
    std::vector<uint8_t> pcap;
    GroundTruth truth;
};

// Builds the capture and its exact ground truth. Packets appear in
// timestamp order except where reorder_prob swapped a pair's emission
// order (timestamps are kept, so those captures are locally non-monotone,
// as multi-queue capture stacks produce).
SynthTrace generate(const WorkloadSpec& spec);

// Streams clean request/response message pairs (noise probabilities are
// ignored) without serializing a capture; used where only header fields
// matter, e.g. balance checks over millions of transactions.
void for_each_transaction(
    const WorkloadSpec& spec,
    const std::function<void(const HttpMessage& req, const HttpMessage& resp,
                             uint64_t tx_index)>& fn);

// Reference matcher: a quadratic scan over pending messages applying the
// reversed-4-tuple + seq==ack condition in insertion order, no hash table.
// Remaining messages drain as unmatched records. Shares the frame parsing
// and classification with the analyzer but none of the matching machinery.
std::vector<TransactionRecord> oracle_match(std::span<const uint8_t> pcap_bytes);

// Assembles an Ethernet II + IPv4 + TCP frame with the given header fields
// and payload (checksums zeroed).
std::vector<uint8_t> build_ethernet_tcp_frame(uint32_t src_ip, uint16_t src_port,
                                              uint32_t dst_ip, uint16_t dst_port,
                                              uint32_t seq, uint32_t ack,
                                              bool ack_flag,
                                              std::span<const uint8_t> payload);

inline std::vector<uint8_t> build_ethernet_tcp_frame(const PacketView& pkt,
                                                     std::span<const uint8_t> payload) {
    return build_ethernet_tcp_frame(pkt.src_ip, pkt.src_port, pkt.dst_ip, pkt.dst_port,
                                    pkt.seq, pkt.ack, pkt.ack_valid, payload);
}

}  // namespace httptap
