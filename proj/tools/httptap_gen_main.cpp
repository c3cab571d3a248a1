// httptap-gen: synthetic HTTP workload generator with exact ground truth.
//
// Writes a classic PCAP (nanosecond timestamps) replaying configurable HTTP
// transactions over persistent TCP flows, plus a CSV listing every true
// transaction, for exercising and validating the analyzer.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "httptap/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"httptap-gen: synthetic HTTP trace generator"};

    httptap::WorkloadSpec spec;
    std::string out_path = "trace.pcap";
    std::string truth_path;
    std::string flow_dist = "uniform";
    std::string rt_dist = "constant";

    app.add_option("--out", out_path, "output PCAP path");
    app.add_option("--truth", truth_path, "ground truth CSV path");
    app.add_option("--transactions", spec.transactions, "number of HTTP transactions");
    app.add_option("--flows", spec.flows, "number of persistent TCP flows")
        ->check(CLI::PositiveNumber);
    app.add_option("--flow-dist", flow_dist, "uniform or zipf")
        ->check(CLI::IsMember({"uniform", "zipf"}));
    app.add_option("--zipf-s", spec.zipf_s, "Zipf exponent");
    app.add_option("--rt-dist", rt_dist, "constant or exp")
        ->check(CLI::IsMember({"constant", "exp"}));
    app.add_option("--rt-constant", spec.rt_constant_s, "constant response time, seconds");
    app.add_option("--rt-lambda", spec.rt_lambda, "exponential rate, 1/seconds");
    app.add_option("--retransmit-prob", spec.retransmit_prob,
                   "probability of duplicating one packet of a transaction");
    app.add_option("--reorder-prob", spec.reorder_prob,
                   "probability of swapping request/response emission order");
    app.add_option("--continue-prob", spec.continue_prob,
                   "probability of a 100-Continue exchange");
    app.add_option("--url-min", spec.url_len_min, "minimum URL length");
    app.add_option("--url-max", spec.url_len_max, "maximum URL length");
    app.add_option("--gap-ns", spec.inter_arrival_ns,
                   "nanoseconds between transaction starts");
    app.add_option("--seed", spec.seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    spec.flow_dist = flow_dist == "zipf" ? httptap::FlowSizeDist::Zipf
                                         : httptap::FlowSizeDist::Uniform;
    spec.rt_dist = rt_dist == "exp" ? httptap::RtDist::Exponential
                                    : httptap::RtDist::Constant;

    try {
        httptap::SynthTrace trace = httptap::generate(spec);
        std::FILE* f = std::fopen(out_path.c_str(), "wb");
        if (f == nullptr) {
            std::fprintf(stderr, "httptap-gen: cannot write %s\n", out_path.c_str());
            return 1;
        }
        std::fwrite(trace.pcap.data(), 1, trace.pcap.size(), f);
        std::fclose(f);
        if (!truth_path.empty()) {
            trace.truth.write_csv(truth_path);
        }
        std::printf("wrote %s: %llu packets, %zu transactions\n", out_path.c_str(),
                    static_cast<unsigned long long>(trace.truth.packet_count),
                    trace.truth.transactions.size());
        return 0;
    } catch (const httptap::SpecInvalid& e) {
        std::fprintf(stderr, "httptap-gen: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "httptap-gen: %s\n", e.what());
        return 1;
    }
}
