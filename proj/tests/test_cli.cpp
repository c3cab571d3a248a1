#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "httptap/record.hpp"

using namespace httptap;

namespace {

int run_cmd(const std::string& cmd) {
    int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kBin = HTTPTAP_BIN;
const std::string kGen = HTTPTAP_GEN_BIN;

}  // namespace

TEST_CASE("generator and analyzer run end to end") {
    REQUIRE(run_cmd(kGen +
                    " --out /tmp/httptap_cli.pcap --truth /tmp/httptap_cli_truth.csv"
                    " --transactions 300 --flows 10 --seed 101") == 0);

    int rc = run_cmd(kBin +
                     " --input /tmp/httptap_cli.pcap --table-size 4096"
                     " --records /tmp/httptap_cli.records"
                     " --report /tmp/httptap_cli.csv --report-format csv");
    CHECK(rc == 0);

    std::string records = slurp("/tmp/httptap_cli.records");
    REQUIRE_FALSE(records.empty());
    size_t lines = 0;
    std::istringstream stream(records);
    std::string line;
    while (std::getline(stream, line)) {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), '|') == 12);
        CHECK(parse_record_line(line + "\n").has_value());
    }
    CHECK(lines == 300);

    std::string report = slurp("/tmp/httptap_cli.csv");
    CHECK(report.find("summary,matched,300") != std::string::npos);
}

TEST_CASE("a single-transaction trace yields one record line and exit 0") {
    REQUIRE(run_cmd(kGen + " --out /tmp/httptap_cli1tx.pcap --transactions 1"
                    " --flows 1 --seed 63") == 0);
    REQUIRE(run_cmd(kBin + " --input /tmp/httptap_cli1tx.pcap"
                    " --records /tmp/httptap_cli1tx.records") == 0);
    std::string records = slurp("/tmp/httptap_cli1tx.records");
    CHECK(std::count(records.begin(), records.end(), '\n') == 1);
    auto rec = parse_record_line(records);
    REQUIRE(rec.has_value());
    CHECK(rec->matched());
}

TEST_CASE("multiple consumers and text reports work") {
    REQUIRE(run_cmd(kGen + " --out /tmp/httptap_cli2.pcap --transactions 200 --seed 7") ==
            0);
    CHECK(run_cmd(kBin +
                  " --input /tmp/httptap_cli2.pcap --consumers 2"
                  " --report /tmp/httptap_cli2.txt --report-format text") == 0);
    std::string report = slurp("/tmp/httptap_cli2.txt");
    CHECK(report.find("matched: 200") != std::string::npos);
}

TEST_CASE("sorted record output is byte-identical across runs") {
    REQUIRE(run_cmd(kGen +
                    " --out /tmp/httptap_cli3.pcap --transactions 400 --flows 8"
                    " --retransmit-prob 0.05 --seed 11") == 0);
    auto once = [&](const std::string& out) {
        REQUIRE(run_cmd(kBin + " --input /tmp/httptap_cli3.pcap --consumers 2"
                        " --sort-records --records " + out) == 0);
        return slurp(out);
    };
    std::string a = once("/tmp/httptap_cli3_a.records");
    std::string b = once("/tmp/httptap_cli3_b.records");
    CHECK(a == b);
    CHECK_FALSE(a.empty());
}

TEST_CASE("chunked mode accepts multiple files as one stream") {
    REQUIRE(run_cmd(kGen + " --out /tmp/httptap_cli4a.pcap --transactions 100 --seed 21") ==
            0);
    REQUIRE(run_cmd(kGen + " --out /tmp/httptap_cli4b.pcap --transactions 100 --seed 22") ==
            0);
    CHECK(run_cmd(kBin +
                  " --input /tmp/httptap_cli4a.pcap /tmp/httptap_cli4b.pcap"
                  " --chunked --records /tmp/httptap_cli4.records") == 0);
    std::string records = slurp("/tmp/httptap_cli4.records");
    CHECK(std::count(records.begin(), records.end(), '\n') == 200);
}

TEST_CASE("dedup flag filters duplicate records") {
    REQUIRE(run_cmd(kGen +
                    " --out /tmp/httptap_cli5.pcap --transactions 500 --flows 10"
                    " --retransmit-prob 0.1 --seed 31") == 0);
    REQUIRE(run_cmd(kBin + " --input /tmp/httptap_cli5.pcap"
                    " --records /tmp/httptap_cli5_raw.records") == 0);
    REQUIRE(run_cmd(kBin + " --input /tmp/httptap_cli5.pcap --dedup"
                    " --records /tmp/httptap_cli5_dedup.records") == 0);
    std::string raw = slurp("/tmp/httptap_cli5_raw.records");
    std::string dedup = slurp("/tmp/httptap_cli5_dedup.records");
    auto count = [](const std::string& s) {
        return std::count(s.begin(), s.end(), '\n');
    };
    CHECK(count(dedup) == 500);
    CHECK(count(raw) > count(dedup));
}

TEST_CASE("exit codes: 2 for config errors, 1 for IO and format errors") {
    CHECK(run_cmd(kBin) == 2);                                   // missing --input
    CHECK(run_cmd(kBin + " --input /tmp/httptap_cli.pcap --consumers 0") == 2);
    CHECK(run_cmd(kBin + " --input /tmp/httptap_cli.pcap --report-format yaml") == 2);
    CHECK(run_cmd(kBin + " --input /tmp/httptap_does_not_exist.pcap") == 1);

    std::FILE* f = std::fopen("/tmp/httptap_cli_garbage.pcap", "wb");
    std::fputs("garbage data, certainly not a capture.....", f);
    std::fclose(f);
    CHECK(run_cmd(kBin + " --input /tmp/httptap_cli_garbage.pcap") == 1);

    CHECK(run_cmd(kGen + " --retransmit-prob 2.0 --out /tmp/x.pcap") == 2);
}

TEST_CASE("summary shares stay near even with two consumers") {
    REQUIRE(run_cmd(kGen +
                    " --out /tmp/httptap_cli7.pcap --transactions 20000 --flows 500"
                    " --seed 51") == 0);
    int status = std::system((kBin +
                              " --input /tmp/httptap_cli7.pcap --consumers 2"
                              " > /tmp/httptap_cli7.summary 2>/dev/null")
                                 .c_str());
    REQUIRE(WEXITSTATUS(status) == 0);

    std::string summary = slurp("/tmp/httptap_cli7.summary");
    std::istringstream lines(summary);
    std::string line;
    int shares_seen = 0;
    while (std::getline(lines, line)) {
        if (line.find("consumer ") == std::string::npos) continue;
        // both the packet share and the transaction share on the line
        size_t pos = 0;
        int pcts = 0;
        while ((pos = line.find('(', pos)) != std::string::npos) {
            size_t pct = line.find('%', pos);
            REQUIRE(pct != std::string::npos);
            double share = std::stod(line.substr(pos + 1, pct - pos - 1));
            CHECK(share > 49.5);
            CHECK(share < 50.5);
            ++pcts;
            pos = pct + 1;
        }
        CHECK(pcts == 2);
        ++shares_seen;
    }
    CHECK(shares_seen == 2);
    CHECK(summary.find("matched 20000") != std::string::npos);
}

TEST_CASE("gc timeout flag changes eviction behavior") {
    // 100 transactions with a 5 s constant response time: a 2 s timeout
    // evicts every request before its response arrives.
    REQUIRE(run_cmd(kGen +
                    " --out /tmp/httptap_cli6.pcap --transactions 100 --flows 100"
                    " --rt-constant 5.0 --gap-ns 10000000 --seed 41") == 0);
    REQUIRE(run_cmd(kBin + " --input /tmp/httptap_cli6.pcap --gc-timeout 2"
                    " --records /tmp/httptap_cli6_short.records") == 0);
    REQUIRE(run_cmd(kBin + " --input /tmp/httptap_cli6.pcap --gc-timeout 60"
                    " --records /tmp/httptap_cli6_long.records") == 0);

    auto matched_lines = [](const std::string& path) {
        std::ifstream in(path);
        std::string line;
        long matched = 0;
        while (std::getline(in, line)) {
            auto rec = parse_record_line(line + "\n");
            if (rec && rec->matched()) ++matched;
        }
        return matched;
    };
    CHECK(matched_lines("/tmp/httptap_cli6_long.records") == 100);
    CHECK(matched_lines("/tmp/httptap_cli6_short.records") < 100);
}
