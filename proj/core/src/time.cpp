#include "httptap/time.hpp"

#include <cinttypes>
#include <cstdio>

namespace httptap {

std::string format_timestamp(const CaptureTimestamp& ts) {
    char buf[32];
    int n = std::snprintf(buf, sizeof(buf), "%" PRIu64 ".%09u", ts.seconds, ts.nanos);
    return std::string(buf, static_cast<size_t>(n));
}

std::string format_duration_ns(int64_t ns) {
    char buf[40];
    const char* sign = ns < 0 ? "-" : "";
    uint64_t mag = ns < 0 ? static_cast<uint64_t>(-(ns + 1)) + 1 : static_cast<uint64_t>(ns);
    int n = std::snprintf(buf, sizeof(buf), "%s%" PRIu64 ".%09" PRIu64, sign,
                          mag / kNanosPerSecond, mag % kNanosPerSecond);
    return std::string(buf, static_cast<size_t>(n));
}

}  // namespace httptap
