// Capture timestamps with nanosecond resolution.
#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace httptap {

inline constexpr uint32_t kNanosPerSecond = 1'000'000'000u;

// Packet capture timestamp: Unix seconds plus nanoseconds in [0, 1e9).
struct CaptureTimestamp {
    uint64_t seconds = 0;
    uint32_t nanos = 0;

    friend constexpr auto operator<=>(const CaptureTimestamp&,
                                      const CaptureTimestamp&) = default;

    static constexpr CaptureTimestamp from_micros(uint64_t sec, uint32_t micros) {
        return CaptureTimestamp{sec + micros / 1'000'000u,
                                (micros % 1'000'000u) * 1000u};
    }

    static constexpr CaptureTimestamp from_nanos_parts(uint64_t sec, uint32_t ns) {
        return CaptureTimestamp{sec + ns / kNanosPerSecond, ns % kNanosPerSecond};
    }

    constexpr CaptureTimestamp plus_nanos(uint64_t ns) const {
        uint64_t total = nanos + ns % kNanosPerSecond;
        return CaptureTimestamp{seconds + ns / kNanosPerSecond + total / kNanosPerSecond,
                                static_cast<uint32_t>(total % kNanosPerSecond)};
    }
};

// Signed difference a - b in nanoseconds. Exact integer arithmetic; callers
// must keep |a - b| under ~292 years, which holds for any capture clock.
constexpr int64_t diff_nanos(const CaptureTimestamp& a, const CaptureTimestamp& b) {
    int64_t dsec = static_cast<int64_t>(a.seconds) - static_cast<int64_t>(b.seconds);
    int64_t dns = static_cast<int64_t>(a.nanos) - static_cast<int64_t>(b.nanos);
    return dsec * static_cast<int64_t>(kNanosPerSecond) + dns;
}

// True when `last` lies strictly before `now - idle_ns` (idle longer than
// the timeout). Saturates near t=0 instead of wrapping.
constexpr bool idle_longer_than(const CaptureTimestamp& last,
                                const CaptureTimestamp& now, uint64_t idle_ns) {
    CaptureTimestamp deadline = last.plus_nanos(idle_ns);
    return deadline < now;
}

// Renders "<seconds>.<9-digit nanos>", e.g. "1393978285.777375000".
std::string format_timestamp(const CaptureTimestamp& ts);

// Renders a signed nanosecond duration as seconds with 9 decimals,
// e.g. "0.104130000".
std::string format_duration_ns(int64_t ns);

}  // namespace httptap
