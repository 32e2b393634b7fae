#pragma once

#include <cstdint>

namespace pcap {

// Simulated time. All clocks are global and exact; everything is integer
// microseconds so runs are reproducible and comparisons are never subject
// to floating-point drift.
using TimePoint = std::int64_t;
using Duration = std::int64_t;

constexpr Duration us(std::int64_t v) { return v; }
constexpr Duration ms(std::int64_t v) { return v * 1000; }
constexpr Duration seconds(std::int64_t v) { return v * 1'000'000; }

constexpr double to_ms(Duration d) { return static_cast<double>(d) / 1000.0; }
constexpr Duration from_ms(double v) {
    return static_cast<Duration>(v * 1000.0 + (v >= 0 ? 0.5 : -0.5));
}

} // namespace pcap
