#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace ddsim {

// Virtual time axis. One tick is one microsecond; all arithmetic is integral.
using Duration = std::chrono::microseconds;

struct SimClock {
  using rep = std::int64_t;
  using period = std::micro;
  using duration = Duration;
  using time_point = std::chrono::time_point<SimClock, Duration>;
  static constexpr bool is_steady = true;
};

using SimTime = SimClock::time_point;

constexpr SimTime kSimStart{};

constexpr SimTime at_us(std::int64_t us) { return SimTime{Duration{us}}; }
constexpr SimTime at_seconds(std::int64_t s) { return SimTime{std::chrono::seconds{s}}; }
constexpr Duration us(std::int64_t v) { return Duration{v}; }
constexpr Duration secs(std::int64_t s) { return std::chrono::seconds{s}; }
constexpr Duration millis(std::int64_t ms) { return std::chrono::milliseconds{ms}; }

constexpr std::int64_t micros(SimTime t) { return t.time_since_epoch().count(); }
constexpr std::int64_t micros(Duration d) { return d.count(); }

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e6; }
inline double to_seconds(SimTime t) { return to_seconds(t.time_since_epoch()); }

/// Fractional seconds rounded to the nearest microsecond.
Duration from_seconds(double s);

/// Exact decimal rendering with six fractional digits, e.g. "12.000150".
std::string format_seconds(Duration d);
inline std::string format_seconds(SimTime t) { return format_seconds(t.time_since_epoch()); }

/// Shortest exact decimal rendering ("30", "0.5", "2.000001").
std::string format_seconds_compact(Duration d);

}  // namespace ddsim
