#include "ddsim/sim_time.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

namespace ddsim {

Duration from_seconds(double s) { return Duration{std::llround(s * 1e6)}; }

std::string format_seconds(Duration d) {
  const std::int64_t v = d.count();
  const std::int64_t a = std::llabs(v);
  return fmt::format("{}{}.{:06d}", v < 0 ? "-" : "", a / 1'000'000, a % 1'000'000);
}

std::string format_seconds_compact(Duration d) {
  std::string s = format_seconds(d);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace ddsim
