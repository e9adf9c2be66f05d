#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ddsim {

using Rng = std::mt19937_64;

// Seed for an independent stream keyed by (scenario seed, label, a, b).
// Adding a stream never changes the draws of another one.
std::uint64_t stream_seed(std::uint64_t scenario_seed, std::string_view label,
                          std::uint64_t a = 0, std::uint64_t b = 0);

inline Rng make_stream(std::uint64_t scenario_seed, std::string_view label,
                       std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng{stream_seed(scenario_seed, label, a, b)};
}

// Uniform in [0, 1) using the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Exponential with the given mean, by inversion.
double exponential(Rng& rng, double mean);

}  // namespace ddsim
