#include "ddsim/rng.hpp"

#include <cmath>

namespace ddsim {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t scenario_seed, std::string_view label,
                          std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(scenario_seed);
  h = splitmix64(h ^ fnv1a(label));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ (b * 0xd6e8feb86659fd93ULL));
}

double exponential(Rng& rng, double mean) {
  return -mean * std::log1p(-uniform01(rng));
}

}  // namespace ddsim
