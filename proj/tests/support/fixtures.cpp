#include "fixtures.hpp"

#include <cmath>

#include <fmt/format.h>

namespace ddsim::testing {

ScenarioConfig shipped(const std::string& stem) {
  return load_scenario(std::string(DDSIM_SCENARIO_DIR) + "/" + stem + ".scn");
}

ScenarioConfig micro_scenario() {
  return parse_scenario(R"(name = micro
seed = 11
duration_s = 10
warmup_s = 1

[benign]
client_count = 3
request_interval_s = 1
bad_network_clients = 1
bad_gap_s = 2

[attack]
kind = syn_flood
start_s = 2
duration_s = 8
rate_pps = 6
source_count = 3

[attack]
kind = http_flood
start_s = 2
duration_s = 8
rate_pps = 3
source_count = 2

[attack]
kind = tls_flood
start_s = 3
duration_s = 7
rate_pps = 3
source_count = 2

[attack]
kind = slow_header
start_s = 2
duration_s = 8
source_count = 2
connections_per_source = 2
slow_interval_s = 2

[attack]
kind = slow_body
start_s = 2
duration_s = 8
source_count = 2
connections_per_source = 2
slow_interval_s = 3
)");
}

std::string compare_stats(const SourceStats& got, const SourceStats& want) {
  auto diff = [](std::string_view name, auto a, auto b) -> std::string {
    return a == b ? std::string() : fmt::format("{}: got {} want {}", name, a, b);
  };
  auto approx = [](std::string_view name, const std::optional<double>& a,
                   const std::optional<double>& b) -> std::string {
    if (a.has_value() != b.has_value()) return fmt::format("{}: presence differs", name);
    if (a && std::abs(*a - *b) > 1e-9 * std::max(1.0, std::abs(*b))) {
      return fmt::format("{}: got {} want {}", name, *a, *b);
    }
    return {};
  };
  for (const std::string& d : {
           diff("syn_count", got.syn_count, want.syn_count),
           diff("ack_count", got.ack_count, want.ack_count),
           diff("data_count", got.data_count, want.data_count),
           diff("half_open_live", got.half_open_live, want.half_open_live),
           diff("requests_heavy", got.requests_heavy, want.requests_heavy),
           diff("renegotiations", got.renegotiations, want.renegotiations),
           diff("bytes", got.bytes, want.bytes),
           diff("incomplete_connections", got.incomplete_connections, want.incomplete_connections),
           diff("incomplete_header", got.incomplete_header, want.incomplete_header),
           diff("incomplete_body", got.incomplete_body, want.incomplete_body),
           diff("gap_samples", got.gap_samples, want.gap_samples),
           approx("gap_mean_s", got.gap_mean_s, want.gap_mean_s),
           approx("gap_cv", got.gap_cv, want.gap_cv),
       }) {
    if (!d.empty()) return d;
  }
  return {};
}

}  // namespace ddsim::testing
