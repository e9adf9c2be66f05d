#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddsim/controller.hpp"
#include "ddsim/event_log.hpp"
#include "ddsim/scenario.hpp"
#include "ddsim/sentinel.hpp"
#include "ddsim/topology.hpp"
#include "ddsim/traffic.hpp"
#include "ddsim/victim.hpp"

namespace ddsim {

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sample {
  std::int64_t time_s = 0;
  std::optional<double> probe_rtt_ms;
  std::string probe_status = "none";  // ok | timeout | refused | none
  double cpu_util = 0.0;
  std::uint32_t occupancy = 0;
  double benign_success_rate = 1.0;
  std::size_t blocked_count = 0;
  std::uint64_t packet_rate_pps = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Summary {
  std::optional<double> attack_start_s;
  std::optional<double> time_to_detection_s;
  std::optional<double> time_to_mitigation_s;
  std::optional<double> benign_success_before;
  std::optional<double> benign_success_during;
  std::optional<double> benign_success_after;
  std::uint32_t peak_occupancy = 0;
  double peak_cpu = 0.0;
  std::optional<double> first_table_full_s;
  std::size_t detections = 0;
  std::size_t blocks = 0;
  std::optional<std::string> first_detection_class;

  friend bool operator==(const Summary&, const Summary&) = default;
};

struct RunOptions {
  bool record_deliveries = false;
  bool record_tap = false;
  Sentinel::WindowObserver window_observer;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  bool protection_enabled = false;
  std::vector<Sample> samples;
  EventLog events;
  Summary summary;

  // Raw material for checks and tests.
  std::vector<DetectionEvent> detections;
  std::vector<BlockEntry> blocks;
  std::vector<ProbeResult> probes;
  std::vector<BenignOutcome> benign_outcomes;
  std::vector<HostAddr> bad_network_clients;
  std::vector<HostAddr> benign_clients;
  std::vector<std::vector<HostAddr>> attack_sources;  // per configured attack
  std::vector<DeliveryRecord> deliveries;
  std::vector<TapRecord> tap;
  VictimCounters victim;
  SwitchCounters network;
};

// Throws InvariantViolation (with a state dump) on internal inconsistency.
RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

Summary summarize(const std::vector<Sample>& samples, const EventLog& events, const ScenarioConfig& cfg,
                  std::optional<SimTime> first_table_full);

}  // namespace ddsim
