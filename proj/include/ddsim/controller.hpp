#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ddsim/event_log.hpp"
#include "ddsim/sentinel.hpp"
#include "ddsim/topology.hpp"

namespace ddsim {

struct BlockEntry {
  HostAddr addr{};
  SimTime blocked_at{};
  AttackClass cause_class = AttackClass::kSynFlood;
  SourceStats evidence;

  friend bool operator==(const BlockEntry&, const BlockEntry&) = default;
};

struct ControllerConfig {
  Duration processing_latency = millis(1);
  std::optional<Duration> rule_hard_timeout;

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

/**
 * Controller - turns detection events into source drop rules.
 *
 * No second-guessing: every reported attacker that is not already blocked
 * gets a rule. Rules the switch refuses are retried with the next event.
 */
class Controller {
 public:
  Controller(Switch& sw, ControllerConfig cfg, EventLog* log);

  // Newly applied entries, sorted by address.
  std::vector<BlockEntry> on_detection_event(const DetectionEvent& ev, SimTime now);

  // Current entries sorted by address; entries whose rule expired are dropped.
  std::vector<BlockEntry> blocked_set(SimTime now);
  bool is_blocked(HostAddr addr) const { return entries_.count(addr) != 0; }
  std::size_t failed_installs() const { return failed_installs_; }
  const ControllerConfig& config() const { return cfg_; }

 private:
  struct Pending {
    AttackClass cls;
    SourceStats evidence;
  };

  std::optional<BlockEntry> try_block(HostAddr addr, AttackClass cls, const SourceStats& evidence,
                                      SimTime now);

  Switch& sw_;
  ControllerConfig cfg_;
  EventLog* log_;
  std::map<HostAddr, BlockEntry> entries_;
  std::map<HostAddr, Pending> retry_;
  std::size_t failed_installs_ = 0;
};

}  // namespace ddsim
