#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ddsim/controller.hpp"
#include "ddsim/sentinel.hpp"
#include "ddsim/topology.hpp"
#include "ddsim/traffic.hpp"
#include "ddsim/victim.hpp"

namespace ddsim {

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  Duration duration = secs(120);
  Duration warmup = secs(15);
  bool protection_enabled = true;
  bool observe_only = false;  // analysis runs but the controller stays detached
  ServerConfig server;
  LinkParams link;
  BenignConfig benign;
  ControllerConfig controller;
  std::optional<std::size_t> max_rules;
  SentinelConfig thresholds;
  std::vector<AttackConfig> attacks;

  // Throws ParseError (line 0) naming the violated field.
  void validate() const;
  std::optional<SimTime> first_attack_start() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/**
 * Scenario documents are line-oriented `key = value` pairs. Top-level keys
 * come first; `[server]`, `[link]`, `[benign]`, `[controller]` and
 * `[thresholds]` sections override defaults, and each `[attack]` section adds
 * one attack. `#` starts a comment. Durations are decimal seconds with at
 * most six fractional digits.
 */
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);

// Every field written explicitly; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& cfg);

}  // namespace ddsim
