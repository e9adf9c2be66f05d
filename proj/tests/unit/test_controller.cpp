#include <catch_amalgamated.hpp>

#include "ddsim/controller.hpp"

using namespace ddsim;

namespace {

DetectionEvent event(AttackClass cls, std::vector<HostAddr> who) {
  DetectionEvent ev;
  ev.attack_class = cls;
  ev.attackers = who;
  for (HostAddr a : who) ev.evidence.emplace_back(a, SourceStats{});
  return ev;
}

}  // namespace

TEST_CASE("repeated detections of the same attacker are idempotent") {
  Simulator sim;
  Switch sw(sim, SwitchConfig{});
  EventLog log;
  Controller c(sw, ControllerConfig{}, &log);
  const HostAddr a = addr_plan::attacker(1, 0, 0);
  CHECK(c.on_detection_event(event(AttackClass::kHttpFlood, {a}), at_seconds(1)).size() == 1);
  CHECK(c.on_detection_event(event(AttackClass::kHttpFlood, {a}), at_seconds(2)).empty());
  const auto set = c.blocked_set(at_seconds(3));
  REQUIRE(set.size() == 1);
  CHECK(set[0].blocked_at == at_seconds(1));
  CHECK(sw.active_rules(at_seconds(3)).size() == 1);
  CHECK(log.count("BLOCK") == 1);
}

TEST_CASE("rules refused by a full table are retried with the next event") {
  Simulator sim;
  SwitchConfig cfg;
  cfg.max_rules = 1;
  Switch sw(sim, cfg);
  EventLog log;
  ControllerConfig cc;
  cc.rule_hard_timeout = secs(5);
  Controller c(sw, cc, &log);
  const HostAddr a = addr_plan::attacker(0, 0, 0);
  const HostAddr b = addr_plan::attacker(0, 0, 1);
  CHECK(c.on_detection_event(event(AttackClass::kSynFlood, {a, b}), at_seconds(1)).size() == 1);
  CHECK(c.failed_installs() == 1);
  CHECK(log.count("BLOCK_FAILED") == 1);
  CHECK_FALSE(c.is_blocked(b));

  // The first rule expires at 6 s; the next event installs the pending one.
  CHECK(c.blocked_set(at_seconds(6)).empty());
  CHECK(log.count("UNBLOCK") == 1);
  const auto applied = c.on_detection_event(event(AttackClass::kSynFlood, {}), at_seconds(6));
  REQUIRE(applied.size() == 1);
  CHECK(applied[0].addr == b);
}
