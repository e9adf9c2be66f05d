#include <catch_amalgamated.hpp>

#include "ddsim/topology.hpp"

using namespace ddsim;

namespace {

PacketEvent pkt(Simulator& sim, HostAddr src, HostAddr dst, Payload p = {}) {
  const PacketKind kind = std::holds_alternative<std::monostate>(p) ? PacketKind::kSyn : PacketKind::kData;
  return make_packet(sim.now(), src, 1000, dst, kHttpPort, kind, p);
}

// Independent serialization oracle: whole microseconds, rounded up.
std::int64_t ser_us(std::uint64_t bytes, std::uint64_t bps) {
  const std::uint64_t num = bytes * 8 * 1'000'000;
  return static_cast<std::int64_t>(num / bps + (num % bps != 0));
}

}  // namespace

TEST_CASE("serialization delay rounds up to whole microseconds") {
  LinkParams l;
  for (std::uint32_t b : {40u, 64u, 340u, 560u, 1500u}) CHECK(l.serialization(b).count() == ser_us(b, l.bandwidth_bps));
  l.bandwidth_bps = 1'000'000;
  CHECK(l.serialization(1500) == us(12'000));
  CHECK(l.serialization(1) == us(8));
}

TEST_CASE("a port is a FIFO link") {
  Simulator sim;
  SwitchConfig cfg;
  cfg.link.bandwidth_bps = 1'000'000;
  cfg.link.propagation_us = 100;
  Switch sw(sim, cfg);
  std::vector<std::pair<SimTime, std::uint32_t>> got;
  sw.attach(addr_plan::kVictim, [&](const PacketEvent& p) { got.emplace_back(sim.now(), p.size_bytes); });
  sw.attach(addr_plan::benign(0), [](const PacketEvent&) {});
  sim.schedule(at_us(0), Target::kTest, [&] {
    sw.forward(pkt(sim, addr_plan::benign(0), addr_plan::kVictim, HttpGet{}));
    sw.forward(pkt(sim, addr_plan::benign(0), addr_plan::kVictim));
  });
  sim.run_until(at_seconds(1));
  REQUIRE(got.size() == 2);
  const auto first = ser_us(340, cfg.link.bandwidth_bps);
  CHECK(got[0] == std::pair{at_us(first + 100), 340u});
  CHECK(got[1] == std::pair{at_us(first + ser_us(40, cfg.link.bandwidth_bps) + 100), 40u});
}

TEST_CASE("drop rules apply at ingress and to packets already queued") {
  Simulator sim;
  SwitchConfig cfg;
  cfg.link.bandwidth_bps = 1'000'000;
  Switch sw(sim, cfg);
  int delivered = 0;
  const HostAddr bad = addr_plan::attacker(0, 0, 0);
  sw.attach(addr_plan::kVictim, [&](const PacketEvent&) { ++delivered; });
  sim.schedule(at_us(0), Target::kTest, [&] { sw.forward(pkt(sim, bad, addr_plan::kVictim, HttpGet{})); });
  sim.schedule(at_us(10), Target::kTest, [&] { sw.install_rule(FlowRule{bad, sim.now(), std::nullopt}); });
  sim.schedule(at_us(20), Target::kTest, [&] {
    CHECK(sw.forward(pkt(sim, bad, addr_plan::kVictim)).kind == ForwardOutcome::Kind::kDroppedByRule);
  });
  sim.run_until(at_seconds(1));
  CHECK(delivered == 0);
  CHECK(sw.counters().dropped_in_flight == 1);
  CHECK(sw.counters().dropped_by_rule == 1);
}

TEST_CASE("300 rules block exactly their sources") {
  Simulator sim;
  Switch sw(sim, SwitchConfig{});
  std::set<HostAddr> seen;
  sw.attach(addr_plan::kVictim, [&](const PacketEvent& p) { seen.insert(p.src); });
  for (std::uint32_t i = 0; i < 300; ++i) {
    CHECK(sw.install_rule(FlowRule{addr_plan::attacker(0, 0, i), kSimStart, std::nullopt}) == InstallResult::kInstalled);
  }
  CHECK(sw.install_rule(FlowRule{addr_plan::attacker(0, 0, 7), kSimStart, std::nullopt}) == InstallResult::kRefreshed);
  CHECK(sw.active_rules(kSimStart).size() == 300);
  sim.schedule(at_us(5), Target::kTest, [&] {
    for (std::uint32_t i = 0; i < 310; ++i) sw.forward(pkt(sim, addr_plan::attacker(0, 0, i), addr_plan::kVictim));
  });
  sim.run_until(at_seconds(1));
  CHECK(seen.size() == 10);
  CHECK(*seen.begin() == addr_plan::attacker(0, 0, 300));
}

TEST_CASE("a full rule table rejects until a rule expires") {
  Simulator sim;
  SwitchConfig cfg;
  cfg.max_rules = 2;
  Switch sw(sim, cfg);
  CHECK(sw.install_rule(FlowRule{addr_plan::attacker(0, 0, 0), kSimStart, secs(5)}) == InstallResult::kInstalled);
  CHECK(sw.install_rule(FlowRule{addr_plan::attacker(0, 0, 1), kSimStart, std::nullopt}) == InstallResult::kInstalled);
  CHECK(sw.install_rule(FlowRule{addr_plan::attacker(0, 0, 2), at_seconds(1), std::nullopt}) == InstallResult::kRejected);
  CHECK(sw.install_rule(FlowRule{addr_plan::attacker(0, 0, 2), at_seconds(5), std::nullopt}) == InstallResult::kInstalled);
  CHECK_FALSE(sw.is_blocked(addr_plan::attacker(0, 0, 0), at_seconds(5)));
}

TEST_CASE("mirror, sink and routing errors") {
  Simulator sim;
  Switch sw(sim, SwitchConfig{});
  std::vector<PacketEvent> tapped;
  sw.attach_tap([&](const PacketEvent& p) { tapped.push_back(p); });
  sw.attach(addr_plan::kVictim, [](const PacketEvent&) {});
  sw.attach(addr_plan::kProber, [](const PacketEvent&) {});
  sim.schedule(at_us(0), Target::kTest, [&] {
    sw.forward(pkt(sim, addr_plan::benign(1), addr_plan::kVictim));
    sw.forward(pkt(sim, addr_plan::kProber, addr_plan::kVictim));
    sw.forward(make_packet(sim.now(), addr_plan::kVictim, 80, addr_plan::attacker(0, 0, 3), 5, PacketKind::kSynAck));
    CHECK(sw.forward(pkt(sim, addr_plan::kVictim, HostAddr{addr_plan::dotted(8, 8, 8, 8)})).kind ==
          ForwardOutcome::Kind::kRoutingError);
  });
  sim.run_until(at_seconds(1));
  CHECK(tapped.size() == 2);
  CHECK(sw.counters().delivered_to_sink == 1);
  CHECK(sw.counters().routing_errors == 1);
  CHECK(sw.counters().delivered == 2);
}

TEST_CASE("forward requires a packet stamped now") {
  Simulator sim;
  Switch sw(sim, SwitchConfig{});
  sw.attach(addr_plan::kVictim, [](const PacketEvent&) {});
  auto p = make_packet(at_us(5), addr_plan::benign(0), 1, addr_plan::kVictim, 80, PacketKind::kSyn);
  CHECK_THROWS_AS(sw.forward(p), std::logic_error);
}
