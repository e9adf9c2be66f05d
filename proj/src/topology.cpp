#include "ddsim/topology.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace ddsim {

Duration LinkParams::serialization(std::uint32_t size_bytes) const {
  const std::uint64_t bits_us = static_cast<std::uint64_t>(size_bytes) * 8ULL * 1'000'000ULL;
  return Duration{static_cast<std::int64_t>((bits_us + bandwidth_bps - 1) / bandwidth_bps)};
}

Switch::Switch(Simulator& sim, SwitchConfig config) : sim_(sim), config_(config) {
  if (config_.link.bandwidth_bps == 0) throw std::invalid_argument("bandwidth_bps must be > 0");
  if (config_.link.propagation_us < 0) throw std::invalid_argument("propagation_us must be >= 0");
}

void Switch::attach(HostAddr addr, Handler handler) {
  hosts_[addr] = std::move(handler);
  ports_.try_emplace(addr);
}

void Switch::detach(HostAddr addr) { hosts_.erase(addr); }

bool Switch::mirrored(const PacketEvent& pkt) {
  auto pool = [](HostAddr a) {
    const HostRole r = a.role();
    return r == HostRole::kBenign || r == HostRole::kAttacker;
  };
  return pool(pkt.src) || pool(pkt.dst);
}

SimTime Switch::enqueue(Port& port, SimTime at, std::uint32_t size_bytes, bool& overflow) {
  const SimTime start = std::max(at, port.free_at);
  const auto backlog_us = static_cast<std::uint64_t>(micros(start - at));
  overflow = backlog_us * config_.link.bandwidth_bps / 8'000'000ULL > config_.port_buffer_bytes;
  if (overflow) return at;
  port.free_at = start + config_.link.serialization(size_bytes);
  return port.free_at + Duration{config_.link.propagation_us};
}

ForwardOutcome Switch::forward(const PacketEvent& pkt) {
  if (pkt.at != sim_.now()) {
    throw std::logic_error(fmt::format("forward: packet stamped {} s at clock {} s",
                                       format_seconds(pkt.at), format_seconds(sim_.now())));
  }
  ++counters_.forwarded;
  if (is_blocked(pkt.src, pkt.at)) {
    ++counters_.dropped_by_rule;
    return {ForwardOutcome::Kind::kDroppedByRule, {}};
  }

  const bool attached = hosts_.count(pkt.dst) != 0;
  const bool sink = !attached && pkt.dst.role() == HostRole::kAttacker;
  if (!attached && !sink) {
    ++counters_.routing_errors;
    return {ForwardOutcome::Kind::kRoutingError, {}};
  }

  bool overflow = false;
  Port& port = sink ? sink_port_ : ports_[pkt.dst];
  const SimTime delivered_at = enqueue(port, pkt.at, pkt.size_bytes, overflow);
  if (overflow) {
    ++counters_.dropped_overflow;
    return {ForwardOutcome::Kind::kDroppedOverflow, {}};
  }

  if (tap_ && mirrored(pkt)) {
    bool tap_overflow = false;
    const SimTime tap_at = enqueue(mirror_port_, pkt.at, pkt.size_bytes, tap_overflow);
    if (!tap_overflow) {
      ++counters_.mirrored;
      sim_.schedule(tap_at, Target::kSentinel, [this, pkt] { tap_(pkt); });
    }
  }

  sim_.schedule(delivered_at, Target::kSwitch, [this, pkt, sink] {
    if (is_blocked(pkt.src, sim_.now())) {
      ++counters_.dropped_in_flight;
      return;
    }
    if (sink) {
      ++counters_.delivered_to_sink;
      return;
    }
    auto it = hosts_.find(pkt.dst);
    if (it == hosts_.end()) {
      ++counters_.routing_errors;
      return;
    }
    ++counters_.delivered;
    if (record_) deliveries_.push_back(DeliveryRecord{sim_.now(), pkt});
    it->second(pkt);
  });
  return {ForwardOutcome::Kind::kDelivered, delivered_at};
}

InstallResult Switch::install_rule(const FlowRule& rule) {
  auto it = rules_.find(rule.match_src);
  if (it != rules_.end() && it->second.live_at(rule.installed_at)) {
    it->second.installed_at = rule.installed_at;
    return InstallResult::kRefreshed;
  }
  if (it != rules_.end()) rules_.erase(it);
  if (config_.max_rules && rules_.size() >= *config_.max_rules) {
    std::erase_if(rules_, [&](const auto& kv) { return !kv.second.live_at(rule.installed_at); });
    if (rules_.size() >= *config_.max_rules) return InstallResult::kRejected;
  }
  rules_.emplace(rule.match_src, rule);
  return InstallResult::kInstalled;
}

bool Switch::remove_rule(HostAddr match_src) { return rules_.erase(match_src) != 0; }

std::vector<FlowRule> Switch::active_rules(SimTime now) {
  std::erase_if(rules_, [&](const auto& kv) { return !kv.second.live_at(now); });
  std::vector<FlowRule> out;
  out.reserve(rules_.size());
  for (const auto& [addr, rule] : rules_) out.push_back(rule);
  return out;
}

bool Switch::is_blocked(HostAddr src, SimTime now) const {
  auto it = rules_.find(src);
  return it != rules_.end() && it->second.live_at(now);
}

}  // namespace ddsim
