#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ddsim/engine.hpp"
#include "ddsim/packet.hpp"

namespace ddsim {

struct LinkParams {
  std::uint64_t bandwidth_bps = 13'000'000'000ULL;
  std::int64_t propagation_us = 50;

  // ceil(bytes * 8 * 1e6 / bandwidth) microseconds.
  Duration serialization(std::uint32_t size_bytes) const;

  friend bool operator==(const LinkParams&, const LinkParams&) = default;
};

struct FlowRule {
  HostAddr match_src{};
  SimTime installed_at{};
  std::optional<Duration> hard_timeout;

  bool live_at(SimTime now) const {
    return !hard_timeout || now < installed_at + *hard_timeout;
  }
  friend bool operator==(const FlowRule&, const FlowRule&) = default;
};

enum class InstallResult { kInstalled, kRefreshed, kRejected };

struct ForwardOutcome {
  enum class Kind { kDelivered, kDroppedByRule, kDroppedOverflow, kRoutingError };
  Kind kind = Kind::kDelivered;
  SimTime delivered_at{};  // meaningful only for kDelivered
};

struct DeliveryRecord {
  SimTime delivered_at{};
  PacketEvent packet;
};

struct SwitchCounters {
  std::uint64_t forwarded = 0;
  std::uint64_t delivered = 0;
  std::uint64_t delivered_to_sink = 0;
  std::uint64_t dropped_by_rule = 0;
  std::uint64_t dropped_in_flight = 0;  // rule installed while the packet was queued
  std::uint64_t dropped_overflow = 0;
  std::uint64_t routing_errors = 0;
  std::uint64_t mirrored = 0;
};

struct SwitchConfig {
  LinkParams link;
  std::optional<std::size_t> max_rules;
  // Per-port backlog bound; packets arriving beyond it are dropped.
  std::uint64_t port_buffer_bytes = 16u << 20;
};

/**
 * Switch - the single forwarding element between all hosts.
 *
 * Each destination port is a FIFO link: a packet starts serializing when the
 * port is free and arrives propagation_us later. Drop rules match on source
 * address at ingress, and again at egress so packets already queued when a
 * rule lands are discarded as well. Pool traffic that passes ingress is copied
 * to the mirror port.
 *
 * Packets to unattached attacker-pool addresses (spoofed sources) go to a sink.
 */
class Switch {
 public:
  using Handler = std::function<void(const PacketEvent&)>;

  Switch(Simulator& sim, SwitchConfig config);

  void attach(HostAddr addr, Handler handler);
  void detach(HostAddr addr);
  bool is_attached(HostAddr addr) const { return hosts_.count(addr) != 0; }
  void attach_tap(Handler handler) { tap_ = std::move(handler); }

  ForwardOutcome forward(const PacketEvent& pkt);

  InstallResult install_rule(const FlowRule& rule);
  bool remove_rule(HostAddr match_src);
  // Unexpired rules sorted by match_src; expired rules are purged.
  std::vector<FlowRule> active_rules(SimTime now);
  bool is_blocked(HostAddr src, SimTime now) const;

  const SwitchCounters& counters() const { return counters_; }
  const SwitchConfig& config() const { return config_; }

  // Records every delivery to an attached host while enabled.
  void record_deliveries(bool on) { record_ = on; }
  const std::vector<DeliveryRecord>& delivery_log() const { return deliveries_; }

 private:
  struct Port {
    SimTime free_at{};
  };

  SimTime enqueue(Port& port, SimTime at, std::uint32_t size_bytes, bool& overflow);
  static bool mirrored(const PacketEvent& pkt);

  Simulator& sim_;
  SwitchConfig config_;
  std::map<HostAddr, Handler> hosts_;
  std::map<HostAddr, Port> ports_;
  Port sink_port_;
  Port mirror_port_;
  Handler tap_;
  std::map<HostAddr, FlowRule> rules_;
  SwitchCounters counters_;
  bool record_ = false;
  std::vector<DeliveryRecord> deliveries_;
};

}  // namespace ddsim
