#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "ddsim/engine.hpp"
#include "ddsim/event_log.hpp"
#include "ddsim/packet.hpp"
#include "ddsim/topology.hpp"
#include "ddsim/traffic.hpp"
#include "ddsim/victim.hpp"

namespace ddsim {

using AttackClass = AttackKind;

/// Every detection threshold. The defaults separate the five default attack
/// scenarios from benign traffic, including a client on a slow link.
struct SentinelConfig {
  // Probing and alarm.
  Duration probe_interval = secs(1);
  Duration probe_timeout = secs(4);
  double threshold_factor = 5.0;
  std::uint32_t consecutive_needed = 5;
  std::uint32_t warmup_probes = 10;
  std::uint32_t clear_windows = 3;

  // Observation window.
  Duration window = secs(10);
  Duration conn_track_timeout = secs(120);

  // Classification.
  double syn_ratio = 0.5;
  double spike_factor = 3.0;
  double slow_fraction = 0.5;
  std::uint32_t table_capacity_estimate = 256;
  double sustainable_heavy_rate = 10.0;  // victim cpu capacity / heavy cost
  double http_flood_factor = 3.0;
  double tls_renegotiation_rate = 10.0;
  Duration slow_gap = secs(5);

  // Identification.
  std::uint32_t id_half_open = 3;
  double id_heavy_rate = 2.0;
  std::uint32_t id_renegotiations = 5;
  std::uint32_t id_incomplete = 3;
  double id_gap_cv = 0.5;

  void validate() const;
  friend bool operator==(const SentinelConfig&, const SentinelConfig&) = default;
};

struct SourceStats {
  // Sliding window (now - W, now], packets sent by the source.
  std::uint64_t syn_count = 0;
  std::uint64_t ack_count = 0;
  std::uint64_t data_count = 0;
  std::uint64_t half_open_live = 0;  // SYNs in window with no later ACK on that connection
  std::uint64_t requests_heavy = 0;
  std::uint64_t renegotiations = 0;
  std::uint64_t bytes = 0;
  // Tracked connections with an unfinished header or body.
  std::uint64_t incomplete_connections = 0;
  std::uint64_t incomplete_header = 0;
  std::uint64_t incomplete_body = 0;
  // Fragment gaps on those connections, including each one's current idle time.
  std::uint64_t gap_samples = 0;
  std::optional<double> gap_mean_s;
  std::optional<double> gap_cv;

  friend bool operator==(const SourceStats&, const SourceStats&) = default;
};

struct WindowAggregate {
  std::uint64_t total_packets = 0;  // inbound to the victim
  std::uint64_t total_syns = 0;
  double packet_rate_pps = 0.0;
  double baseline_packet_rate_pps = 0.0;
  std::uint64_t slow_header_connections = 0;
  std::uint64_t slow_body_connections = 0;
  double heavy_request_rate = 0.0;
  double renegotiation_rate = 0.0;

  std::uint64_t slow_connection_count() const { return slow_header_connections + slow_body_connections; }
};

struct DetectionEvent {
  SimTime at{};
  AttackClass attack_class = AttackClass::kSynFlood;
  std::vector<HostAddr> attackers;  // sorted
  std::vector<std::pair<HostAddr, SourceStats>> evidence;
};

struct TapRecord {
  SimTime tap_at{};
  PacketEvent packet;
};

/**
 * TrafficWindow - per-source statistics over the mirrored packet stream.
 *
 * Counters are maintained incrementally: each observation adds its
 * contribution and eviction subtracts it once the packet leaves the window.
 * Slow-request state is per connection and lives until the request
 * completes, either side resets it, or it idles past conn_track_timeout.
 */
class TrafficWindow {
 public:
  TrafficWindow(HostAddr victim, Duration window, Duration conn_track_timeout);

  void observe(const PacketEvent& pkt, SimTime now);
  // Evicts packets at or before now - window and stale connections.
  void advance(SimTime now);

  SourceStats stats_for(HostAddr src, SimTime now) const;
  std::map<HostAddr, SourceStats> all_stats(SimTime now) const;
  WindowAggregate aggregate(SimTime now, Duration slow_gap) const;

  std::size_t window_size() const { return entries_.size(); }
  Duration window() const { return window_; }

 private:
  struct Entry {
    std::uint64_t seq;
    SimTime at;
    HostAddr src;
    std::uint16_t port;
    PacketKind kind;
    bool heavy;
    bool renegotiate;
    std::uint32_t bytes;
  };
  struct Counters {
    std::uint64_t syn = 0, ack = 0, data = 0, half_open = 0, heavy = 0, reneg = 0, bytes = 0, packets = 0;
  };
  struct TrackedConn {
    bool body = false;
    SimTime last_fragment{};
    std::deque<Duration> gaps;
  };

  void apply(const Entry& e, int sign);
  void track(const PacketEvent& pkt, SimTime now);

  HostAddr victim_;
  Duration window_;
  Duration track_timeout_;
  std::uint64_t next_seq_ = 0;
  std::deque<Entry> entries_;
  std::map<HostAddr, Counters> counters_;
  std::map<ConnectionKey, std::deque<std::uint64_t>> pending_syns_;
  std::map<ConnectionKey, TrackedConn> conns_;
  Counters totals_;
};

std::set<AttackClass> classify(const WindowAggregate& agg, const SentinelConfig& cfg);

// Sources meeting the class's attacker predicate, sorted, minus `excluded`.
std::vector<HostAddr> identify(AttackClass cls, const std::map<HostAddr, SourceStats>& stats,
                               const SentinelConfig& cfg, const std::set<HostAddr>& excluded = {});

struct ProbeResult {
  enum class Kind { kRtt, kTimeout, kRefused };
  SimTime issued{};
  SimTime resolved{};
  Kind kind = Kind::kRtt;
  Duration rtt{};
};

std::string_view to_string(ProbeResult::Kind k);

/// RTT history and alarm predicate. The baseline is the median of the first
/// warmup_probes successful RTTs.
class ProbeState {
 public:
  explicit ProbeState(const SentinelConfig& cfg) : cfg_(cfg) {}

  void record(const ProbeResult& r);
  // False (and counted) before the baseline exists.
  bool alarm_check();
  bool exceeds(const ProbeResult& r) const;

  std::optional<Duration> baseline() const { return baseline_; }
  std::optional<Duration> threshold() const;
  const std::deque<ProbeResult>& history() const { return history_; }
  std::uint64_t premature_checks() const { return premature_checks_; }

 private:
  static constexpr std::size_t kHistoryLimit = 64;
  const SentinelConfig& cfg_;
  std::vector<Duration> warmup_;
  std::optional<Duration> baseline_;
  std::deque<ProbeResult> history_;
  std::uint64_t premature_checks_ = 0;
};

/**
 * Sentinel - the monitoring host.
 *
 * Probes the victim from the prober address every probe_interval. With
 * analysis enabled it also consumes the mirror tap, and on every window tick
 * classifies and identifies while the alarm is latched, reporting only
 * attackers it has not reported before.
 */
class Sentinel {
 public:
  using DetectionSink = std::function<void(const DetectionEvent&)>;
  using WindowObserver =
      std::function<void(SimTime, const WindowAggregate&, const std::set<AttackClass>&, bool latched)>;

  struct Options {
    bool analysis = true;
    SimTime warmup_end = at_seconds(15);
    bool record_tap = false;
  };

  Sentinel(Simulator& sim, Switch& sw, SentinelConfig cfg, Options opts, EventLog* log,
           DetectionSink sink, HostAddr victim = addr_plan::kVictim);

  void start();

  void probe_tick();
  void observe(const PacketEvent& pkt);
  std::vector<DetectionEvent> window_tick();

  bool alarm_latched() const { return latched_; }
  const ProbeState& probe() const { return probe_; }
  const std::vector<ProbeResult>& probe_results() const { return results_; }
  const TrafficWindow& traffic() const { return window_; }
  const std::set<HostAddr>& reported() const { return reported_; }
  const std::vector<DetectionEvent>& detections() const { return detections_; }
  const std::vector<TapRecord>& tap_log() const { return tap_log_; }
  const SentinelConfig& config() const { return cfg_; }
  double baseline_packet_rate() const;

  void set_window_observer(WindowObserver obs) { window_observer_ = std::move(obs); }

 private:
  void on_probe(const RequestOutcome& out);
  void log(std::string kind, std::string detail = {});

  Simulator& sim_;
  SentinelConfig cfg_;
  Options opts_;
  EventLog* log_;
  DetectionSink sink_;
  HostAddr victim_;
  HttpRequester prober_;
  ProbeState probe_;
  TrafficWindow window_;
  std::vector<ProbeResult> results_;

  bool latched_ = false;
  std::uint32_t clear_streak_ = 0;
  bool unclassified_logged_ = false;
  std::uint64_t warmup_packets_ = 0;
  std::set<HostAddr> reported_;
  std::vector<DetectionEvent> detections_;
  std::vector<TapRecord> tap_log_;
  WindowObserver window_observer_;
};

std::string format_evidence(const SourceStats& s);

}  // namespace ddsim
