#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "ddsim/engine.hpp"
#include "ddsim/packet.hpp"

namespace ddsim {

struct ServerConfig {
  std::uint32_t table_capacity = 256;
  Duration syn_timeout = secs(30);
  Duration header_timeout = secs(40);
  Duration body_timeout = secs(40);
  std::uint32_t cpu_capacity_ups = 100;  // work units per second
  std::uint32_t heavy_request_cost = 10;
  std::uint32_t light_request_cost = 1;
  std::uint32_t tls_handshake_cost = 5;
  std::uint32_t cpu_queue_limit = 1000;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  // ceil(cost / capacity) in microseconds.
  Duration service_time(std::uint32_t cost) const;

  friend bool operator==(const ServerConfig&, const ServerConfig&) = default;
};

struct ConnectionKey {
  HostAddr src{};
  std::uint16_t port = 0;
  friend auto operator<=>(const ConnectionKey&, const ConnectionKey&) = default;
};

enum class Phase : std::uint8_t {
  kSynReceived,
  kEstablished,
  kReceivingHeader,
  kReceivingBody,
  kQueued,
  kProcessing,
  kClosed,
};

std::string_view to_string(Phase p);

enum class TimeoutKind : std::uint8_t { kSyn, kHeader, kBody };

struct ConnectionRecord {
  static constexpr std::size_t kGapHistory = 16;

  ConnectionKey key;
  Phase phase = Phase::kSynReceived;
  SimTime opened_at{};
  SimTime last_packet_at{};
  std::optional<EventHandle> timer;
  std::deque<Duration> inter_packet_gaps;  // most recent kGapHistory
};

enum class Reaction {
  kSynAckSent,
  kRejectedFull,
  kDuplicateSyn,
  kEstablished,
  kIgnored,
  kNeedMore,
  kRequestQueued,
  kTlsRenegotiated,
  kCpuRejected,
  kProtocolError,
  kClosed,
  kFreed,
};

struct VictimSample {
  std::uint32_t occupancy = 0;
  double cpu_utilization = 0.0;
  std::uint64_t rejected_count = 0;
  std::array<std::uint64_t, 3> timeout_counts{};  // indexed by TimeoutKind
  std::uint64_t inbound_packets = 0;
};

struct VictimCounters {
  std::uint64_t syn_accepted = 0;
  std::uint64_t rejected_full = 0;
  std::uint64_t duplicate_syn = 0;
  std::uint64_t stray_acks = 0;
  std::uint64_t protocol_errors = 0;
  std::uint64_t protocol_resets = 0;  // protocol errors that freed a record
  std::uint64_t cpu_rejected = 0;
  std::uint64_t completed = 0;        // response sent, record freed
  std::uint64_t closed_by_peer = 0;   // RST/FIN from the client
  std::array<std::uint64_t, 3> timeouts{};
  std::uint64_t units_enqueued = 0;
  std::uint64_t units_dispatched = 0;
  std::uint64_t jobs_dispatched = 0;
  std::uint64_t inbound_packets = 0;
  std::uint32_t peak_occupancy = 0;
  std::optional<SimTime> first_full_at;

  // Records freed for any reason other than a timeout.
  std::uint64_t closed() const { return completed + closed_by_peer + protocol_resets + cpu_rejected; }
  std::uint64_t timed_out() const { return timeouts[0] + timeouts[1] + timeouts[2]; }
};

/**
 * Server - the protected web server.
 *
 * A bounded connection table drives the TCP handshake and HTTP request
 * assembly; complete requests and TLS handshakes become jobs on a single FIFO
 * CPU served at cpu_capacity_ups. A request's connection closes once its
 * response is sent (no keep-alive).
 */
class Server {
 public:
  using Send = std::function<void(const PacketEvent&)>;
  using PhaseObserver = std::function<void(const ConnectionKey&, Phase)>;

  Server(Simulator& sim, ServerConfig config, HostAddr self, Send send);

  // Entry point for every packet delivered to the server.
  void receive(const PacketEvent& pkt);

  Reaction on_syn(const PacketEvent& pkt);
  Reaction on_ack(const PacketEvent& pkt);
  Reaction on_data(const PacketEvent& pkt);
  Reaction on_close(const PacketEvent& pkt);  // RST or FIN from the client
  Reaction on_timeout(const ConnectionKey& key, TimeoutKind which);

  // Returns the elapsed-second counters and resets them.
  VictimSample metrics_sample(SimTime now);

  std::uint32_t occupancy() const { return static_cast<std::uint32_t>(table_.size()); }
  const ConnectionRecord* find(const ConnectionKey& key) const;
  std::size_t cpu_queue_length() const { return cpu_queue_.size(); }
  bool cpu_busy() const { return in_service_.has_value(); }
  const VictimCounters& counters() const { return counters_; }
  const ServerConfig& config() const { return config_; }
  HostAddr address() const { return self_; }

  void set_phase_observer(PhaseObserver obs) { phase_observer_ = std::move(obs); }

 private:
  enum class JobKind : std::uint8_t { kRequest, kTls };
  struct Job {
    ConnectionKey key;
    std::uint32_t cost;
    JobKind kind;
  };

  void set_phase(ConnectionRecord& rec, Phase p);
  void arm(ConnectionRecord& rec, TimeoutKind which);
  void disarm(ConnectionRecord& rec);
  void free_record(const ConnectionKey& key);
  void reply(const ConnectionKey& key, std::uint16_t dst_port, PacketKind kind, Payload payload = {});
  void reset(const ConnectionKey& key);
  Reaction enqueue(ConnectionRecord& rec, std::uint32_t cost, JobKind kind);
  void start_next();
  void finish_job();
  void account_busy(SimTime now);

  Simulator& sim_;
  ServerConfig config_;
  HostAddr self_;
  Send send_;
  PhaseObserver phase_observer_;

  std::map<ConnectionKey, ConnectionRecord> table_;
  std::deque<Job> cpu_queue_;
  std::optional<Job> in_service_;
  SimTime busy_mark_{};
  std::int64_t busy_us_in_second_ = 0;
  SimTime last_sample_{};

  VictimCounters counters_;
  VictimSample second_{};
};

}  // namespace ddsim
