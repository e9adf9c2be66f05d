#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "ddsim/engine.hpp"
#include "ddsim/packet.hpp"
#include "ddsim/rng.hpp"
#include "ddsim/topology.hpp"

namespace ddsim {

enum class AttackKind : std::uint8_t { kSynFlood, kHttpFlood, kTlsFlood, kSlowHeader, kSlowBody };

constexpr std::size_t kAttackKindCount = 5;

std::string_view to_string(AttackKind k);
std::optional<AttackKind> parse_attack_kind(std::string_view s);
bool is_flooding(AttackKind k);

struct AttackConfig {
  AttackKind kind = AttackKind::kSynFlood;
  SimTime start{};
  Duration duration{};
  double rate_pps = 100.0;
  std::uint32_t source_count = 300;
  std::uint32_t connections_per_source = 8;
  Duration slow_interval = secs(30);
  double jitter_fraction = 0.02;

  SimTime end() const { return start + duration; }
  void validate() const;
  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

struct BenignConfig {
  std::uint32_t client_count = 20;
  Duration request_interval = secs(2);  // mean think time, exponential
  RequestTarget target = RequestTarget::kLight;
  std::uint32_t bad_network_clients = 1;
  Duration bad_gap = secs(10);
  Duration patience = secs(10);
  Duration retry_backoff = secs(5);  // extra wait after a refused attempt

  void validate() const;
  friend bool operator==(const BenignConfig&, const BenignConfig&) = default;
};

/// Binds a host address on the switch and demultiplexes by local port.
class Endpoint {
 public:
  using Handler = std::function<void(const PacketEvent&)>;

  Endpoint(Simulator& sim, Switch& sw, HostAddr self);
  ~Endpoint();
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  HostAddr address() const { return self_; }
  void bind(std::uint16_t port, Handler h) { ports_[port] = std::move(h); }
  void unbind(std::uint16_t port) { ports_.erase(port); }
  bool bound(std::uint16_t port) const { return ports_.count(port) != 0; }
  std::uint16_t free_port();
  void send(HostAddr dst, std::uint16_t src_port, PacketKind kind, Payload payload = {});

  Simulator& sim() { return sim_; }

 private:
  Simulator& sim_;
  Switch& sw_;
  HostAddr self_;
  std::map<std::uint16_t, Handler> ports_;
  std::uint16_t next_port_ = 1024;
};

struct RequestPlan {
  RequestTarget target = RequestTarget::kLight;
  std::uint32_t fragments = 1;  // 1 sends a single http-get
  Duration fragment_gap{};
};

struct RequestOutcome {
  enum class Kind { kSuccess, kRefused, kReset, kTimedOut };
  Kind kind = Kind::kSuccess;
  SimTime started{};
  SimTime finished{};
  std::optional<SimTime> request_complete_at;  // last request byte sent

  bool ok() const { return kind == Kind::kSuccess; }
  Duration response_time() const { return finished - started; }
};

std::string_view to_string(RequestOutcome::Kind k);

/**
 * HttpRequester - client side of one-request-per-connection HTTP.
 *
 * Patience runs while waiting for the SYN_ACK and again from the moment the
 * request is fully sent; fragment gaps on slow links do not count against it.
 * On patience expiry the client resets the connection.
 */
class HttpRequester {
 public:
  using Done = std::function<void(const RequestOutcome&)>;

  HttpRequester(Simulator& sim, Switch& sw, HostAddr self, HostAddr server);

  void issue(const RequestPlan& plan, Duration patience, Done done);
  std::size_t in_flight() const { return sessions_.size(); }
  HostAddr address() const { return endpoint_.address(); }

 private:
  enum class Stage { kConnecting, kSending, kAwaiting };
  struct Session {
    std::uint64_t id;
    RequestPlan plan;
    Duration patience;
    Done done;
    Stage stage = Stage::kConnecting;
    SimTime started{};
    std::optional<SimTime> request_complete_at;
    std::optional<EventHandle> timer;
  };

  void on_packet(std::uint16_t port, const PacketEvent& pkt);
  void send_fragment(std::uint16_t port, std::uint64_t id, std::uint32_t index);
  void finish(std::uint16_t port, RequestOutcome::Kind kind);
  void arm_patience(std::uint16_t port, Session& s);

  Simulator& sim_;
  Endpoint endpoint_;
  HostAddr server_;
  std::uint64_t next_id_ = 0;
  std::map<std::uint16_t, Session> sessions_;
};

struct BenignOutcome {
  std::uint32_t client = 0;
  HostAddr addr{};
  RequestOutcome outcome;
};

/// The benign client population. The last `bad_network_clients` clients send
/// their header in three fragments spaced bad_gap apart.
class BenignPool {
 public:
  using Sink = std::function<void(const BenignOutcome&)>;

  BenignPool(Simulator& sim, Switch& sw, BenignConfig config, std::uint64_t seed, Sink sink);

  void start();
  std::vector<HostAddr> addresses() const;
  std::vector<HostAddr> bad_network_addresses() const;
  const BenignConfig& config() const { return config_; }

 private:
  struct Client {
    std::uint32_t index;
    Rng rng;
    std::unique_ptr<HttpRequester> requester;
    bool bad_network;
  };

  void schedule_next(Client& c, Duration delay);
  void fire(Client& c);

  Simulator& sim_;
  BenignConfig config_;
  Sink sink_;
  std::vector<Client> clients_;
};

struct AttackStats {
  std::uint64_t syn = 0;
  std::uint64_t ack = 0;
  std::uint64_t data = 0;
  std::uint64_t requests = 0;
  std::uint64_t renegotiations = 0;
  std::uint64_t fragments = 0;
  std::uint64_t connections_opened = 0;
  std::vector<std::uint64_t> per_source_requests;
  std::vector<SimTime> send_times;  // every emitted packet, in order
};

/// One attack generator. Sources draw from their own RNG streams, keyed by
/// (seed, kind, occurrence, source index).
class AttackActor {
 public:
  virtual ~AttackActor() = default;
  virtual void start() = 0;

  const AttackConfig& config() const { return config_; }
  const AttackStats& stats() const { return stats_; }
  const std::vector<HostAddr>& sources() const { return sources_; }

 protected:
  AttackActor(Simulator& sim, Switch& sw, AttackConfig config, std::uint32_t occurrence,
              std::uint64_t seed);
  void note_sent(PacketKind kind);
  // Fixed pacing with non-accumulating jitter: start + k/rate + u*jitter/rate.
  SimTime paced(std::uint64_t k, double rate, Rng& rng) const;
  bool active(SimTime t) const { return t < config_.end(); }

  Simulator& sim_;
  Switch& sw_;
  AttackConfig config_;
  std::vector<HostAddr> sources_;
  std::vector<Rng> rngs_;
  AttackStats stats_;
};

std::unique_ptr<AttackActor> spawn_attack(Simulator& sim, Switch& sw, const AttackConfig& config,
                                          std::uint32_t occurrence, std::uint64_t seed,
                                          HostAddr server = addr_plan::kVictim);

}  // namespace ddsim
