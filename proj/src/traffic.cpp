#include "ddsim/traffic.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace ddsim {

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::kSynFlood: return "syn_flood";
    case AttackKind::kHttpFlood: return "http_flood";
    case AttackKind::kTlsFlood: return "tls_flood";
    case AttackKind::kSlowHeader: return "slow_header";
    case AttackKind::kSlowBody: return "slow_body";
  }
  return "?";
}

std::optional<AttackKind> parse_attack_kind(std::string_view s) {
  for (auto k : {AttackKind::kSynFlood, AttackKind::kHttpFlood, AttackKind::kTlsFlood,
                 AttackKind::kSlowHeader, AttackKind::kSlowBody}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool is_flooding(AttackKind k) {
  return k == AttackKind::kSynFlood || k == AttackKind::kHttpFlood || k == AttackKind::kTlsFlood;
}

void AttackConfig::validate() const {
  if (duration < Duration::zero()) throw std::invalid_argument("attack.duration_s must be >= 0");
  if (is_flooding(kind) && !(rate_pps > 0.0)) {
    throw std::invalid_argument("attack.rate_pps must be > 0 for flooding attacks");
  }
  if (!is_flooding(kind) && slow_interval <= Duration::zero()) {
    throw std::invalid_argument("attack.slow_interval_s must be > 0 for slow attacks");
  }
  if (source_count == 0 || source_count > addr_plan::kMaxSourcesPerAttack) {
    throw std::invalid_argument(
        fmt::format("attack.source_count must be in [1, {}]", addr_plan::kMaxSourcesPerAttack));
  }
  if (connections_per_source == 0) {
    throw std::invalid_argument("attack.connections_per_source must be positive");
  }
  if (!(jitter_fraction >= 0.0 && jitter_fraction < 1.0)) {
    throw std::invalid_argument("attack.jitter_fraction must be in [0, 1)");
  }
}

void BenignConfig::validate() const {
  if (bad_network_clients > client_count) {
    throw std::invalid_argument("benign.bad_network_clients must not exceed client_count");
  }
  if (request_interval <= Duration::zero()) {
    throw std::invalid_argument("benign.request_interval_s must be positive");
  }
  if (bad_gap <= Duration::zero()) throw std::invalid_argument("benign.bad_gap_s must be positive");
  if (patience <= Duration::zero()) throw std::invalid_argument("benign.patience_s must be positive");
  if (retry_backoff < Duration::zero()) {
    throw std::invalid_argument("benign.retry_backoff_s must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// Endpoint

Endpoint::Endpoint(Simulator& sim, Switch& sw, HostAddr self) : sim_(sim), sw_(sw), self_(self) {
  sw_.attach(self_, [this](const PacketEvent& pkt) {
    auto it = ports_.find(pkt.dst_port);
    if (it == ports_.end()) return;
    // Handlers may unbind their own port.
    Handler h = it->second;
    h(pkt);
  });
}

Endpoint::~Endpoint() { sw_.detach(self_); }

std::uint16_t Endpoint::free_port() {
  for (int tries = 0; tries < 65536; ++tries) {
    const std::uint16_t p = next_port_;
    next_port_ = next_port_ == 65535 ? 1024 : static_cast<std::uint16_t>(next_port_ + 1);
    if (!bound(p)) return p;
  }
  throw std::runtime_error(fmt::format("{}: no free port", self_.to_string()));
}

void Endpoint::send(HostAddr dst, std::uint16_t src_port, PacketKind kind, Payload payload) {
  sw_.forward(make_packet(sim_.now(), self_, src_port, dst, kHttpPort, kind, std::move(payload)));
}

// ---------------------------------------------------------------------------
// HttpRequester

std::string_view to_string(RequestOutcome::Kind k) {
  switch (k) {
    case RequestOutcome::Kind::kSuccess: return "success";
    case RequestOutcome::Kind::kRefused: return "refused";
    case RequestOutcome::Kind::kReset: return "reset";
    case RequestOutcome::Kind::kTimedOut: return "timeout";
  }
  return "?";
}

HttpRequester::HttpRequester(Simulator& sim, Switch& sw, HostAddr self, HostAddr server)
    : sim_(sim), endpoint_(sim, sw, self), server_(server) {}

void HttpRequester::issue(const RequestPlan& plan, Duration patience, Done done) {
  const std::uint16_t port = endpoint_.free_port();
  Session& s = sessions_[port];
  s.id = next_id_++;
  s.plan = plan;
  s.patience = patience;
  s.done = std::move(done);
  s.started = sim_.now();
  endpoint_.bind(port, [this, port](const PacketEvent& pkt) { on_packet(port, pkt); });
  arm_patience(port, s);
  endpoint_.send(server_, port, PacketKind::kSyn);
}

void HttpRequester::arm_patience(std::uint16_t port, Session& s) {
  if (s.timer) sim_.cancel(*s.timer);
  const std::uint64_t id = s.id;
  s.timer = sim_.schedule_in(s.patience, Target::kClient, [this, port, id] {
    auto it = sessions_.find(port);
    if (it == sessions_.end() || it->second.id != id) return;
    it->second.timer.reset();
    endpoint_.send(server_, port, PacketKind::kRst);
    finish(port, RequestOutcome::Kind::kTimedOut);
  });
}

void HttpRequester::on_packet(std::uint16_t port, const PacketEvent& pkt) {
  auto it = sessions_.find(port);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  switch (pkt.kind) {
    case PacketKind::kSynAck:
      if (s.stage != Stage::kConnecting) return;
      s.stage = Stage::kSending;
      if (s.timer) sim_.cancel(*s.timer);
      s.timer.reset();
      endpoint_.send(server_, port, PacketKind::kAck);
      send_fragment(port, s.id, 0);
      return;
    case PacketKind::kRst:
      finish(port, s.stage == Stage::kConnecting ? RequestOutcome::Kind::kRefused
                                                  : RequestOutcome::Kind::kReset);
      return;
    case PacketKind::kData:
      if (std::holds_alternative<HttpResponse>(pkt.payload) && s.stage == Stage::kAwaiting) {
        finish(port, RequestOutcome::Kind::kSuccess);
      }
      return;
    default:
      return;
  }
}

void HttpRequester::send_fragment(std::uint16_t port, std::uint64_t id, std::uint32_t index) {
  auto it = sessions_.find(port);
  if (it == sessions_.end() || it->second.id != id) return;
  Session& s = it->second;
  const bool last = index + 1 >= s.plan.fragments;
  if (s.plan.fragments <= 1) {
    endpoint_.send(server_, port, PacketKind::kData, HttpGet{s.plan.target});
  } else {
    endpoint_.send(server_, port, PacketKind::kData,
                   HttpHeaderFragment{last, false, s.plan.target});
  }
  if (last) {
    s.stage = Stage::kAwaiting;
    s.request_complete_at = sim_.now();
    arm_patience(port, s);
    return;
  }
  sim_.schedule_in(s.plan.fragment_gap, Target::kClient,
                   [this, port, id, index] { send_fragment(port, id, index + 1); });
}

void HttpRequester::finish(std::uint16_t port, RequestOutcome::Kind kind) {
  auto it = sessions_.find(port);
  Session s = std::move(it->second);
  sessions_.erase(it);
  endpoint_.unbind(port);
  if (s.timer) sim_.cancel(*s.timer);
  RequestOutcome out{kind, s.started, sim_.now(), s.request_complete_at};
  if (s.done) s.done(out);
}

// ---------------------------------------------------------------------------
// BenignPool

BenignPool::BenignPool(Simulator& sim, Switch& sw, BenignConfig config, std::uint64_t seed, Sink sink)
    : sim_(sim), config_(config), sink_(std::move(sink)) {
  config_.validate();
  clients_.reserve(config_.client_count);
  const std::uint32_t first_bad = config_.client_count - config_.bad_network_clients;
  for (std::uint32_t i = 0; i < config_.client_count; ++i) {
    clients_.push_back(Client{i, make_stream(seed, "benign", i),
                              std::make_unique<HttpRequester>(sim, sw, addr_plan::benign(i),
                                                              addr_plan::kVictim),
                              i >= first_bad});
  }
}

std::vector<HostAddr> BenignPool::addresses() const {
  std::vector<HostAddr> out;
  for (const auto& c : clients_) out.push_back(c.requester->address());
  return out;
}

std::vector<HostAddr> BenignPool::bad_network_addresses() const {
  std::vector<HostAddr> out;
  for (const auto& c : clients_) {
    if (c.bad_network) out.push_back(c.requester->address());
  }
  return out;
}

void BenignPool::start() {
  const double mean_us = static_cast<double>(config_.request_interval.count());
  for (auto& c : clients_) {
    schedule_next(c, Duration{static_cast<std::int64_t>(uniform01(c.rng) * mean_us)});
  }
}

void BenignPool::schedule_next(Client& c, Duration delay) {
  sim_.schedule_in(delay, Target::kClient, [this, &c] { fire(c); });
}

void BenignPool::fire(Client& c) {
  RequestPlan plan{config_.target, 1, {}};
  if (c.bad_network) plan = RequestPlan{config_.target, 3, config_.bad_gap};
  c.requester->issue(plan, config_.patience, [this, &c](const RequestOutcome& out) {
    if (sink_) sink_(BenignOutcome{c.index, c.requester->address(), out});
    Duration think = Duration{static_cast<std::int64_t>(
        exponential(c.rng, static_cast<double>(config_.request_interval.count())))};
    if (out.kind == RequestOutcome::Kind::kRefused || out.kind == RequestOutcome::Kind::kReset) {
      think += config_.retry_backoff;
    }
    schedule_next(c, think);
  });
}

// ---------------------------------------------------------------------------
// Attack generators

AttackActor::AttackActor(Simulator& sim, Switch& sw, AttackConfig config, std::uint32_t occurrence,
                         std::uint64_t seed)
    : sim_(sim), sw_(sw), config_(config) {
  config_.validate();
  if (occurrence >= 16) throw std::invalid_argument("at most 16 attacks of one kind per scenario");
  const auto kind_index = static_cast<std::uint32_t>(config_.kind);
  sources_.reserve(config_.source_count);
  rngs_.reserve(config_.source_count);
  for (std::uint32_t i = 0; i < config_.source_count; ++i) {
    sources_.push_back(addr_plan::attacker(kind_index, occurrence, i));
    rngs_.push_back(make_stream(seed, to_string(config_.kind), occurrence, i));
  }
  stats_.per_source_requests.assign(config_.source_count, 0);
}

void AttackActor::note_sent(PacketKind kind) {
  switch (kind) {
    case PacketKind::kSyn: ++stats_.syn; break;
    case PacketKind::kAck: ++stats_.ack; break;
    case PacketKind::kData: ++stats_.data; break;
    default: break;
  }
  stats_.send_times.push_back(sim_.now());
}

SimTime AttackActor::paced(std::uint64_t k, double rate, Rng& rng) const {
  const double interval_us = 1e6 / rate;
  const double offset = static_cast<double>(k) * interval_us + uniform01(rng) * config_.jitter_fraction * interval_us;
  return config_.start + Duration{static_cast<std::int64_t>(std::llround(offset))};
}

namespace {

bool within(const AttackConfig& c, std::uint64_t k, double rate) {
  return static_cast<double>(k) * (1e6 / rate) < static_cast<double>(c.duration.count());
}

/// Spoofed SYNs, round-robin over source addresses, never answered.
class SynFlood final : public AttackActor {
 public:
  SynFlood(Simulator& sim, Switch& sw, const AttackConfig& c, std::uint32_t occ, std::uint64_t seed,
           HostAddr server)
      : AttackActor(sim, sw, c, occ, seed), server_(server) {}

  void start() override { schedule(0); }

 private:
  void schedule(std::uint64_t k) {
    if (!within(config_, k, config_.rate_pps)) return;
    const auto src = static_cast<std::size_t>(k % config_.source_count);
    const SimTime at = paced(k, config_.rate_pps, rngs_[src]);
    sim_.schedule(std::max(at, sim_.now()), Target::kAttacker, [this, k, src] {
      const auto port = static_cast<std::uint16_t>(1024 + rngs_[src]() % 64000);
      sw_.forward(make_packet(sim_.now(), sources_[src], port, server_, kHttpPort, PacketKind::kSyn));
      note_sent(PacketKind::kSyn);
      ++stats_.connections_opened;
      schedule(k + 1);
    });
  }

  HostAddr server_;
};

/// Full handshakes followed by a heavy GET; responses are never awaited.
class HttpFlood final : public AttackActor {
 public:
  HttpFlood(Simulator& sim, Switch& sw, const AttackConfig& c, std::uint32_t occ, std::uint64_t seed,
            HostAddr server)
      : AttackActor(sim, sw, c, occ, seed), server_(server) {
    for (std::uint32_t i = 0; i < config_.source_count; ++i) {
      endpoints_.push_back(std::make_unique<Endpoint>(sim, sw, sources_[i]));
    }
  }

  void start() override { schedule(0); }

 private:
  void schedule(std::uint64_t k) {
    if (!within(config_, k, config_.rate_pps)) return;
    const auto src = static_cast<std::size_t>(k % config_.source_count);
    const SimTime at = paced(k, config_.rate_pps, rngs_[src]);
    sim_.schedule(std::max(at, sim_.now()), Target::kAttacker, [this, k, src] {
      attempt(src);
      schedule(k + 1);
    });
  }

  void attempt(std::size_t src) {
    Endpoint& ep = *endpoints_[src];
    const std::uint16_t port = ep.free_port();
    const std::uint64_t id = ++attempts_;
    ep.bind(port, [this, src, port](const PacketEvent& pkt) { on_packet(src, port, pkt); });
    owner_[{src, port}] = id;
    ep.send(server_, port, PacketKind::kSyn);
    note_sent(PacketKind::kSyn);
    ++stats_.connections_opened;
    // Give up on the port after a while so it can be reused.
    sim_.schedule_in(secs(60), Target::kAttacker, [this, src, port, id] {
      auto it = owner_.find({src, port});
      if (it != owner_.end() && it->second == id) release(src, port);
    });
  }

  void release(std::size_t src, std::uint16_t port) {
    endpoints_[src]->unbind(port);
    owner_.erase({src, port});
  }

  void on_packet(std::size_t src, std::uint16_t port, const PacketEvent& pkt) {
    Endpoint& ep = *endpoints_[src];
    if (pkt.kind == PacketKind::kSynAck) {
      ep.send(server_, port, PacketKind::kAck);
      note_sent(PacketKind::kAck);
      ep.send(server_, port, PacketKind::kData, HttpGet{RequestTarget::kHeavy});
      note_sent(PacketKind::kData);
      ++stats_.requests;
      ++stats_.per_source_requests[src];
    } else if (pkt.kind == PacketKind::kRst || std::holds_alternative<HttpResponse>(pkt.payload)) {
      release(src, port);
    }
  }

  HostAddr server_;
  std::vector<std::unique_ptr<Endpoint>> endpoints_;
  std::map<std::pair<std::size_t, std::uint16_t>, std::uint64_t> owner_;
  std::uint64_t attempts_ = 0;
};

/// One TLS connection per source, renegotiated at the source's share of the rate.
class TlsFlood final : public AttackActor {
 public:
  TlsFlood(Simulator& sim, Switch& sw, const AttackConfig& c, std::uint32_t occ, std::uint64_t seed,
           HostAddr server)
      : AttackActor(sim, sw, c, occ, seed), server_(server), conns_(c.source_count) {
    for (std::uint32_t i = 0; i < config_.source_count; ++i) {
      endpoints_.push_back(std::make_unique<Endpoint>(sim, sw, sources_[i]));
    }
  }

  void start() override {
    for (std::uint32_t i = 0; i < config_.source_count; ++i) {
      const SimTime at = paced(i, config_.rate_pps, rngs_[i]);
      sim_.schedule(at, Target::kAttacker, [this, i] { open(i); });
      schedule_renegotiation(i, 1);
    }
  }

 private:
  struct Conn {
    std::optional<std::uint16_t> port;
    bool established = false;
  };

  void open(std::size_t src) {
    Endpoint& ep = *endpoints_[src];
    Conn& c = conns_[src];
    if (c.port) ep.unbind(*c.port);
    const std::uint16_t port = ep.free_port();
    c = Conn{port, false};
    ep.bind(port, [this, src, port](const PacketEvent& pkt) { on_packet(src, port, pkt); });
    ep.send(server_, port, PacketKind::kSyn);
    note_sent(PacketKind::kSyn);
    ++stats_.connections_opened;
  }

  void schedule_renegotiation(std::size_t src, std::uint64_t j) {
    const std::uint64_t k = src + j * config_.source_count;
    if (!within(config_, k, config_.rate_pps)) return;
    const SimTime at = paced(k, config_.rate_pps, rngs_[src]);
    sim_.schedule(std::max(at, sim_.now()), Target::kAttacker, [this, src, j] {
      Conn& c = conns_[src];
      if (c.port && c.established) {
        endpoints_[src]->send(server_, *c.port, PacketKind::kData, TlsRenegotiate{});
        note_sent(PacketKind::kData);
        ++stats_.renegotiations;
        ++stats_.per_source_requests[src];
      } else if (!c.port) {
        open(src);
      }
      schedule_renegotiation(src, j + 1);
    });
  }

  void on_packet(std::size_t src, std::uint16_t port, const PacketEvent& pkt) {
    Conn& c = conns_[src];
    if (c.port != port) return;
    if (pkt.kind == PacketKind::kSynAck && !c.established) {
      c.established = true;
      endpoints_[src]->send(server_, port, PacketKind::kAck);
      note_sent(PacketKind::kAck);
      endpoints_[src]->send(server_, port, PacketKind::kData, TlsHandshake{});
      note_sent(PacketKind::kData);
    } else if (pkt.kind == PacketKind::kRst) {
      endpoints_[src]->unbind(port);
      c = Conn{};
    }
  }

  HostAddr server_;
  std::vector<std::unique_ptr<Endpoint>> endpoints_;
  std::vector<Conn> conns_;
};

/**
 * Slow header / slow body. Each source ramps up one connection per second to
 * connections_per_source, then drips a non-final fragment on every connection
 * each slow_interval (+/- jitter). Slow body sends the whole POST header up
 * front and starts dripping one interval later. Lost connections are reopened
 * a second later.
 */
class SlowAttack final : public AttackActor {
 public:
  static constexpr Duration kRamp = secs(1);
  static constexpr Duration kConnectTimeout = secs(3);

  SlowAttack(Simulator& sim, Switch& sw, const AttackConfig& c, std::uint32_t occ,
             std::uint64_t seed, HostAddr server)
      : AttackActor(sim, sw, c, occ, seed),
        server_(server),
        body_(c.kind == AttackKind::kSlowBody),
        slots_(static_cast<std::size_t>(c.source_count) * c.connections_per_source) {
    for (std::uint32_t i = 0; i < config_.source_count; ++i) {
      endpoints_.push_back(std::make_unique<Endpoint>(sim, sw, sources_[i]));
    }
  }

  void start() override {
    const std::int64_t stagger = micros(kRamp) / config_.source_count;
    for (std::uint32_t i = 0; i < config_.source_count; ++i) {
      for (std::uint32_t j = 0; j < config_.connections_per_source; ++j) {
        const SimTime at = config_.start + kRamp * j + Duration{stagger * i};
        if (!active(at)) continue;
        const std::size_t slot = i * config_.connections_per_source + j;
        sim_.schedule(at, Target::kAttacker, [this, slot] { open(slot); });
      }
    }
  }

 private:
  struct Slot {
    std::optional<std::uint16_t> port;
    bool established = false;
    std::uint64_t generation = 0;
  };

  std::size_t source_of(std::size_t slot) const { return slot / config_.connections_per_source; }

  void open(std::size_t slot) {
    if (!active(sim_.now())) return;
    const std::size_t src = source_of(slot);
    Endpoint& ep = *endpoints_[src];
    Slot& s = slots_[slot];
    if (s.port) ep.unbind(*s.port);
    const std::uint16_t port = ep.free_port();
    s.port = port;
    s.established = false;
    const std::uint64_t gen = ++s.generation;
    ep.bind(port, [this, slot, gen](const PacketEvent& pkt) { on_packet(slot, gen, pkt); });
    ep.send(server_, port, PacketKind::kSyn);
    note_sent(PacketKind::kSyn);
    ++stats_.connections_opened;
    sim_.schedule_in(kConnectTimeout, Target::kAttacker, [this, slot, gen] {
      if (slots_[slot].generation == gen && !slots_[slot].established) open(slot);
    });
  }

  void lose(std::size_t slot) {
    Slot& s = slots_[slot];
    if (s.port) endpoints_[source_of(slot)]->unbind(*s.port);
    s.port.reset();
    s.established = false;
    const std::uint64_t gen = ++s.generation;
    sim_.schedule_in(kRamp, Target::kAttacker, [this, slot, gen] {
      if (slots_[slot].generation == gen) open(slot);
    });
  }

  void on_packet(std::size_t slot, std::uint64_t gen, const PacketEvent& pkt) {
    Slot& s = slots_[slot];
    if (s.generation != gen) return;
    if (pkt.kind == PacketKind::kRst) {
      lose(slot);
      return;
    }
    if (pkt.kind != PacketKind::kSynAck || s.established) return;
    s.established = true;
    Endpoint& ep = *endpoints_[source_of(slot)];
    ep.send(server_, *s.port, PacketKind::kAck);
    note_sent(PacketKind::kAck);
    if (body_) {
      ep.send(server_, *s.port, PacketKind::kData, HttpHeaderFragment{true, true, RequestTarget::kLight});
      note_sent(PacketKind::kData);
      schedule_drip(slot, gen);
      return;
    }
    drip(slot, gen);
  }

  void schedule_drip(std::size_t slot, std::uint64_t gen) {
    const double u = 2.0 * uniform01(rngs_[source_of(slot)]) - 1.0;
    const double gap = static_cast<double>(config_.slow_interval.count()) * (1.0 + config_.jitter_fraction * u);
    sim_.schedule_in(Duration{std::llround(gap)}, Target::kAttacker, [this, slot, gen] { drip(slot, gen); });
  }

  void drip(std::size_t slot, std::uint64_t gen) {
    Slot& s = slots_[slot];
    if (s.generation != gen || !s.established || !active(sim_.now())) return;
    const std::size_t src = source_of(slot);
    if (body_) {
      endpoints_[src]->send(server_, *s.port, PacketKind::kData, HttpPostFragment{false});
    } else {
      endpoints_[src]->send(server_, *s.port, PacketKind::kData,
                            HttpHeaderFragment{false, false, RequestTarget::kLight});
    }
    note_sent(PacketKind::kData);
    ++stats_.fragments;
    schedule_drip(slot, gen);
  }

  HostAddr server_;
  bool body_;
  std::vector<std::unique_ptr<Endpoint>> endpoints_;
  std::vector<Slot> slots_;
};

}  // namespace

std::unique_ptr<AttackActor> spawn_attack(Simulator& sim, Switch& sw, const AttackConfig& config,
                                          std::uint32_t occurrence, std::uint64_t seed,
                                          HostAddr server) {
  switch (config.kind) {
    case AttackKind::kSynFlood: return std::make_unique<SynFlood>(sim, sw, config, occurrence, seed, server);
    case AttackKind::kHttpFlood: return std::make_unique<HttpFlood>(sim, sw, config, occurrence, seed, server);
    case AttackKind::kTlsFlood: return std::make_unique<TlsFlood>(sim, sw, config, occurrence, seed, server);
    case AttackKind::kSlowHeader:
    case AttackKind::kSlowBody: return std::make_unique<SlowAttack>(sim, sw, config, occurrence, seed, server);
  }
  throw std::invalid_argument("unknown attack kind");
}

}  // namespace ddsim
