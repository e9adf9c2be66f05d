#include "ddsim/victim.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace ddsim {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kSynReceived: return "SYN_RECEIVED";
    case Phase::kEstablished: return "ESTABLISHED";
    case Phase::kReceivingHeader: return "RECEIVING_HEADER";
    case Phase::kReceivingBody: return "RECEIVING_BODY";
    case Phase::kQueued: return "QUEUED";
    case Phase::kProcessing: return "PROCESSING";
    case Phase::kClosed: return "CLOSED";
  }
  return "?";
}

void ServerConfig::validate() const {
  auto require = [](bool ok, std::string_view field) {
    if (!ok) throw std::invalid_argument(fmt::format("server.{} must be positive", field));
  };
  require(table_capacity > 0, "table_capacity");
  require(syn_timeout > Duration::zero(), "syn_timeout_s");
  require(header_timeout > Duration::zero(), "header_timeout_s");
  require(body_timeout > Duration::zero(), "body_timeout_s");
  require(cpu_capacity_ups > 0, "cpu_capacity_ups");
  require(heavy_request_cost > 0, "heavy_request_cost");
  require(light_request_cost > 0, "light_request_cost");
  require(tls_handshake_cost > 0, "tls_handshake_cost");
  require(cpu_queue_limit > 0, "cpu_queue_limit");
  if (heavy_request_cost < light_request_cost) {
    throw std::invalid_argument("server.heavy_request_cost must be >= light_request_cost");
  }
}

Duration ServerConfig::service_time(std::uint32_t cost) const {
  const std::uint64_t num = static_cast<std::uint64_t>(cost) * 1'000'000ULL;
  return Duration{static_cast<std::int64_t>((num + cpu_capacity_ups - 1) / cpu_capacity_ups)};
}

Server::Server(Simulator& sim, ServerConfig config, HostAddr self, Send send)
    : sim_(sim), config_(config), self_(self), send_(std::move(send)) {
  config_.validate();
  last_sample_ = sim_.now();
  busy_mark_ = sim_.now();
}

void Server::receive(const PacketEvent& pkt) {
  ++counters_.inbound_packets;
  ++second_.inbound_packets;
  switch (pkt.kind) {
    case PacketKind::kSyn: on_syn(pkt); break;
    case PacketKind::kAck: on_ack(pkt); break;
    case PacketKind::kData: on_data(pkt); break;
    case PacketKind::kRst:
    case PacketKind::kFin: on_close(pkt); break;
    case PacketKind::kSynAck: ++counters_.protocol_errors; break;
  }
}

const ConnectionRecord* Server::find(const ConnectionKey& key) const {
  auto it = table_.find(key);
  return it == table_.end() ? nullptr : &it->second;
}

void Server::set_phase(ConnectionRecord& rec, Phase p) {
  rec.phase = p;
  if (phase_observer_) phase_observer_(rec.key, p);
}

void Server::arm(ConnectionRecord& rec, TimeoutKind which) {
  disarm(rec);
  Duration after = config_.syn_timeout;
  if (which == TimeoutKind::kHeader) after = config_.header_timeout;
  if (which == TimeoutKind::kBody) after = config_.body_timeout;
  const ConnectionKey key = rec.key;
  rec.timer = sim_.schedule_in(after, Target::kVictim, [this, key, which] { on_timeout(key, which); });
}

void Server::disarm(ConnectionRecord& rec) {
  if (rec.timer) sim_.cancel(*rec.timer);
  rec.timer.reset();
}

void Server::free_record(const ConnectionKey& key) {
  auto it = table_.find(key);
  if (it == table_.end()) return;
  disarm(it->second);
  if (phase_observer_) phase_observer_(key, Phase::kClosed);
  table_.erase(it);
}

void Server::reply(const ConnectionKey& key, std::uint16_t dst_port, PacketKind kind,
                   Payload payload) {
  send_(make_packet(sim_.now(), self_, kHttpPort, key.src, dst_port, kind, std::move(payload)));
}

void Server::reset(const ConnectionKey& key) {
  reply(key, key.port, PacketKind::kRst);
  free_record(key);
}

Reaction Server::on_syn(const PacketEvent& pkt) {
  const ConnectionKey key{pkt.src, pkt.src_port};
  if (table_.count(key) != 0) {
    ++counters_.duplicate_syn;
    return Reaction::kDuplicateSyn;
  }
  if (table_.size() >= config_.table_capacity) {
    ++counters_.rejected_full;
    ++second_.rejected_count;
    reply(key, key.port, PacketKind::kRst);
    return Reaction::kRejectedFull;
  }
  auto& rec = table_.emplace(key, ConnectionRecord{}).first->second;
  rec.key = key;
  rec.opened_at = sim_.now();
  rec.last_packet_at = sim_.now();
  set_phase(rec, Phase::kSynReceived);
  arm(rec, TimeoutKind::kSyn);
  ++counters_.syn_accepted;
  const auto occ = occupancy();
  counters_.peak_occupancy = std::max(counters_.peak_occupancy, occ);
  if (occ == config_.table_capacity && !counters_.first_full_at) counters_.first_full_at = sim_.now();
  reply(key, key.port, PacketKind::kSynAck);
  return Reaction::kSynAckSent;
}

Reaction Server::on_ack(const PacketEvent& pkt) {
  auto it = table_.find(ConnectionKey{pkt.src, pkt.src_port});
  if (it == table_.end() || it->second.phase != Phase::kSynReceived) {
    ++counters_.stray_acks;
    return Reaction::kIgnored;
  }
  auto& rec = it->second;
  rec.last_packet_at = sim_.now();
  set_phase(rec, Phase::kEstablished);
  arm(rec, TimeoutKind::kHeader);
  return Reaction::kEstablished;
}

Reaction Server::on_data(const PacketEvent& pkt) {
  const ConnectionKey key{pkt.src, pkt.src_port};
  auto it = table_.find(key);
  if (it == table_.end()) {
    ++counters_.protocol_errors;
    return Reaction::kIgnored;
  }
  auto& rec = it->second;
  if (rec.phase == Phase::kSynReceived) {
    ++counters_.protocol_errors;
    ++counters_.protocol_resets;
    reset(key);
    return Reaction::kProtocolError;
  }
  if (rec.phase == Phase::kQueued || rec.phase == Phase::kProcessing) {
    ++counters_.protocol_errors;
    return Reaction::kIgnored;
  }

  const SimTime now = sim_.now();
  rec.inter_packet_gaps.push_back(now - rec.last_packet_at);
  if (rec.inter_packet_gaps.size() > ConnectionRecord::kGapHistory) rec.inter_packet_gaps.pop_front();
  rec.last_packet_at = now;

  auto cost_of = [&](RequestTarget t) {
    return t == RequestTarget::kHeavy ? config_.heavy_request_cost : config_.light_request_cost;
  };

  if (const auto* get = std::get_if<HttpGet>(&pkt.payload)) {
    if (rec.phase != Phase::kEstablished) {
      ++counters_.protocol_errors;
      ++counters_.protocol_resets;
      reset(key);
      return Reaction::kProtocolError;
    }
    return enqueue(rec, cost_of(get->target), JobKind::kRequest);
  }
  if (const auto* frag = std::get_if<HttpHeaderFragment>(&pkt.payload)) {
    if (rec.phase != Phase::kEstablished && rec.phase != Phase::kReceivingHeader) {
      ++counters_.protocol_errors;
      ++counters_.protocol_resets;
      reset(key);
      return Reaction::kProtocolError;
    }
    if (rec.phase == Phase::kEstablished) set_phase(rec, Phase::kReceivingHeader);
    if (!frag->final) {
      arm(rec, TimeoutKind::kHeader);
      return Reaction::kNeedMore;
    }
    if (frag->post) {
      set_phase(rec, Phase::kReceivingBody);
      arm(rec, TimeoutKind::kBody);
      return Reaction::kNeedMore;
    }
    return enqueue(rec, cost_of(frag->target), JobKind::kRequest);
  }
  if (const auto* body = std::get_if<HttpPostFragment>(&pkt.payload)) {
    if (rec.phase != Phase::kReceivingBody) {
      ++counters_.protocol_errors;
      ++counters_.protocol_resets;
      reset(key);
      return Reaction::kProtocolError;
    }
    if (!body->final) {
      arm(rec, TimeoutKind::kBody);
      return Reaction::kNeedMore;
    }
    return enqueue(rec, config_.light_request_cost, JobKind::kRequest);
  }
  if (std::holds_alternative<TlsHandshake>(pkt.payload) ||
      std::holds_alternative<TlsRenegotiate>(pkt.payload)) {
    if (rec.phase != Phase::kEstablished) {
      ++counters_.protocol_errors;
      ++counters_.protocol_resets;
      reset(key);
      return Reaction::kProtocolError;
    }
    arm(rec, TimeoutKind::kHeader);
    const Reaction r = enqueue(rec, config_.tls_handshake_cost, JobKind::kTls);
    return r == Reaction::kRequestQueued ? Reaction::kTlsRenegotiated : r;
  }
  ++counters_.protocol_errors;
  return Reaction::kIgnored;
}

Reaction Server::on_close(const PacketEvent& pkt) {
  const ConnectionKey key{pkt.src, pkt.src_port};
  if (table_.count(key) == 0) return Reaction::kIgnored;
  ++counters_.closed_by_peer;
  free_record(key);
  return Reaction::kClosed;
}

Reaction Server::on_timeout(const ConnectionKey& key, TimeoutKind which) {
  auto it = table_.find(key);
  if (it == table_.end()) return Reaction::kIgnored;
  it->second.timer.reset();
  const auto idx = static_cast<std::size_t>(which);
  ++counters_.timeouts[idx];
  ++second_.timeout_counts[idx];
  if (which == TimeoutKind::kSyn) {
    free_record(key);
  } else {
    reset(key);
  }
  return Reaction::kFreed;
}

Reaction Server::enqueue(ConnectionRecord& rec, std::uint32_t cost, JobKind kind) {
  if (cpu_queue_.size() >= config_.cpu_queue_limit) {
    ++counters_.cpu_rejected;
    reset(rec.key);
    return Reaction::kCpuRejected;
  }
  if (kind == JobKind::kRequest) {
    disarm(rec);
    set_phase(rec, Phase::kQueued);
  }
  cpu_queue_.push_back(Job{rec.key, cost, kind});
  counters_.units_enqueued += cost;
  start_next();
  return Reaction::kRequestQueued;
}

void Server::account_busy(SimTime now) {
  if (in_service_) busy_us_in_second_ += micros(now - busy_mark_);
  busy_mark_ = now;
}

void Server::start_next() {
  if (in_service_ || cpu_queue_.empty()) return;
  account_busy(sim_.now());
  in_service_ = cpu_queue_.front();
  cpu_queue_.pop_front();
  auto it = table_.find(in_service_->key);
  if (it != table_.end() && in_service_->kind == JobKind::kRequest) set_phase(it->second, Phase::kProcessing);
  sim_.schedule_in(config_.service_time(in_service_->cost), Target::kVictim, [this] { finish_job(); });
}

void Server::finish_job() {
  account_busy(sim_.now());
  const Job job = *in_service_;
  in_service_.reset();
  counters_.units_dispatched += job.cost;
  ++counters_.jobs_dispatched;

  auto it = table_.find(job.key);
  if (it != table_.end()) {
    if (job.kind == JobKind::kRequest) {
      reply(job.key, job.key.port, PacketKind::kData, HttpResponse{});
      ++counters_.completed;
      free_record(job.key);
    } else {
      reply(job.key, job.key.port, PacketKind::kData, TlsHandshake{});
    }
  }
  start_next();
}

VictimSample Server::metrics_sample(SimTime now) {
  account_busy(now);
  VictimSample out = second_;
  out.occupancy = occupancy();
  const auto elapsed = micros(now - last_sample_);
  out.cpu_utilization = elapsed > 0 ? static_cast<double>(busy_us_in_second_) / static_cast<double>(elapsed) : 0.0;
  busy_us_in_second_ = 0;
  last_sample_ = now;
  second_ = VictimSample{};
  return out;
}

}  // namespace ddsim
