#include "ddsim/sentinel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace ddsim {

void SentinelConfig::validate() const {
  auto require = [](bool ok, std::string_view field) {
    if (!ok) throw std::invalid_argument(fmt::format("thresholds.{} out of range", field));
  };
  require(probe_interval > Duration::zero(), "probe_interval_s");
  require(probe_timeout > Duration::zero(), "probe_timeout_s");
  require(threshold_factor > 0.0, "threshold_factor");
  require(consecutive_needed > 0, "consecutive_needed");
  require(warmup_probes > 0, "warmup_probes");
  require(clear_windows > 0, "clear_windows");
  require(window > Duration::zero(), "window_s");
  require(conn_track_timeout > Duration::zero(), "conn_track_timeout_s");
  require(syn_ratio >= 0.0 && syn_ratio <= 1.0, "syn_ratio");
  require(spike_factor >= 0.0, "spike_factor");
  require(slow_fraction >= 0.0, "slow_fraction");
  require(table_capacity_estimate > 0, "table_capacity_estimate");
  require(sustainable_heavy_rate > 0.0, "sustainable_heavy_rate");
  require(http_flood_factor >= 0.0, "http_flood_factor");
  require(tls_renegotiation_rate >= 0.0, "tls_renegotiation_rate");
  require(slow_gap >= Duration::zero(), "slow_gap_s");
  require(id_heavy_rate >= 0.0, "id_heavy_rate");
  require(id_gap_cv >= 0.0, "id_gap_cv");
}

// ---------------------------------------------------------------------------
// TrafficWindow

TrafficWindow::TrafficWindow(HostAddr victim, Duration window, Duration conn_track_timeout)
    : victim_(victim), window_(window), track_timeout_(conn_track_timeout) {}

void TrafficWindow::apply(const Entry& e, int sign) {
  auto bump = [sign](std::uint64_t& v, std::uint64_t by = 1) {
    v = sign > 0 ? v + by : v - by;
  };
  for (Counters* c : {&counters_[e.src], &totals_}) {
    bump(c->packets);
    bump(c->bytes, e.bytes);
    if (e.kind == PacketKind::kSyn) bump(c->syn);
    if (e.kind == PacketKind::kAck) bump(c->ack);
    if (e.kind == PacketKind::kData) bump(c->data);
    if (e.heavy) bump(c->heavy);
    if (e.renegotiate) bump(c->reneg);
  }
}

void TrafficWindow::observe(const PacketEvent& pkt, SimTime now) {
  track(pkt, now);
  if (pkt.dst != victim_) return;

  const Entry e{next_seq_++, now, pkt.src, pkt.src_port, pkt.kind,
                is_heavy_request(pkt.payload),
                std::holds_alternative<TlsRenegotiate>(pkt.payload), pkt.size_bytes};
  entries_.push_back(e);
  apply(e, +1);

  const ConnectionKey key{pkt.src, pkt.src_port};
  if (pkt.kind == PacketKind::kSyn) {
    pending_syns_[key].push_back(e.seq);
    ++counters_[pkt.src].half_open;
  } else if (pkt.kind == PacketKind::kAck) {
    auto it = pending_syns_.find(key);
    if (it != pending_syns_.end()) {
      counters_[pkt.src].half_open -= it->second.size();
      pending_syns_.erase(it);
    }
  }
}

void TrafficWindow::track(const PacketEvent& pkt, SimTime now) {
  const bool inbound = pkt.dst == victim_;
  const ConnectionKey key = inbound ? ConnectionKey{pkt.src, pkt.src_port}
                                    : ConnectionKey{pkt.dst, pkt.dst_port};
  if (pkt.kind == PacketKind::kRst || pkt.kind == PacketKind::kFin ||
      (inbound && pkt.kind == PacketKind::kSyn)) {
    conns_.erase(key);
    return;
  }
  if (!inbound || pkt.kind != PacketKind::kData) return;

  auto touch = [&](bool body) {
    auto [it, fresh] = conns_.try_emplace(key);
    TrackedConn& c = it->second;
    if (!fresh) {
      c.gaps.push_back(now - c.last_fragment);
      if (c.gaps.size() > ConnectionRecord::kGapHistory) c.gaps.pop_front();
    }
    c.last_fragment = now;
    c.body = body;
  };

  if (const auto* h = std::get_if<HttpHeaderFragment>(&pkt.payload)) {
    if (!h->final) {
      touch(false);
    } else if (h->post) {
      touch(true);
    } else {
      conns_.erase(key);
    }
  } else if (const auto* b = std::get_if<HttpPostFragment>(&pkt.payload)) {
    if (!b->final) {
      touch(true);
    } else {
      conns_.erase(key);
    }
  } else if (std::holds_alternative<HttpGet>(pkt.payload)) {
    conns_.erase(key);
  }
}

void TrafficWindow::advance(SimTime now) {
  const SimTime horizon = now - window_;
  while (!entries_.empty() && entries_.front().at <= horizon) {
    const Entry e = entries_.front();
    entries_.pop_front();
    apply(e, -1);
    if (e.kind == PacketKind::kSyn) {
      const ConnectionKey key{e.src, e.port};
      auto it = pending_syns_.find(key);
      if (it != pending_syns_.end() && !it->second.empty() && it->second.front() == e.seq) {
        it->second.pop_front();
        --counters_[e.src].half_open;
        if (it->second.empty()) pending_syns_.erase(it);
      }
    }
    auto c = counters_.find(e.src);
    if (c != counters_.end() && c->second.packets == 0 && c->second.half_open == 0) counters_.erase(c);
  }
  std::erase_if(conns_, [&](const auto& kv) { return now - kv.second.last_fragment > track_timeout_; });
}

namespace {

struct GapAccumulator {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(Duration d) {
    const double s = to_seconds(d);
    ++n;
    sum += s;
    sum_sq += s * s;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double cv() const {
    const double m = mean();
    if (m <= 0.0) return 0.0;
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - m * m);
    return std::sqrt(var) / m;
  }
};

}  // namespace

SourceStats TrafficWindow::stats_for(HostAddr src, SimTime now) const {
  SourceStats s;
  if (auto it = counters_.find(src); it != counters_.end()) {
    const Counters& c = it->second;
    s.syn_count = c.syn;
    s.ack_count = c.ack;
    s.data_count = c.data;
    s.half_open_live = c.half_open;
    s.requests_heavy = c.heavy;
    s.renegotiations = c.reneg;
    s.bytes = c.bytes;
  }
  GapAccumulator gaps;
  for (auto it = conns_.lower_bound(ConnectionKey{src, 0}); it != conns_.end() && it->first.src == src; ++it) {
    ++s.incomplete_connections;
    ++(it->second.body ? s.incomplete_body : s.incomplete_header);
    for (Duration g : it->second.gaps) gaps.add(g);
    gaps.add(now - it->second.last_fragment);
  }
  s.gap_samples = gaps.n;
  if (gaps.n >= 3) {
    s.gap_mean_s = gaps.mean();
    s.gap_cv = gaps.cv();
  }
  return s;
}

std::map<HostAddr, SourceStats> TrafficWindow::all_stats(SimTime now) const {
  std::set<HostAddr> sources;
  for (const auto& [addr, c] : counters_) sources.insert(addr);
  for (const auto& [key, c] : conns_) sources.insert(key.src);
  std::map<HostAddr, SourceStats> out;
  for (HostAddr a : sources) out.emplace(a, stats_for(a, now));
  return out;
}

WindowAggregate TrafficWindow::aggregate(SimTime now, Duration slow_gap) const {
  WindowAggregate agg;
  const double w = to_seconds(window_);
  agg.total_packets = totals_.packets;
  agg.total_syns = totals_.syn;
  agg.packet_rate_pps = static_cast<double>(totals_.packets) / w;
  agg.heavy_request_rate = static_cast<double>(totals_.heavy) / w;
  agg.renegotiation_rate = static_cast<double>(totals_.reneg) / w;
  const double threshold = to_seconds(slow_gap);
  for (const auto& [key, c] : conns_) {
    GapAccumulator g;
    for (Duration d : c.gaps) g.add(d);
    g.add(now - c.last_fragment);
    if (g.mean() >= threshold) ++(c.body ? agg.slow_body_connections : agg.slow_header_connections);
  }
  return agg;
}

// ---------------------------------------------------------------------------
// classify / identify

std::set<AttackClass> classify(const WindowAggregate& agg, const SentinelConfig& cfg) {
  std::set<AttackClass> out;
  if (agg.total_packets > 0 &&
      static_cast<double>(agg.total_syns) / static_cast<double>(agg.total_packets) > cfg.syn_ratio &&
      agg.packet_rate_pps > cfg.spike_factor * agg.baseline_packet_rate_pps) {
    out.insert(AttackClass::kSynFlood);
  }
  const double slow_needed = cfg.slow_fraction * cfg.table_capacity_estimate;
  if (agg.slow_header_connections > 0 && static_cast<double>(agg.slow_header_connections) >= slow_needed) {
    out.insert(AttackClass::kSlowHeader);
  }
  if (agg.slow_body_connections > 0 && static_cast<double>(agg.slow_body_connections) >= slow_needed) {
    out.insert(AttackClass::kSlowBody);
  }
  if (agg.heavy_request_rate > cfg.http_flood_factor * cfg.sustainable_heavy_rate) {
    out.insert(AttackClass::kHttpFlood);
  }
  if (agg.renegotiation_rate > cfg.tls_renegotiation_rate) out.insert(AttackClass::kTlsFlood);
  return out;
}

std::vector<HostAddr> identify(AttackClass cls, const std::map<HostAddr, SourceStats>& stats,
                               const SentinelConfig& cfg, const std::set<HostAddr>& excluded) {
  const double w = to_seconds(cfg.window);
  const double slow_gap = to_seconds(cfg.slow_gap);
  auto slow = [&](const SourceStats& s, std::uint64_t incomplete) {
    return incomplete >= cfg.id_incomplete && s.gap_mean_s && *s.gap_mean_s >= slow_gap && s.gap_cv &&
           *s.gap_cv <= cfg.id_gap_cv;
  };
  std::vector<HostAddr> out;
  for (const auto& [addr, s] : stats) {
    const HostRole role = addr.role();
    if (role == HostRole::kProber || role == HostRole::kVictim || role == HostRole::kSentinel) continue;
    if (excluded.count(addr) != 0) continue;
    bool hit = false;
    switch (cls) {
      case AttackClass::kSynFlood: hit = s.half_open_live >= cfg.id_half_open; break;
      case AttackClass::kHttpFlood: hit = static_cast<double>(s.requests_heavy) / w > cfg.id_heavy_rate; break;
      case AttackClass::kTlsFlood: hit = s.renegotiations >= cfg.id_renegotiations; break;
      case AttackClass::kSlowHeader: hit = slow(s, s.incomplete_header); break;
      case AttackClass::kSlowBody: hit = slow(s, s.incomplete_body); break;
    }
    if (hit) out.push_back(addr);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ProbeState

std::string_view to_string(ProbeResult::Kind k) {
  switch (k) {
    case ProbeResult::Kind::kRtt: return "ok";
    case ProbeResult::Kind::kTimeout: return "timeout";
    case ProbeResult::Kind::kRefused: return "refused";
  }
  return "?";
}

void ProbeState::record(const ProbeResult& r) {
  history_.push_back(r);
  if (history_.size() > kHistoryLimit) history_.pop_front();
  if (baseline_ || r.kind != ProbeResult::Kind::kRtt) return;
  warmup_.push_back(r.rtt);
  if (warmup_.size() >= cfg_.warmup_probes) {
    std::vector<Duration> sorted = warmup_;
    std::sort(sorted.begin(), sorted.end());
    baseline_ = sorted[(sorted.size() - 1) / 2];
  }
}

std::optional<Duration> ProbeState::threshold() const {
  if (!baseline_) return std::nullopt;
  return Duration{std::llround(cfg_.threshold_factor * static_cast<double>(baseline_->count()))};
}

bool ProbeState::exceeds(const ProbeResult& r) const {
  if (r.kind != ProbeResult::Kind::kRtt) return true;
  const auto t = threshold();
  return t && r.rtt > *t;
}

bool ProbeState::alarm_check() {
  if (!baseline_) {
    ++premature_checks_;
    return false;
  }
  if (history_.size() < cfg_.consecutive_needed) return false;
  return std::all_of(history_.end() - cfg_.consecutive_needed, history_.end(),
                     [this](const ProbeResult& r) { return exceeds(r); });
}

// ---------------------------------------------------------------------------
// Sentinel

std::string format_evidence(const SourceStats& s) {
  auto opt = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.3f}", *v) : std::string("-");
  };
  return fmt::format(
      "syn={},ack={},data={},half_open={},heavy={},reneg={},incomplete={},gap_mean={},gap_cv={},bytes={}",
      s.syn_count, s.ack_count, s.data_count, s.half_open_live, s.requests_heavy, s.renegotiations,
      s.incomplete_connections, opt(s.gap_mean_s), opt(s.gap_cv), s.bytes);
}

Sentinel::Sentinel(Simulator& sim, Switch& sw, SentinelConfig cfg, Options opts, EventLog* log,
                   DetectionSink sink, HostAddr victim)
    : sim_(sim),
      cfg_(cfg),
      opts_(opts),
      log_(log),
      sink_(std::move(sink)),
      victim_(victim),
      prober_(sim, sw, addr_plan::kProber, victim),
      probe_(cfg_),
      window_(victim, cfg_.window, cfg_.conn_track_timeout) {
  cfg_.validate();
  if (opts_.analysis) sw.attach_tap([this](const PacketEvent& pkt) { observe(pkt); });
}

void Sentinel::start() {
  sim_.schedule(sim_.now(), Target::kSentinel, [this] { probe_tick(); });
  if (opts_.analysis) {
    sim_.schedule(sim_.now() + secs(1), Target::kSentinel, [this] { window_tick(); });
  }
}

void Sentinel::log(std::string kind, std::string detail) {
  if (log_ != nullptr) log_->add(sim_.now(), std::move(kind), std::move(detail));
}

void Sentinel::probe_tick() {
  prober_.issue(RequestPlan{RequestTarget::kLight, 1, {}}, cfg_.probe_timeout,
                [this](const RequestOutcome& out) { on_probe(out); });
  sim_.schedule_in(cfg_.probe_interval, Target::kSentinel, [this] { probe_tick(); });
}

void Sentinel::on_probe(const RequestOutcome& out) {
  ProbeResult r{out.started, out.finished, ProbeResult::Kind::kRtt, out.response_time()};
  if (out.kind == RequestOutcome::Kind::kTimedOut) r.kind = ProbeResult::Kind::kTimeout;
  if (out.kind == RequestOutcome::Kind::kRefused || out.kind == RequestOutcome::Kind::kReset) {
    r.kind = ProbeResult::Kind::kRefused;
  }
  probe_.record(r);
  results_.push_back(r);
  if (!opts_.analysis || latched_) return;
  if (probe_.alarm_check()) {
    latched_ = true;
    clear_streak_ = 0;
    log("ALARM", fmt::format("baseline_ms={:.3f}\tlast={}", to_seconds(*probe_.baseline()) * 1e3,
                             to_string(r.kind)));
  }
}

void Sentinel::observe(const PacketEvent& pkt) {
  const SimTime now = sim_.now();
  if (opts_.record_tap) tap_log_.push_back(TapRecord{now, pkt});
  if (pkt.dst == victim_ && now < opts_.warmup_end) ++warmup_packets_;
  window_.observe(pkt, now);
}

double Sentinel::baseline_packet_rate() const {
  const SimTime now = sim_.now();
  const SimTime until = std::min(now, opts_.warmup_end);
  const double elapsed = to_seconds(until - kSimStart);
  return elapsed > 0.0 ? static_cast<double>(warmup_packets_) / elapsed : 0.0;
}

std::vector<DetectionEvent> Sentinel::window_tick() {
  sim_.schedule_in(secs(1), Target::kSentinel, [this] { window_tick(); });
  const SimTime now = sim_.now();
  window_.advance(now);
  WindowAggregate agg = window_.aggregate(now, cfg_.slow_gap);
  agg.baseline_packet_rate_pps = baseline_packet_rate();
  const std::set<AttackClass> classes = classify(agg, cfg_);
  if (window_observer_) window_observer_(now, agg, classes, latched_);

  std::vector<DetectionEvent> emitted;
  if (!latched_) return emitted;

  if (classes.empty()) {
    if (!unclassified_logged_) {
      log("UNCLASSIFIED", fmt::format("packet_rate={:.1f}", agg.packet_rate_pps));
      unclassified_logged_ = true;
    }
  } else {
    unclassified_logged_ = false;
    const auto stats = window_.all_stats(now);
    for (AttackClass cls : classes) {
      std::vector<HostAddr> attackers = identify(cls, stats, cfg_, reported_);
      if (attackers.empty()) continue;
      DetectionEvent ev{now, cls, attackers, {}};
      std::string addrs;
      std::string evidence;
      for (HostAddr a : attackers) {
        reported_.insert(a);
        const SourceStats& s = stats.at(a);
        ev.evidence.emplace_back(a, s);
        if (!addrs.empty()) {
          addrs += ',';
          evidence += ';';
        }
        addrs += a.to_string();
        evidence += a.to_string() + ':' + format_evidence(s);
      }
      log("DETECT", fmt::format("class={}\tcount={}\tattackers={}\tevidence={}", to_string(cls),
                                attackers.size(), addrs, evidence));
      detections_.push_back(ev);
      emitted.push_back(ev);
      if (sink_) sink_(ev);
    }
  }

  const bool probe_ok = !results_.empty() && !probe_.exceeds(results_.back());
  clear_streak_ = classes.empty() && probe_ok ? clear_streak_ + 1 : 0;
  if (clear_streak_ >= cfg_.clear_windows) {
    latched_ = false;
    clear_streak_ = 0;
    unclassified_logged_ = false;
    log("ALL_CLEAR");
  }
  return emitted;
}

}  // namespace ddsim
