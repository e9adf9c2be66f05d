#include "window_oracle.hpp"

#include <cmath>
#include <numeric>

namespace ddsim::testing {

namespace {

struct Conn {
  bool body = false;
  std::vector<SimTime> touches;
};

ConnectionKey key_of(const PacketEvent& p, HostAddr victim) {
  return p.dst == victim ? ConnectionKey{p.src, p.src_port} : ConnectionKey{p.dst, p.dst_port};
}

}  // namespace

std::map<HostAddr, SourceStats> recount(const std::vector<TapRecord>& log, SimTime now, Duration window,
                                        HostAddr victim) {
  std::map<HostAddr, SourceStats> out;

  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& [at, p] = log[i];
    if (at > now) break;
    if (p.dst != victim || at <= now - window) continue;
    SourceStats& s = out[p.src];
    s.bytes += p.size_bytes;
    if (p.kind == PacketKind::kSyn) {
      ++s.syn_count;
      bool acked = false;
      for (std::size_t j = i + 1; j < log.size() && log[j].tap_at <= now; ++j) {
        const PacketEvent& q = log[j].packet;
        if (q.dst == victim && q.src == p.src && q.src_port == p.src_port && q.kind == PacketKind::kAck) {
          acked = true;
          break;
        }
      }
      if (!acked) ++s.half_open_live;
    }
    if (p.kind == PacketKind::kAck) ++s.ack_count;
    if (p.kind == PacketKind::kData) ++s.data_count;
    if (is_heavy_request(p.payload)) ++s.requests_heavy;
    if (std::holds_alternative<TlsRenegotiate>(p.payload)) ++s.renegotiations;
  }

  // Connection replay: a tracked connection is one whose request is still
  // unfinished after a fragment was seen.
  std::map<ConnectionKey, Conn> conns;
  for (const auto& [at, p] : log) {
    if (at > now) break;
    const bool inbound = p.dst == victim;
    const ConnectionKey key = key_of(p, victim);
    const bool closes = p.kind == PacketKind::kRst || p.kind == PacketKind::kFin ||
                        (inbound && p.kind == PacketKind::kSyn);
    if (closes) {
      conns.erase(key);
      continue;
    }
    if (!inbound || p.kind != PacketKind::kData) continue;
    if (const auto* h = std::get_if<HttpHeaderFragment>(&p.payload)) {
      if (h->final && !h->post) {
        conns.erase(key);
      } else {
        Conn& c = conns[key];
        c.body = h->final;
        c.touches.push_back(at);
      }
    } else if (const auto* b = std::get_if<HttpPostFragment>(&p.payload)) {
      if (b->final) {
        conns.erase(key);
      } else {
        Conn& c = conns[key];
        c.body = true;
        c.touches.push_back(at);
      }
    } else if (std::holds_alternative<HttpGet>(p.payload)) {
      conns.erase(key);
    }
  }

  std::map<HostAddr, std::vector<double>> gaps;
  for (const auto& [key, c] : conns) {
    SourceStats& s = out[key.src];
    ++s.incomplete_connections;
    ++(c.body ? s.incomplete_body : s.incomplete_header);
    std::vector<double> g;
    for (std::size_t i = 1; i < c.touches.size(); ++i) g.push_back(to_seconds(c.touches[i] - c.touches[i - 1]));
    if (g.size() > ConnectionRecord::kGapHistory) g.erase(g.begin(), g.end() - ConnectionRecord::kGapHistory);
    g.push_back(to_seconds(now - c.touches.back()));
    auto& all = gaps[key.src];
    all.insert(all.end(), g.begin(), g.end());
  }
  for (auto& [src, g] : gaps) {
    SourceStats& s = out[src];
    s.gap_samples = g.size();
    if (g.size() < 3) continue;
    const double n = static_cast<double>(g.size());
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : g) ss += (x - mean) * (x - mean);
    s.gap_mean_s = mean;
    s.gap_cv = mean > 0.0 ? std::sqrt(ss / n) / mean : 0.0;
  }
  return out;
}

}  // namespace ddsim::testing
