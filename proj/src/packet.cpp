#include "ddsim/packet.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace ddsim {

std::string_view to_string(HostRole r) {
  switch (r) {
    case HostRole::kVictim: return "victim";
    case HostRole::kSentinel: return "sentinel";
    case HostRole::kBenign: return "benign";
    case HostRole::kAttacker: return "attacker";
    case HostRole::kProber: return "prober";
    case HostRole::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

HostRole HostAddr::role() const {
  if (*this == addr_plan::kVictim) return HostRole::kVictim;
  if (*this == addr_plan::kSentinel) return HostRole::kSentinel;
  if (*this == addr_plan::kProber) return HostRole::kProber;
  if ((value & 0xffff0000u) == addr_plan::kBenignBase) return HostRole::kBenign;
  if ((value & 0xff800000u) == addr_plan::kAttackerBase) return HostRole::kAttacker;
  return HostRole::kUnassigned;
}

std::string HostAddr::to_string() const {
  return fmt::format("{}.{}.{}.{}", value >> 24, (value >> 16) & 0xff, (value >> 8) & 0xff,
                     value & 0xff);
}

std::string_view to_string(PacketKind k) {
  switch (k) {
    case PacketKind::kSyn: return "SYN";
    case PacketKind::kSynAck: return "SYN_ACK";
    case PacketKind::kAck: return "ACK";
    case PacketKind::kFin: return "FIN";
    case PacketKind::kRst: return "RST";
    case PacketKind::kData: return "DATA";
  }
  return "?";
}

std::string_view to_string(RequestTarget t) {
  return t == RequestTarget::kHeavy ? "heavy" : "light";
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string describe(const Payload& p) {
  return std::visit(
      overloaded{
          [](std::monostate) -> std::string { return "none"; },
          [](const HttpGet& g) { return fmt::format("http-get/{}", to_string(g.target)); },
          [](const HttpHeaderFragment& f) {
            return fmt::format("http-header-fragment/{}{}", f.final ? "final" : "partial",
                               f.post ? "/post" : "");
          },
          [](const HttpPostFragment& f) {
            return fmt::format("http-post-fragment/{}", f.final ? "final" : "partial");
          },
          [](const TlsHandshake&) -> std::string { return "tls-handshake"; },
          [](const TlsRenegotiate&) -> std::string { return "tls-renegotiate"; },
          [](const HttpResponse&) -> std::string { return "http-response"; },
      },
      p);
}

bool is_heavy_request(const Payload& p) {
  if (const auto* g = std::get_if<HttpGet>(&p)) return g->target == RequestTarget::kHeavy;
  if (const auto* f = std::get_if<HttpHeaderFragment>(&p)) {
    return f->final && !f->post && f->target == RequestTarget::kHeavy;
  }
  return false;
}

std::uint32_t payload_size(const Payload& p) {
  return std::visit(overloaded{
                        [](std::monostate) -> std::uint32_t { return kControlPacketBytes; },
                        [](const HttpGet&) -> std::uint32_t { return 340; },
                        [](const HttpHeaderFragment&) -> std::uint32_t { return 64; },
                        [](const HttpPostFragment&) -> std::uint32_t { return 64; },
                        [](const TlsHandshake&) -> std::uint32_t { return 560; },
                        [](const TlsRenegotiate&) -> std::uint32_t { return 320; },
                        [](const HttpResponse&) -> std::uint32_t { return 1500; },
                    },
                    p);
}

bool is_well_formed(const PacketEvent& p) {
  if (p.size_bytes < kControlPacketBytes) return false;
  const bool control = p.kind != PacketKind::kData;
  const bool empty = std::holds_alternative<std::monostate>(p.payload);
  return control ? empty : !empty;
}

PacketEvent make_packet(SimTime at, HostAddr src, std::uint16_t src_port, HostAddr dst,
                        std::uint16_t dst_port, PacketKind kind, Payload payload) {
  PacketEvent p{at, src, dst, src_port, dst_port, kind, std::move(payload), 0};
  p.size_bytes = payload_size(p.payload);
  if (!is_well_formed(p)) {
    throw std::invalid_argument(fmt::format("malformed {} packet with payload {}",
                                            to_string(kind), describe(p.payload)));
  }
  return p;
}

}  // namespace ddsim
