#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "ddsim/sim_time.hpp"

namespace ddsim {

enum class HostRole : std::uint8_t { kVictim, kSentinel, kBenign, kAttacker, kProber, kUnassigned };

std::string_view to_string(HostRole r);

/// IPv4-style host address. The role is a function of the address plan:
///   10.0.0.1 sentinel, 10.0.0.2 victim, 10.0.0.3 prober,
///   10.1.0.0/16 benign pool, 10.128.0.0/9 attacker pool.
struct HostAddr {
  std::uint32_t value = 0;

  HostRole role() const;
  std::string to_string() const;

  friend auto operator<=>(const HostAddr&, const HostAddr&) = default;
};

namespace addr_plan {

constexpr std::uint32_t dotted(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  return (a << 24) | (b << 16) | (c << 8) | d;
}

constexpr HostAddr kSentinel{dotted(10, 0, 0, 1)};
constexpr HostAddr kVictim{dotted(10, 0, 0, 2)};
constexpr HostAddr kProber{dotted(10, 0, 0, 3)};
constexpr std::uint32_t kBenignBase = dotted(10, 1, 0, 0);
constexpr std::uint32_t kAttackerBase = dotted(10, 128, 0, 0);
constexpr std::uint32_t kMaxSourcesPerAttack = 4095;

inline HostAddr benign(std::uint32_t index) { return HostAddr{kBenignBase + 1 + index}; }

// Address of source `index` of the `occurrence`-th attack of kind `kind_index`.
inline HostAddr attacker(std::uint32_t kind_index, std::uint32_t occurrence, std::uint32_t index) {
  return HostAddr{kAttackerBase + (kind_index << 16) + (occurrence << 12) + 1 + index};
}

}  // namespace addr_plan

enum class PacketKind : std::uint8_t { kSyn, kSynAck, kAck, kFin, kRst, kData };

std::string_view to_string(PacketKind k);

enum class RequestTarget : std::uint8_t { kLight, kHeavy };

std::string_view to_string(RequestTarget t);

// Payload descriptors. Sizes are fixed per kind; content is never simulated.
struct HttpGet {
  RequestTarget target = RequestTarget::kLight;
  friend bool operator==(const HttpGet&, const HttpGet&) = default;
};
struct HttpHeaderFragment {
  bool final = false;
  bool post = false;  // a body follows once the header is final
  RequestTarget target = RequestTarget::kLight;
  friend bool operator==(const HttpHeaderFragment&, const HttpHeaderFragment&) = default;
};
struct HttpPostFragment {
  bool final = false;
  friend bool operator==(const HttpPostFragment&, const HttpPostFragment&) = default;
};
struct TlsHandshake {
  friend bool operator==(const TlsHandshake&, const TlsHandshake&) = default;
};
struct TlsRenegotiate {
  friend bool operator==(const TlsRenegotiate&, const TlsRenegotiate&) = default;
};
struct HttpResponse {
  friend bool operator==(const HttpResponse&, const HttpResponse&) = default;
};

using Payload = std::variant<std::monostate, HttpGet, HttpHeaderFragment, HttpPostFragment,
                             TlsHandshake, TlsRenegotiate, HttpResponse>;

std::string describe(const Payload& p);

// A complete request whose cost is the heavy endpoint.
bool is_heavy_request(const Payload& p);

struct PacketEvent {
  SimTime at{};
  HostAddr src{};
  HostAddr dst{};
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  PacketKind kind = PacketKind::kSyn;
  Payload payload{};
  std::uint32_t size_bytes = 40;

  friend bool operator==(const PacketEvent&, const PacketEvent&) = default;
};

constexpr std::uint32_t kControlPacketBytes = 40;
constexpr std::uint16_t kHttpPort = 80;

// Builds a packet with the canonical size for its payload.
// Throws std::invalid_argument if a control kind carries a payload.
PacketEvent make_packet(SimTime at, HostAddr src, std::uint16_t src_port, HostAddr dst,
                        std::uint16_t dst_port, PacketKind kind, Payload payload = {});

std::uint32_t payload_size(const Payload& p);

// Checks the PacketEvent invariants (size >= 40, control kinds carry no payload).
bool is_well_formed(const PacketEvent& p);

}  // namespace ddsim
