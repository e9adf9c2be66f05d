#include <catch_amalgamated.hpp>

#include "ddsim/packet.hpp"

using namespace ddsim;

TEST_CASE("address plan assigns roles") {
  CHECK(addr_plan::kVictim.role() == HostRole::kVictim);
  CHECK(addr_plan::kSentinel.role() == HostRole::kSentinel);
  CHECK(addr_plan::kProber.role() == HostRole::kProber);
  CHECK(addr_plan::benign(0).role() == HostRole::kBenign);
  CHECK(addr_plan::attacker(4, 1, 4094).role() == HostRole::kAttacker);
  CHECK(HostAddr{addr_plan::dotted(192, 168, 0, 1)}.role() == HostRole::kUnassigned);
  CHECK(addr_plan::kVictim.to_string() == "10.0.0.2");
  CHECK(addr_plan::benign(0).to_string() == "10.1.0.1");
}

TEST_CASE("attacker address blocks never overlap") {
  const auto last = addr_plan::attacker(0, 0, addr_plan::kMaxSourcesPerAttack - 1);
  const auto next_occ = addr_plan::attacker(0, 1, 0);
  CHECK(last < next_occ);
  CHECK(addr_plan::attacker(0, 15, addr_plan::kMaxSourcesPerAttack - 1) < addr_plan::attacker(1, 0, 0));
}

TEST_CASE("packets carry canonical sizes") {
  const auto syn = make_packet(at_us(1), addr_plan::benign(0), 1024, addr_plan::kVictim, kHttpPort, PacketKind::kSyn);
  CHECK(syn.size_bytes == kControlPacketBytes);
  const auto get = make_packet(at_us(1), addr_plan::benign(0), 1024, addr_plan::kVictim, kHttpPort,
                               PacketKind::kData, HttpGet{RequestTarget::kHeavy});
  CHECK(get.size_bytes == 340);
  CHECK(payload_size(HttpGet{}) == 340);
  CHECK(is_heavy_request(get.payload));
  CHECK_FALSE(is_heavy_request(HttpHeaderFragment{false, false, RequestTarget::kHeavy}));
  CHECK(is_heavy_request(HttpHeaderFragment{true, false, RequestTarget::kHeavy}));
  CHECK(is_well_formed(get));
  CHECK_THROWS_AS(make_packet(at_us(1), addr_plan::benign(0), 1, addr_plan::kVictim, 80, PacketKind::kSyn, HttpGet{}),
                  std::invalid_argument);
}
