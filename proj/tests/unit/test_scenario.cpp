#include <catch_amalgamated.hpp>

#include "../support/fixtures.hpp"
#include "ddsim/scenario.hpp"

using namespace ddsim;

TEST_CASE("a minimal document takes every default") {
  const auto cfg = parse_scenario("name = tiny\nseed = 3\nduration_s = 60\n");
  ScenarioConfig want;
  want.name = "tiny";
  want.seed = 3;
  want.duration = secs(60);
  CHECK(cfg == want);
}

TEST_CASE("parse errors name the line and field") {
  auto fails = [](const std::string& text, std::size_t line, const std::string& field) {
    try {
      parse_scenario(text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.field() == field);
    }
  };
  fails("name = x\n[attack]\nkind = udp_flood\n", 3, "attack.kind");
  fails("name = x\ncolour = blue\n", 2, "colour");
  fails("name = x\n[server]\ntable_capacity = lots\n", 3, "server.table_capacity");
  fails("name = x\n[cpu]\n", 2, "cpu");
  fails("name = x\nduration_s = 1.0000001\n", 2, "duration_s");
  fails("seed = 1\n", 0, "name");
  fails("name = x\nwarmup_s = 20\n[attack]\nstart_s = 10\nduration_s = 5\n", 3, "attack.start_s");
  fails("name = x\nduration_s = 60\n[attack]\nstart_s = 30\nduration_s = 40\n", 3, "attack.duration_s");
}

TEST_CASE("durations parse exactly") {
  const auto cfg = parse_scenario("name = x\nduration_s = 90.000001\nwarmup_s = 0.5\n");
  CHECK(cfg.duration == us(90'000'001));
  CHECK(cfg.warmup == millis(500));
}

TEST_CASE("serialize then parse is the identity") {
  for (const std::string stem : {"benign", "syn_flood", "http_flood", "tls_flood", "slow_header", "slow_body",
                                 "half_open"}) {
    const auto cfg = testing::shipped(stem);
    CHECK(parse_scenario(serialize_scenario(cfg)) == cfg);
  }
  auto odd = testing::micro_scenario();
  odd.thresholds.threshold_factor = 0.1;
  odd.thresholds.id_gap_cv = 1.0 / 3.0;
  odd.controller.rule_hard_timeout = us(1'500'001);
  odd.max_rules = 77;
  odd.observe_only = true;
  odd.benign.target = RequestTarget::kHeavy;
  const std::string text = serialize_scenario(odd);
  CHECK(parse_scenario(text) == odd);
  CHECK(serialize_scenario(parse_scenario(text)) == text);
}
