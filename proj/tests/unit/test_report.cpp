#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "../support/fixtures.hpp"
#include "ddsim/report.hpp"

using namespace ddsim;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("a 120 s run has 121 samples and a quiet log") {
  const RunReport r = run_scenario(testing::shipped("benign"));
  CHECK(r.samples.size() == 121);
  CHECK(r.samples.front().time_s == 0);
  CHECK(r.samples.back().time_s == 120);
  const std::string csv = render_samples(r);
  CHECK(csv.rfind(std::string(kSamplesHeader) + "\n", 0) == 0);
  CHECK(lines(csv) == 122);
  CHECK(r.events.render() == std::string(EventLog::kHeader) + "\n");
}

TEST_CASE("report files are byte-stable") {
  const auto dir = std::filesystem::temp_directory_path() / "ddsim-report-test";
  std::filesystem::remove_all(dir);
  const auto cfg = testing::shipped("http_flood");
  emit_report(run_scenario(cfg), dir / "a");
  emit_report(run_scenario(cfg), dir / "b");
  for (const char* f : {"samples.csv", "events.log", "summary.json"}) {
    const std::string a = slurp(dir / "a" / f);
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / f));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("an unwritable directory is an I/O error") {
  const RunReport r = run_scenario(testing::shipped("benign"));
  CHECK_THROWS_AS(emit_report(r, "/proc/ddsim-cannot-write"), ReportIoError);
}

TEST_CASE("summary timings follow from samples and log") {
  const auto cfg = testing::shipped("syn_flood");
  const RunReport r = run_scenario(cfg);
  REQUIRE(r.summary.time_to_detection_s);
  CHECK(*r.summary.time_to_detection_s == to_seconds(r.detections.front().at - *cfg.first_attack_start()));
  REQUIRE(r.summary.time_to_mitigation_s);
  const auto t0 = static_cast<std::int64_t>(*r.summary.time_to_mitigation_s + to_seconds(*cfg.first_attack_start()));
  for (const auto& s : r.samples) {
    if (s.time_s >= t0 && s.time_s <= t0 + 10) CHECK(s.benign_success_rate >= 0.95);
  }
  CHECK(summarize(r.samples, r.events, cfg, r.victim.first_full_at) == r.summary);
}

TEST_CASE("without protection nothing is detected or blocked") {
  auto cfg = testing::shipped("syn_flood");
  cfg.protection_enabled = false;
  const RunReport r = run_scenario(cfg);
  CHECK(r.events.entries().empty());
  CHECK(r.summary.time_to_detection_s == std::nullopt);
  CHECK(r.summary.time_to_mitigation_s == std::nullopt);
  for (const auto& s : r.samples) CHECK(s.blocked_count == 0);
}

TEST_CASE("observe-only logs detections without blocking") {
  auto cfg = testing::shipped("syn_flood");
  cfg.observe_only = true;
  const RunReport r = run_scenario(cfg);
  CHECK(!r.detections.empty());
  CHECK(r.blocks.empty());
}
