// ddsim - run one attack scenario and write its report files.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ddsim/report.hpp"
#include "ddsim/runner.hpp"
#include "ddsim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;

std::string show(const std::optional<double>& v) { return v ? fmt::format("{:.3f}", *v) : "n/a"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDN DDoS defense simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::string protection;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--protection", protection, "Override protection")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--seed", seed, "Override seed");
  run->add_flag("--quiet", quiet, "No summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitParse;
  }

  ddsim::ScenarioConfig cfg;
  try {
    cfg = ddsim::load_scenario(scenario_path);
    if (!protection.empty()) cfg.protection_enabled = protection == "on";
    if (seed) cfg.seed = *seed;
  } catch (const ddsim::ParseError& e) {
    fmt::print(stderr, "ddsim: {}: {}\n", scenario_path, e.what());
    return kExitParse;
  }

  ddsim::RunReport report;
  try {
    report = ddsim::run_scenario(cfg);
  } catch (const ddsim::InvariantViolation& e) {
    fmt::print(stderr, "ddsim: {}\n", e.what());
    return kExitInvariant;
  }

  try {
    ddsim::emit_report(report, out_dir);
  } catch (const ddsim::ReportIoError& e) {
    fmt::print(stderr, "ddsim: {}\n", e.what());
    return kExitIo;
  }

  if (!quiet) {
    const auto& s = report.summary;
    fmt::print("{} (seed {}, protection {})\n", report.scenario, report.seed, report.protection_enabled ? "on" : "off");
    fmt::print("  detection after   {} s\n", show(s.time_to_detection_s));
    fmt::print("  mitigation after  {} s\n", show(s.time_to_mitigation_s));
    fmt::print("  benign success    before {} during {} after {}\n", show(s.benign_success_before),
               show(s.benign_success_during), show(s.benign_success_after));
    fmt::print("  peak occupancy {}  peak cpu {:.3f}  blocks {}\n", s.peak_occupancy, s.peak_cpu, s.blocks);
    fmt::print("  wrote {}\n", out_dir);
  }
  return kExitOk;
}
