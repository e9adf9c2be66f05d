#include "ddsim/report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace ddsim {

namespace {

using Json = nlohmann::ordered_json;

// Six decimals keeps summary.json stable and readable.
double round6(double v) { return std::round(v * 1e6) / 1e6; }

Json opt(const std::optional<double>& v) { return v ? Json(round6(*v)) : Json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportIoError(fmt::format("cannot write {}", path.string()));
  out << body;
  out.flush();
  if (!out) throw ReportIoError(fmt::format("write failed for {}", path.string()));
}

}  // namespace

std::string render_samples(const RunReport& report) {
  std::string out = kSamplesHeader;
  out += '\n';
  for (const auto& s : report.samples) {
    out += fmt::format("{},{},{},{:.4f},{},{:.4f},{},{}\n", s.time_s,
                       s.probe_rtt_ms ? fmt::format("{:.3f}", *s.probe_rtt_ms) : std::string(), s.probe_status,
                       s.cpu_util, s.occupancy, s.benign_success_rate, s.blocked_count, s.packet_rate_pps);
  }
  return out;
}

std::string render_summary(const RunReport& report) {
  const Summary& s = report.summary;
  Json j;
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["protection_enabled"] = report.protection_enabled;
  j["attack_start_s"] = opt(s.attack_start_s);
  j["time_to_detection_s"] = opt(s.time_to_detection_s);
  j["time_to_mitigation_s"] = opt(s.time_to_mitigation_s);
  j["first_detection_class"] = s.first_detection_class ? Json(*s.first_detection_class) : Json(nullptr);
  j["benign_success_before"] = opt(s.benign_success_before);
  j["benign_success_during"] = opt(s.benign_success_during);
  j["benign_success_after"] = opt(s.benign_success_after);
  j["peak_occupancy"] = s.peak_occupancy;
  j["peak_cpu"] = round6(s.peak_cpu);
  j["first_table_full_s"] = opt(s.first_table_full_s);
  j["detections"] = s.detections;
  j["blocks"] = s.blocks;
  j["samples"] = report.samples.size();
  return j.dump(2) + "\n";
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportIoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_file(dir / "samples.csv", render_samples(report));
  write_file(dir / "events.log", report.events.render());
  write_file(dir / "summary.json", render_summary(report));
}

}  // namespace ddsim
