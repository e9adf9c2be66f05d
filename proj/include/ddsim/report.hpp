#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "ddsim/runner.hpp"

namespace ddsim {

class ReportIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSamplesHeader =
    "time_s,probe_rtt_ms,probe_status,cpu_util,occupancy,benign_success_rate,blocked_count,packet_rate_pps";

std::string render_samples(const RunReport& report);
std::string render_summary(const RunReport& report);

// Writes samples.csv, events.log and summary.json into `dir`, creating it if needed.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace ddsim
