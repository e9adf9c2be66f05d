#pragma once

#include <string>
#include <vector>

#include "ddsim/sim_time.hpp"

namespace ddsim {

struct LogEntry {
  SimTime at{};
  std::string kind;    // DETECT, BLOCK, BLOCK_FAILED, ALARM, UNCLASSIFIED, ALL_CLEAR, ...
  std::string detail;  // tab-separated key=value fields

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

class EventLog {
 public:
  static constexpr const char* kHeader = "# time_s\tevent\tdetails";

  void add(SimTime at, std::string kind, std::string detail = {});
  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t count(std::string_view kind) const;

  // Header line followed by one line per entry.
  std::string render() const;

 private:
  std::vector<LogEntry> entries_;
};

}  // namespace ddsim
