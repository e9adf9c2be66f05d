#include "ddsim/event_log.hpp"

#include <algorithm>

namespace ddsim {

void EventLog::add(SimTime at, std::string kind, std::string detail) {
  entries_.push_back(LogEntry{at, std::move(kind), std::move(detail)});
}

std::size_t EventLog::count(std::string_view kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const LogEntry& e) { return e.kind == kind; }));
}

std::string EventLog::render() const {
  std::string out = kHeader;
  out += '\n';
  for (const auto& e : entries_) {
    out += format_seconds(e.at);
    out += '\t';
    out += e.kind;
    if (!e.detail.empty()) {
      out += '\t';
      out += e.detail;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ddsim
