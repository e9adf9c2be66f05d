#include "ddsim/engine.hpp"

#include <fmt/format.h>

namespace ddsim {

std::string_view to_string(Target t) {
  switch (t) {
    case Target::kSwitch: return "switch";
    case Target::kVictim: return "victim";
    case Target::kClient: return "client";
    case Target::kAttacker: return "attacker";
    case Target::kSentinel: return "sentinel";
    case Target::kController: return "controller";
    case Target::kRunner: return "runner";
    case Target::kTest: return "test";
  }
  return "unknown";
}

EventHandle Simulator::schedule(SimTime fire_at, Target target, Action action) {
  if (fire_at < now_) {
    throw SchedulingError(fmt::format("event for {} scheduled at {} s but clock is {} s",
                                      to_string(target), format_seconds(fire_at),
                                      format_seconds(now_)));
  }
  const std::uint64_t seq = next_seq_++;
  queue_.emplace(Key{fire_at, seq}, Pending{target, std::move(action)});
  return EventHandle{fire_at, seq};
}

bool Simulator::cancel(const EventHandle& handle) {
  if (queue_.erase(Key{handle.at, handle.seq}) == 0) return false;
  ++cancelled_;
  return true;
}

bool Simulator::is_pending(const EventHandle& handle) const {
  return queue_.count(Key{handle.at, handle.seq}) != 0;
}

SimTime Simulator::run_until(SimTime end) {
  while (!queue_.empty()) {
    auto it = queue_.begin();
    if (it->first.first > end) break;
    const Key key = it->first;
    Pending ev = std::move(it->second);
    queue_.erase(it);

    now_ = key.first;
    ++dispatched_;
    if (trace_ != nullptr) trace_->push_back(DispatchRecord{key.first, key.second, ev.target});
    try {
      ev.action();
    } catch (const SchedulingError& e) {
      throw SchedulingError(fmt::format("{} (while dispatching seq {} for {} at {} s, {} pending)",
                                        e.what(), key.second, to_string(ev.target),
                                        format_seconds(now_), queue_.size()));
    }
  }
  if (end > now_) now_ = end;
  return now_;
}

}  // namespace ddsim
