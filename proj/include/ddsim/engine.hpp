#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "ddsim/sim_time.hpp"

namespace ddsim {

/// Component an event is addressed to. Used for tracing and diagnostics only;
/// the action closure carries the behavior.
enum class Target : std::uint8_t {
  kSwitch,
  kVictim,
  kClient,
  kAttacker,
  kSentinel,
  kController,
  kRunner,
  kTest,
};

std::string_view to_string(Target t);

struct EventHandle {
  SimTime at{};
  std::uint64_t seq = 0;
  friend bool operator==(const EventHandle&, const EventHandle&) = default;
};

struct DispatchRecord {
  SimTime at{};
  std::uint64_t seq = 0;
  Target target = Target::kTest;
  friend bool operator==(const DispatchRecord&, const DispatchRecord&) = default;
};

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/**
 * Simulator - single-timeline discrete event core.
 *
 * Events are ordered by (fire_at, seq); seq is assigned at scheduling time so
 * events sharing a timestamp dispatch FIFO. Handlers run one at a time and may
 * schedule or cancel further events, but never at a time before now().
 */
class Simulator {
 public:
  using Action = std::function<void()>;

  SimTime now() const { return now_; }

  EventHandle schedule(SimTime fire_at, Target target, Action action);
  EventHandle schedule_in(Duration delay, Target target, Action action) {
    return schedule(now_ + delay, target, std::move(action));
  }

  // True if the event was pending and has been removed.
  bool cancel(const EventHandle& handle);
  bool is_pending(const EventHandle& handle) const;

  // Dispatches every event with fire_at <= end. The clock finishes at `end`.
  SimTime run_until(SimTime end);

  std::size_t pending() const { return queue_.size(); }
  std::uint64_t dispatched() const { return dispatched_; }
  std::uint64_t cancelled() const { return cancelled_; }
  std::uint64_t scheduled() const { return next_seq_; }

  // Every dispatch is appended to `sink` while set. Pass nullptr to stop.
  void set_trace(std::vector<DispatchRecord>* sink) { trace_ = sink; }

 private:
  struct Pending {
    Target target;
    Action action;
  };
  using Key = std::pair<SimTime, std::uint64_t>;

  SimTime now_{};
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::uint64_t cancelled_ = 0;
  std::map<Key, Pending> queue_;
  std::vector<DispatchRecord>* trace_ = nullptr;
};

}  // namespace ddsim
