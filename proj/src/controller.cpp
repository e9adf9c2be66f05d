#include "ddsim/controller.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace ddsim {

Controller::Controller(Switch& sw, ControllerConfig cfg, EventLog* log) : sw_(sw), cfg_(cfg), log_(log) {}

std::optional<BlockEntry> Controller::try_block(HostAddr addr, AttackClass cls,
                                                const SourceStats& evidence, SimTime now) {
  if (entries_.count(addr) != 0) return std::nullopt;
  const InstallResult r = sw_.install_rule(FlowRule{addr, now, cfg_.rule_hard_timeout});
  if (r == InstallResult::kRejected) {
    ++failed_installs_;
    retry_[addr] = Pending{cls, evidence};
    if (log_ != nullptr) {
      log_->add(now, "BLOCK_FAILED", fmt::format("addr={}\tclass={}\treason=table_full", addr.to_string(), to_string(cls)));
    }
    return std::nullopt;
  }
  retry_.erase(addr);
  BlockEntry entry{addr, now, cls, evidence};
  entries_.emplace(addr, entry);
  if (log_ != nullptr) {
    log_->add(now, "BLOCK", fmt::format("addr={}\tclass={}", addr.to_string(), to_string(cls)));
  }
  return entry;
}

std::vector<BlockEntry> Controller::on_detection_event(const DetectionEvent& ev, SimTime now) {
  std::map<HostAddr, std::pair<AttackClass, SourceStats>> work;
  for (const auto& [addr, p] : retry_) work.emplace(addr, std::pair{p.cls, p.evidence});
  for (std::size_t i = 0; i < ev.attackers.size(); ++i) {
    SourceStats evidence;
    for (const auto& [a, s] : ev.evidence) {
      if (a == ev.attackers[i]) evidence = s;
    }
    work.insert_or_assign(ev.attackers[i], std::pair{ev.attack_class, evidence});
  }
  std::vector<BlockEntry> applied;
  for (const auto& [addr, what] : work) {
    if (auto e = try_block(addr, what.first, what.second, now)) applied.push_back(*e);
  }
  return applied;
}

std::vector<BlockEntry> Controller::blocked_set(SimTime now) {
  std::vector<BlockEntry> out;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (!sw_.is_blocked(it->first, now)) {
      if (log_ != nullptr) log_->add(now, "UNBLOCK", fmt::format("addr={}\treason=rule_expired", it->first.to_string()));
      it = entries_.erase(it);
      continue;
    }
    out.push_back(it->second);
    ++it;
  }
  return out;
}

}  // namespace ddsim
