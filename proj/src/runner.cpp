#include "ddsim/runner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include <fmt/format.h>

namespace ddsim {

namespace {

std::optional<double> mean_over(const std::vector<Sample>& samples, std::int64_t from, std::int64_t to) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.time_s < from || s.time_s >= to) continue;
    sum += s.benign_success_rate;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::int64_t ceil_seconds(SimTime t) {
  const auto us = micros(t);
  return (us + 999'999) / 1'000'000;
}

}  // namespace

Summary summarize(const std::vector<Sample>& samples, const EventLog& events, const ScenarioConfig& cfg,
                  std::optional<SimTime> first_table_full) {
  Summary out;
  for (const auto& s : samples) {
    out.peak_occupancy = std::max(out.peak_occupancy, s.occupancy);
    out.peak_cpu = std::max(out.peak_cpu, s.cpu_util);
  }
  if (first_table_full) out.first_table_full_s = to_seconds(*first_table_full);
  out.detections = events.count("DETECT");
  out.blocks = events.count("BLOCK");

  const std::int64_t end_s = samples.empty() ? 0 : samples.back().time_s + 1;
  const std::int64_t warmup_s = micros(cfg.warmup) / 1'000'000;
  const auto start = cfg.first_attack_start();
  if (!start) {
    out.benign_success_before = mean_over(samples, warmup_s, end_s);
    return out;
  }
  out.attack_start_s = to_seconds(*start);
  SimTime attack_end = *start;
  for (const auto& a : cfg.attacks) attack_end = std::max(attack_end, a.end());

  std::optional<SimTime> first_detect;
  std::optional<SimTime> first_block;
  for (const auto& e : events.entries()) {
    if (e.kind == "DETECT" && !first_detect) {
      first_detect = e.at;
      const auto b = e.detail.find("class=");
      if (b != std::string::npos) {
        const auto stop = e.detail.find('\t', b);
        out.first_detection_class = e.detail.substr(b + 6, stop == std::string::npos ? std::string::npos : stop - b - 6);
      }
    }
    if (e.kind == "BLOCK" && !first_block) first_block = e.at;
  }
  if (first_detect) out.time_to_detection_s = to_seconds(*first_detect - *start);

  // First sample at or after the first block that opens a 10 s run at >= 0.95.
  std::optional<std::int64_t> mitigated;
  if (first_block) {
    const std::int64_t from = ceil_seconds(*first_block);
    for (std::size_t i = 0; i < samples.size() && !mitigated; ++i) {
      if (samples[i].time_s < from) continue;
      if (samples[i].time_s + 10 > samples.back().time_s) break;
      bool held = true;
      for (std::size_t j = i; j < samples.size() && samples[j].time_s <= samples[i].time_s + 10; ++j) {
        if (samples[j].benign_success_rate < 0.95) {
          held = false;
          break;
        }
      }
      if (held) mitigated = samples[i].time_s;
    }
  }
  const std::int64_t start_s = ceil_seconds(*start);
  if (mitigated) out.time_to_mitigation_s = static_cast<double>(*mitigated) - to_seconds(*start);

  const std::int64_t during_end = mitigated ? *mitigated : ceil_seconds(attack_end);
  out.benign_success_before = mean_over(samples, warmup_s, start_s);
  out.benign_success_during = mean_over(samples, start_s, during_end);
  if (mitigated || during_end < end_s - 1) out.benign_success_after = mean_over(samples, during_end, end_s);
  return out;
}

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  cfg.validate();

  RunReport report;
  report.scenario = cfg.name;
  report.seed = cfg.seed;
  report.protection_enabled = cfg.protection_enabled;

  Simulator sim;
  SwitchConfig swcfg;
  swcfg.link = cfg.link;
  swcfg.max_rules = cfg.max_rules;
  Switch sw(sim, swcfg);
  sw.record_deliveries(opts.record_deliveries);

  Server server(sim, cfg.server, addr_plan::kVictim, [&sw](const PacketEvent& p) { sw.forward(p); });

  std::unique_ptr<Controller> controller;
  if (cfg.protection_enabled && !cfg.observe_only) {
    controller = std::make_unique<Controller>(sw, cfg.controller, &report.events);
  }

  sw.attach(addr_plan::kVictim, [&](const PacketEvent& p) {
    if (controller && controller->is_blocked(p.src) && sw.is_blocked(p.src, sim.now())) {
      throw InvariantViolation(fmt::format("packet from blocked {} delivered to victim at {} s",
                                           p.src.to_string(), format_seconds(sim.now())));
    }
    server.receive(p);
  });

  struct Tally {
    std::uint64_t ok = 0;
    std::uint64_t total = 0;
  } tally;
  BenignPool benign(sim, sw, cfg.benign, cfg.seed, [&](const BenignOutcome& o) {
    report.benign_outcomes.push_back(o);
    ++tally.total;
    if (o.outcome.ok()) ++tally.ok;
  });
  report.benign_clients = benign.addresses();
  report.bad_network_clients = benign.bad_network_addresses();

  std::vector<std::unique_ptr<AttackActor>> attacks;
  std::array<std::uint32_t, kAttackKindCount> occurrences{};
  for (const auto& a : cfg.attacks) {
    const auto occ = occurrences[static_cast<std::size_t>(a.kind)]++;
    attacks.push_back(spawn_attack(sim, sw, a, occ, cfg.seed, addr_plan::kVictim));
    report.attack_sources.push_back(attacks.back()->sources());
  }

  Sentinel::Options sopts;
  sopts.analysis = cfg.protection_enabled || cfg.observe_only;
  sopts.warmup_end = SimTime{cfg.warmup};
  sopts.record_tap = opts.record_tap;
  Sentinel sentinel(sim, sw, cfg.thresholds, sopts, &report.events, [&](const DetectionEvent& ev) {
    if (!controller) return;
    sim.schedule_in(cfg.controller.processing_latency, Target::kController, [&, ev] {
      const auto applied = controller->on_detection_event(ev, sim.now());
      report.blocks.insert(report.blocks.end(), applied.begin(), applied.end());
    });
  });
  if (opts.window_observer) sentinel.set_window_observer(opts.window_observer);

  std::size_t probe_cursor = 0;
  double last_rate = 1.0;
  auto dump = [&](const std::string& what) {
    return fmt::format(
        "invariant violation: {}\n  scenario={} seed={} t={} s\n  pending_events={} dispatched={}\n"
        "  occupancy={}/{} cpu_queue={} cpu_busy={}\n  blocked={} detections={}",
        what, cfg.name, cfg.seed, format_seconds(sim.now()), sim.pending(), sim.dispatched(), server.occupancy(),
        cfg.server.table_capacity, server.cpu_queue_length(), server.cpu_busy(),
        controller ? controller->blocked_set(sim.now()).size() : 0, sentinel.detections().size());
  };

  auto take_sample = [&] {
    const SimTime now = sim.now();
    Sample s;
    s.time_s = micros(now) / 1'000'000;
    const VictimSample v = server.metrics_sample(now);
    s.cpu_util = v.cpu_utilization;
    s.occupancy = v.occupancy;
    s.packet_rate_pps = v.inbound_packets;

    const auto& probes = sentinel.probe_results();
    for (; probe_cursor < probes.size(); ++probe_cursor) {
      const ProbeResult& r = probes[probe_cursor];
      s.probe_status = r.kind == ProbeResult::Kind::kRtt ? "ok" : std::string(to_string(r.kind));
      s.probe_rtt_ms = r.kind == ProbeResult::Kind::kRtt ? std::optional{to_seconds(r.rtt) * 1e3} : std::nullopt;
    }
    if (tally.total > 0) last_rate = static_cast<double>(tally.ok) / static_cast<double>(tally.total);
    s.benign_success_rate = last_rate;
    tally = Tally{};
    s.blocked_count = controller ? controller->blocked_set(now).size() : 0;

    if (s.occupancy > cfg.server.table_capacity) throw InvariantViolation(dump("table occupancy above capacity"));
    if (s.cpu_util < 0.0 || s.cpu_util > 1.0 + 1e-9) throw InvariantViolation(dump("cpu utilization outside [0,1]"));
    report.samples.push_back(std::move(s));
  };

  const std::int64_t seconds = micros(cfg.duration) / 1'000'000;
  for (std::int64_t t = 0; t <= seconds; ++t) {
    sim.schedule(at_seconds(t), Target::kRunner, take_sample);
  }
  sentinel.start();
  benign.start();
  for (auto& a : attacks) a->start();

  try {
    sim.run_until(SimTime{cfg.duration});
  } catch (const SchedulingError& e) {
    throw InvariantViolation(dump(e.what()));
  } catch (const InvariantViolation& e) {
    const std::string what = e.what();
    if (what.rfind("invariant violation:", 0) == 0) throw;
    throw InvariantViolation(dump(what));
  }

  report.detections = sentinel.detections();
  report.probes = sentinel.probe_results();
  report.deliveries = sw.delivery_log();
  report.tap = sentinel.tap_log();
  report.victim = server.counters();
  report.network = sw.counters();
  report.summary = summarize(report.samples, report.events, cfg, report.victim.first_full_at);
  return report;
}

}  // namespace ddsim
