#include "ddsim/scenario.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace ddsim {

ParseError::ParseError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}: {}", line, field, message)
                                  : fmt::format("{}: {}", field, message)),
      line_(line),
      field_(std::move(field)) {}

std::optional<SimTime> ScenarioConfig::first_attack_start() const {
  std::optional<SimTime> first;
  for (const auto& a : attacks) {
    if (!first || a.start < *first) first = a.start;
  }
  return first;
}

void ScenarioConfig::validate() const {
  auto wrap = [](std::string_view section, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      std::string msg = e.what();
      const auto dot = msg.find('.');
      const auto space = msg.find(' ');
      std::string field = dot != std::string::npos && dot < space ? msg.substr(0, space) : std::string(section);
      throw ParseError(0, field, msg);
    }
  };
  if (name.empty()) throw ParseError(0, "name", "must not be empty");
  if (duration <= Duration::zero()) throw ParseError(0, "duration_s", "must be positive");
  if (warmup < Duration::zero()) throw ParseError(0, "warmup_s", "must be >= 0");
  if (warmup > duration) throw ParseError(0, "warmup_s", "exceeds duration_s");
  wrap("server", [&] { server.validate(); });
  if (link.bandwidth_bps == 0) throw ParseError(0, "link.bandwidth_bps", "must be positive");
  if (link.propagation_us < 0) throw ParseError(0, "link.propagation_us", "must be >= 0");
  wrap("benign", [&] { benign.validate(); });
  wrap("thresholds", [&] { thresholds.validate(); });
  if (controller.processing_latency < Duration::zero()) {
    throw ParseError(0, "controller.processing_latency_s", "must be >= 0");
  }
  if (controller.rule_hard_timeout && *controller.rule_hard_timeout <= Duration::zero()) {
    throw ParseError(0, "controller.rule_hard_timeout_s", "must be positive");
  }
  if (max_rules && *max_rules == 0) throw ParseError(0, "controller.max_rules", "must be positive");
  for (const auto& a : attacks) {
    wrap("attack", [&] { a.validate(); });
    if (SimTime{warmup} >= a.start) {
      throw ParseError(0, "attack.start_s", "must be later than warmup_s");
    }
    if (a.end() > SimTime{duration}) {
      throw ParseError(0, "attack.duration_s", "attack window extends past scenario duration_s");
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class Int>
Int parse_int(std::string_view v) {
  Int out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw std::invalid_argument(fmt::format("expected an integer, got '{}'", v));
  }
  return out;
}

double parse_double(std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw std::invalid_argument(fmt::format("expected a number, got '{}'", v));
  }
  return out;
}

std::string format_double(double d) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, p);
}

// Decimal seconds to exact microseconds.
Duration parse_seconds(std::string_view v) {
  const auto dot = v.find('.');
  const std::string_view whole = v.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : v.substr(dot + 1);
  if (whole.empty() || frac.size() > 6 || (dot != std::string_view::npos && frac.empty())) {
    throw std::invalid_argument(fmt::format("expected seconds with at most 6 decimals, got '{}'", v));
  }
  const auto s = parse_int<std::int64_t>(whole);
  std::int64_t f = 0;
  if (!frac.empty()) {
    f = parse_int<std::int64_t>(frac);
    for (std::size_t i = frac.size(); i < 6; ++i) f *= 10;
  }
  if (s < 0 || s > std::numeric_limits<std::int64_t>::max() / 1'000'000 - 1) {
    throw std::invalid_argument(fmt::format("seconds out of range: '{}'", v));
  }
  return Duration{s * 1'000'000 + f};
}

bool parse_bool(std::string_view v) {
  if (v == "on" || v == "true" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "no") return false;
  throw std::invalid_argument(fmt::format("expected on/off, got '{}'", v));
}

template <class T>
struct Field {
  std::string_view name;
  std::function<void(std::string_view, T&)> parse;
  std::function<std::string(const T&)> format;
};

template <class T, class M>
Field<T> int_field(std::string_view name, M T::*member) {
  return {name, [member](std::string_view v, T& t) { t.*member = parse_int<M>(v); },
          [member](const T& t) { return std::to_string(t.*member); }};
}

template <class T>
Field<T> double_field(std::string_view name, double T::*member) {
  return {name, [member](std::string_view v, T& t) { t.*member = parse_double(v); },
          [member](const T& t) { return format_double(t.*member); }};
}

template <class T>
Field<T> seconds_field(std::string_view name, Duration T::*member) {
  return {name, [member](std::string_view v, T& t) { t.*member = parse_seconds(v); },
          [member](const T& t) { return format_seconds_compact(t.*member); }};
}

template <class T>
Field<T> bool_field(std::string_view name, bool T::*member) {
  return {name, [member](std::string_view v, T& t) { t.*member = parse_bool(v); },
          [member](const T& t) { return std::string(t.*member ? "on" : "off"); }};
}

const std::vector<Field<ScenarioConfig>>& top_fields() {
  static const std::vector<Field<ScenarioConfig>> f = {
      {"name", [](std::string_view v, ScenarioConfig& c) { c.name = std::string(v); },
       [](const ScenarioConfig& c) { return c.name; }},
      int_field("seed", &ScenarioConfig::seed),
      seconds_field("duration_s", &ScenarioConfig::duration),
      seconds_field("warmup_s", &ScenarioConfig::warmup),
      bool_field("protection", &ScenarioConfig::protection_enabled),
      bool_field("observe_only", &ScenarioConfig::observe_only),
  };
  return f;
}

const std::vector<Field<ServerConfig>>& server_fields() {
  static const std::vector<Field<ServerConfig>> f = {
      int_field("table_capacity", &ServerConfig::table_capacity),
      seconds_field("syn_timeout_s", &ServerConfig::syn_timeout),
      seconds_field("header_timeout_s", &ServerConfig::header_timeout),
      seconds_field("body_timeout_s", &ServerConfig::body_timeout),
      int_field("cpu_capacity_ups", &ServerConfig::cpu_capacity_ups),
      int_field("heavy_request_cost", &ServerConfig::heavy_request_cost),
      int_field("light_request_cost", &ServerConfig::light_request_cost),
      int_field("tls_handshake_cost", &ServerConfig::tls_handshake_cost),
      int_field("cpu_queue_limit", &ServerConfig::cpu_queue_limit),
  };
  return f;
}

const std::vector<Field<LinkParams>>& link_fields() {
  static const std::vector<Field<LinkParams>> f = {
      int_field("bandwidth_bps", &LinkParams::bandwidth_bps),
      int_field("propagation_us", &LinkParams::propagation_us),
  };
  return f;
}

const std::vector<Field<BenignConfig>>& benign_fields() {
  static const std::vector<Field<BenignConfig>> f = {
      int_field("client_count", &BenignConfig::client_count),
      seconds_field("request_interval_s", &BenignConfig::request_interval),
      {"target",
       [](std::string_view v, BenignConfig& c) {
         if (v == "light") c.target = RequestTarget::kLight;
         else if (v == "heavy") c.target = RequestTarget::kHeavy;
         else throw std::invalid_argument(fmt::format("expected light|heavy, got '{}'", v));
       },
       [](const BenignConfig& c) { return std::string(to_string(c.target)); }},
      int_field("bad_network_clients", &BenignConfig::bad_network_clients),
      seconds_field("bad_gap_s", &BenignConfig::bad_gap),
      seconds_field("patience_s", &BenignConfig::patience),
      seconds_field("retry_backoff_s", &BenignConfig::retry_backoff),
  };
  return f;
}

const std::vector<Field<ScenarioConfig>>& controller_fields() {
  static const std::vector<Field<ScenarioConfig>> f = {
      {"processing_latency_s",
       [](std::string_view v, ScenarioConfig& c) { c.controller.processing_latency = parse_seconds(v); },
       [](const ScenarioConfig& c) { return format_seconds_compact(c.controller.processing_latency); }},
      {"rule_hard_timeout_s",
       [](std::string_view v, ScenarioConfig& c) {
         c.controller.rule_hard_timeout = v == "none" ? std::nullopt : std::optional{parse_seconds(v)};
       },
       [](const ScenarioConfig& c) {
         return c.controller.rule_hard_timeout ? format_seconds_compact(*c.controller.rule_hard_timeout)
                                               : std::string("none");
       }},
      {"max_rules",
       [](std::string_view v, ScenarioConfig& c) {
         c.max_rules = v == "none" ? std::nullopt : std::optional{parse_int<std::size_t>(v)};
       },
       [](const ScenarioConfig& c) { return c.max_rules ? std::to_string(*c.max_rules) : std::string("none"); }},
  };
  return f;
}

const std::vector<Field<SentinelConfig>>& threshold_fields() {
  using S = SentinelConfig;
  static const std::vector<Field<S>> f = {
      seconds_field("probe_interval_s", &S::probe_interval),
      seconds_field("probe_timeout_s", &S::probe_timeout),
      double_field("threshold_factor", &S::threshold_factor),
      int_field("consecutive_needed", &S::consecutive_needed),
      int_field("warmup_probes", &S::warmup_probes),
      int_field("clear_windows", &S::clear_windows),
      seconds_field("window_s", &S::window),
      seconds_field("conn_track_timeout_s", &S::conn_track_timeout),
      double_field("syn_ratio", &S::syn_ratio),
      double_field("spike_factor", &S::spike_factor),
      double_field("slow_fraction", &S::slow_fraction),
      int_field("table_capacity_estimate", &S::table_capacity_estimate),
      double_field("sustainable_heavy_rate", &S::sustainable_heavy_rate),
      double_field("http_flood_factor", &S::http_flood_factor),
      double_field("tls_renegotiation_rate", &S::tls_renegotiation_rate),
      seconds_field("slow_gap_s", &S::slow_gap),
      int_field("id_half_open", &S::id_half_open),
      double_field("id_heavy_rate", &S::id_heavy_rate),
      int_field("id_renegotiations", &S::id_renegotiations),
      int_field("id_incomplete", &S::id_incomplete),
      double_field("id_gap_cv", &S::id_gap_cv),
  };
  return f;
}

const std::vector<Field<AttackConfig>>& attack_fields() {
  using A = AttackConfig;
  static const std::vector<Field<A>> f = {
      {"kind",
       [](std::string_view v, A& a) {
         auto k = parse_attack_kind(v);
         if (!k) {
           throw std::invalid_argument(fmt::format(
               "unknown attack kind '{}' (expected syn_flood|http_flood|tls_flood|slow_header|slow_body)", v));
         }
         a.kind = *k;
       },
       [](const A& a) { return std::string(to_string(a.kind)); }},
      {"start_s", [](std::string_view v, A& a) { a.start = SimTime{parse_seconds(v)}; },
       [](const A& a) { return format_seconds_compact(a.start.time_since_epoch()); }},
      seconds_field("duration_s", &A::duration),
      double_field("rate_pps", &A::rate_pps),
      int_field("source_count", &A::source_count),
      int_field("connections_per_source", &A::connections_per_source),
      seconds_field("slow_interval_s", &A::slow_interval),
      double_field("jitter_fraction", &A::jitter_fraction),
  };
  return f;
}

template <class T>
void apply_field(const std::vector<Field<T>>& fields, std::string_view section, std::string_view key,
                 std::string_view value, T& target, std::size_t line) {
  const std::string qualified = section.empty() ? std::string(key) : fmt::format("{}.{}", section, key);
  for (const auto& f : fields) {
    if (f.name != key) continue;
    try {
      f.parse(value, target);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line, qualified, e.what());
    }
    return;
  }
  throw ParseError(line, qualified, "unknown key");
}

template <class T>
void write_section(std::string& out, std::string_view header, const std::vector<Field<T>>& fields, const T& t) {
  if (!header.empty()) out += fmt::format("\n[{}]\n", header);
  for (const auto& f : fields) out += fmt::format("{} = {}\n", f.name, f.format(t));
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t attack_line = 0;
  bool seen_name = false;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "section", "missing closing ']'");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section == "attack") {
        cfg.attacks.emplace_back();
        attack_line = line_no;
      } else if (section != "server" && section != "link" && section != "benign" &&
                 section != "controller" && section != "thresholds") {
        throw ParseError(line_no, section, "unknown section");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, std::string(line), "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "key", "empty key");
    if (value.empty()) throw ParseError(line_no, std::string(key), "empty value");

    if (section.empty()) {
      apply_field(top_fields(), "", key, value, cfg, line_no);
      if (key == "name") seen_name = true;
    } else if (section == "server") {
      apply_field(server_fields(), section, key, value, cfg.server, line_no);
    } else if (section == "link") {
      apply_field(link_fields(), section, key, value, cfg.link, line_no);
    } else if (section == "benign") {
      apply_field(benign_fields(), section, key, value, cfg.benign, line_no);
    } else if (section == "controller") {
      apply_field(controller_fields(), section, key, value, cfg, line_no);
    } else if (section == "thresholds") {
      apply_field(threshold_fields(), section, key, value, cfg.thresholds, line_no);
    } else {
      apply_field(attack_fields(), section, key, value, cfg.attacks.back(), line_no);
    }
  }
  if (!seen_name) throw ParseError(0, "name", "missing required key");

  try {
    cfg.validate();
  } catch (const ParseError& e) {
    const bool attack_field = e.field().rfind("attack", 0) == 0;
    if (attack_field && attack_line > 0) throw ParseError(attack_line, e.field(), e.what());
    throw;
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, path, "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  std::string out;
  write_section(out, "", top_fields(), cfg);
  write_section(out, "server", server_fields(), cfg.server);
  write_section(out, "link", link_fields(), cfg.link);
  write_section(out, "benign", benign_fields(), cfg.benign);
  write_section(out, "controller", controller_fields(), cfg);
  write_section(out, "thresholds", threshold_fields(), cfg.thresholds);
  for (const auto& a : cfg.attacks) write_section(out, "attack", attack_fields(), a);
  return out;
}

}  // namespace ddsim
