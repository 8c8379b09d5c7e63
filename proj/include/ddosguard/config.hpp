// Copyright 2026 The ddosguard Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DDOSGUARD_CONFIG_HPP_
#define DDOSGUARD_CONFIG_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "ddosguard/error.hpp"
#include "ddosguard/harness.hpp"

// Experiment files are flat `key = value` lines grouped under [scenario],
// [detector] and [experiment] sections; '#' starts a comment. Values layer as
// preset defaults < file < command-line overrides.

namespace ddosguard::config {

enum class Mode { Once, Batch, Sweep };
enum class Format { Csv, JsonLines };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Once: return "once";
    case Mode::Batch: return "batch";
    case Mode::Sweep: return "sweep";
  }
  return "once";
}

inline std::string_view to_string(Format f) { return f == Format::Csv ? "csv" : "jsonl"; }

struct RunPlan {
  std::string preset = "sim1";
  Mode mode = Mode::Once;
  std::size_t runs = 1;
  std::vector<double> sweep_ws;
  Format format = Format::Csv;

  bool operator==(const RunPlan&) const = default;
};

struct LoadedConfig {
  Experiment experiment;
  RunPlan plan;

  bool operator==(const LoadedConfig&) const = default;
};

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key),
                      "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const std::string_view item = trim(v.substr(0, comma));
    if (item.empty()) throw ConfigError(std::string(key), "empty list element");
    out.push_back(parse_double(key, item));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

inline std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_number(xs[i]);
  }
  return out;
}

using Setter = std::function<void(LoadedConfig&, std::string_view)>;
using Getter = std::function<std::string(const LoadedConfig&)>;

struct Key {
  std::string_view section;
  std::string_view name;
  Setter set;
  Getter get;
};

inline const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    const auto num = [&](std::string_view sec, std::string_view name, auto member_of) {
      k.push_back({sec, name,
                   [=](LoadedConfig& c, std::string_view v) {
                     member_of(c) = parse_double(name, v);
                   },
                   [=](const LoadedConfig& c) {
                     return format_number(member_of(const_cast<LoadedConfig&>(c)));
                   }});
    };
    const auto count = [&](std::string_view sec, std::string_view name, auto member_of) {
      k.push_back({sec, name,
                   [=](LoadedConfig& c, std::string_view v) {
                     using T = std::remove_reference_t<decltype(member_of(c))>;
                     const std::uint64_t raw = parse_uint(name, v);
                     if (raw > std::numeric_limits<T>::max()) {
                       throw ConfigError(std::string(name), "value out of range");
                     }
                     member_of(c) = static_cast<T>(raw);
                   },
                   [=](const LoadedConfig& c) {
                     return format_number(
                         static_cast<std::uint64_t>(member_of(const_cast<LoadedConfig&>(c))));
                   }});
    };
    const auto flag = [&](std::string_view sec, std::string_view name, auto member_of) {
      k.push_back({sec, name,
                   [=](LoadedConfig& c, std::string_view v) {
                     member_of(c) = parse_bool(name, v);
                   },
                   [=](const LoadedConfig& c) {
                     return std::string(member_of(const_cast<LoadedConfig&>(c)) ? "true"
                                                                                  : "false");
                   }});
    };
    // clang-format off
    count("scenario", "legal_clients", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.n_legal; });
    count("scenario", "attacking_hosts", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.n_attack; });
    num("scenario", "normal_rate_lambda_n", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.lambda_n; });
    num("scenario", "attack_rate_lambda_a", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.lambda_a; });
    num("scenario", "service_rate_mu", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.mu; });
    count("scenario", "buffer_l1", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.l1; });
    count("scenario", "buffer_l2", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.l2; });
    num("scenario", "attack_start", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.t_star; });
    num("scenario", "attack_end", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.attack_end; });
    num("scenario", "duration", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.total_duration; });
    num("scenario", "slot_dt", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.slot_dt; });
    count("scenario", "seed", [](LoadedConfig& c) -> auto& { return c.experiment.scenario.seed; });
    num("detector", "window_ws", [](LoadedConfig& c) -> auto& { return c.experiment.detector.w_s; });
    num("detector", "window_wl", [](LoadedConfig& c) -> auto& { return c.experiment.detector.w_l; });
    num("detector", "tolerance_r", [](LoadedConfig& c) -> auto& { return c.experiment.detector.r; });
    num("detector", "lookback_c", [](LoadedConfig& c) -> auto& { return c.experiment.detector.c; });
    num("detector", "alpha", [](LoadedConfig& c) -> auto& { return c.experiment.detector.alpha; });
    num("detector", "mpar_alpha", [](LoadedConfig& c) -> auto& { return c.experiment.detector.mpar_alpha; });
    count("detector", "baseline_len", [](LoadedConfig& c) -> auto& { return c.experiment.detector.baseline_len; });
    flag("detector", "detect_buffer", [](LoadedConfig& c) -> auto& { return c.experiment.detector.use_buffer; });
    flag("detector", "detect_ratio", [](LoadedConfig& c) -> auto& { return c.experiment.detector.use_ratio; });
    flag("detector", "detect_statistical", [](LoadedConfig& c) -> auto& { return c.experiment.detector.use_statistical; });
    // clang-format on
    k.push_back({"experiment", "preset",
                 [](LoadedConfig& c, std::string_view v) { c.plan.preset = std::string(v); },
                 [](const LoadedConfig& c) { return c.plan.preset; }});
    k.push_back({"experiment", "identification",
                 [](LoadedConfig& c, std::string_view v) {
                   if (v == "greedy") {
                     c.experiment.method = IdentificationMethod::Greedy;
                   } else if (v == "history") {
                     c.experiment.method = IdentificationMethod::History;
                   } else {
                     throw ConfigError("identification", "expected greedy or history");
                   }
                 },
                 [](const LoadedConfig& c) { return std::string(to_string(c.experiment.method)); }});
    k.push_back({"experiment", "mode",
                 [](LoadedConfig& c, std::string_view v) {
                   if (v == "once") {
                     c.plan.mode = Mode::Once;
                   } else if (v == "batch") {
                     c.plan.mode = Mode::Batch;
                   } else if (v == "sweep") {
                     c.plan.mode = Mode::Sweep;
                   } else {
                     throw ConfigError("mode", "expected once, batch or sweep");
                   }
                 },
                 [](const LoadedConfig& c) { return std::string(to_string(c.plan.mode)); }});
    k.push_back({"experiment", "runs",
                 [](LoadedConfig& c, std::string_view v) { c.plan.runs = parse_uint("runs", v); },
                 [](const LoadedConfig& c) { return format_number(std::uint64_t{c.plan.runs}); }});
    k.push_back({"experiment", "sweep_ws",
                 [](LoadedConfig& c, std::string_view v) {
                   c.plan.sweep_ws = parse_list("sweep_ws", v);
                 },
                 [](const LoadedConfig& c) { return join(c.plan.sweep_ws); }});
    k.push_back({"experiment", "format",
                 [](LoadedConfig& c, std::string_view v) {
                   if (v == "csv") {
                     c.plan.format = Format::Csv;
                   } else if (v == "jsonl") {
                     c.plan.format = Format::JsonLines;
                   } else {
                     throw ConfigError("format", "expected csv or jsonl");
                   }
                 },
                 [](const LoadedConfig& c) { return std::string(to_string(c.plan.format)); }});
    return k;
  }();
  return table;
}

inline const Key& find_key(std::string_view section, std::string_view name) {
  for (const Key& k : keys()) {
    if (k.section == section && k.name == name) return k;
  }
  throw ConfigError(std::string(name), "unknown key in [" + std::string(section) + "]");
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line;
};

inline std::vector<Entry> tokenize(std::string_view text, std::string_view origin) {
  std::vector<Entry> entries;
  std::string section;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& msg) {
    throw ConfigError(std::string(origin) + ":" + std::to_string(line_no), msg);
  };
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "scenario" && section != "detector" && section != "experiment") {
        fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of a section");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    entries.push_back({section, std::string(key), std::string(value), line_no});
  }
  return entries;
}

}  // namespace detail

/// Applies one `section.key = value` override.
inline void apply_override(LoadedConfig& config, std::string_view section, std::string_view key,
                           std::string_view value) {
  detail::find_key(section, key).set(config, value);
}

/// Checks the combined configuration, including mode-specific fields.
inline void validate(const LoadedConfig& config) {
  validate_run(config.experiment.scenario, config.experiment.detector);
  if (config.plan.mode == Mode::Batch && config.plan.runs < 2) {
    throw ConfigError("runs", "batch mode needs at least two runs");
  }
  if (config.plan.mode == Mode::Sweep) {
    if (config.plan.sweep_ws.empty()) throw ConfigError("sweep_ws", "sweep mode needs values");
    if (config.plan.runs < 1) throw ConfigError("runs", "must be positive");
    for (double w : config.plan.sweep_ws) {
      DetectorConfig d = config.experiment.detector;
      d.w_s = w;
      validate_run(config.experiment.scenario, d);
    }
  }
  if (config.plan.mode == Mode::Once && config.plan.runs != 1) {
    throw ConfigError("runs", "once mode runs exactly one simulation");
  }
}

inline LoadedConfig from_preset(std::string_view name) {
  LoadedConfig c;
  c.experiment = preset(name);
  c.plan.preset = std::string(name);
  return c;
}

/// Parses experiment text. The starting point is the preset the text names,
/// else `base`, else sim1. With `keep_base` the text's preset key is ignored
/// and `base` is always the starting point. The result is not validated.
inline LoadedConfig parse_config(std::string_view text, std::string_view origin = "<config>",
                                 std::optional<LoadedConfig> base = std::nullopt,
                                 bool keep_base = false) {
  const std::vector<detail::Entry> entries = detail::tokenize(text, origin);
  std::optional<std::string> named;
  for (const auto& e : entries) {
    if (e.section == "experiment" && e.key == "preset") named = e.value;
  }
  if (keep_base && !base) throw std::logic_error("keep_base needs a base configuration");
  LoadedConfig config;
  try {
    config = (named && !keep_base) ? from_preset(*named) : base ? *base : from_preset("sim1");
  } catch (const ConfigError& err) {
    throw ConfigError(std::string(origin), err.what());
  }
  for (const auto& e : entries) {
    if (keep_base && e.section == "experiment" && e.key == "preset") continue;
    try {
      apply_override(config, e.section, e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(e.line), err.what());
    }
  }
  return config;
}

inline LoadedConfig load_config(const std::string& path,
                                std::optional<LoadedConfig> base = std::nullopt,
                                bool keep_base = false) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, std::move(base), keep_base);
}

/// Writes every key in a form parse_config reads back to the same value.
inline std::string dump_config(const LoadedConfig& config) {
  std::string out;
  std::string_view section;
  for (const auto& k : detail::keys()) {
    if (k.section != section) {
      if (!section.empty()) out += '\n';
      section = k.section;
      out += '[';
      out += section;
      out += "]\n";
    }
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Result emission

struct ResultRow {
  std::size_t run_id = 0;
  std::optional<double> w_s;
  RunMetrics metrics;
};

inline constexpr std::string_view kCsvHeader =
    "run_id,w_s,seed,detected,detection_method,statistical_confirmed,detection_time,"
    "restore_time,l1_full_time,correctly_identified_attackers,legal_filtered,"
    "packets_dropped,filtered_packets,dismissed_alarms,max_buffer_level,max_buffer_time";

inline void write_csv(std::ostream& out, std::span<const ResultRow> rows) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
  };
  out << kCsvHeader << '\n';
  for (const ResultRow& row : rows) {
    const RunMetrics& m = row.metrics;
    out << row.run_id << ',' << opt(row.w_s) << ',' << m.seed << ','
        << (m.detected ? "true" : "false") << ','
        << (m.detection_method ? std::string(to_string(*m.detection_method)) : "") << ','
        << (m.statistical_confirmed ? (*m.statistical_confirmed ? "true" : "false") : "")
        << ',' << opt(m.detection_time) << ',' << opt(m.restore_time) << ','
        << opt(m.l1_full_time) << ',' << m.correctly_identified_attackers << ','
        << m.legal_filtered << ',' << m.packets_dropped << ',' << m.filtered_packets << ','
        << m.dismissed_alarms << ','
        << m.max_buffer_level << ',' << format_number(m.max_buffer_time) << '\n';
  }
}

inline nlohmann::ordered_json to_json(const ResultRow& row) {
  const auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (!v) return nullptr;
    return *v;
  };
  const RunMetrics& m = row.metrics;
  nlohmann::ordered_json j;
  j["run_id"] = row.run_id;
  j["w_s"] = opt(row.w_s);
  j["seed"] = m.seed;
  j["detected"] = m.detected;
  j["detection_method"] =
      m.detection_method ? nlohmann::ordered_json(std::string(to_string(*m.detection_method)))
                         : nlohmann::ordered_json(nullptr);
  j["statistical_confirmed"] = opt(m.statistical_confirmed);
  j["detection_time"] = opt(m.detection_time);
  j["restore_time"] = opt(m.restore_time);
  j["l1_full_time"] = opt(m.l1_full_time);
  j["correctly_identified_attackers"] = m.correctly_identified_attackers;
  j["legal_filtered"] = m.legal_filtered;
  j["packets_dropped"] = m.packets_dropped;
  j["filtered_packets"] = m.filtered_packets;
  j["dismissed_alarms"] = m.dismissed_alarms;
  j["max_buffer_level"] = m.max_buffer_level;
  j["max_buffer_time"] = m.max_buffer_time;
  return j;
}

inline nlohmann::ordered_json to_json(const BatchStats& b) {
  const auto metric = [](const MetricSummary& s) {
    nlohmann::ordered_json j;
    const auto num = [](double v) -> nlohmann::ordered_json {
      if (std::isnan(v)) return nullptr;
      return v;
    };
    j["min"] = num(s.min);
    j["avg"] = num(s.avg);
    j["ci95_halfwidth"] = s.ci95_halfwidth;
    j["count"] = s.count;
    return j;
  };
  nlohmann::ordered_json j;
  j["runs"] = b.runs;
  j["detected_runs"] = b.detected_runs;
  j["restore_time"] = metric(b.restore_time);
  j["packets_dropped"] = metric(b.packets_dropped);
  j["legal_filtered"] = metric(b.legal_filtered);
  j["attackers_filtered"] = metric(b.attackers_filtered);
  j["detection_time"] = metric(b.detection_time);
  nlohmann::ordered_json wrapper;
  wrapper["summary"] = std::move(j);
  return wrapper;
}

inline void write_jsonl(std::ostream& out, std::span<const ResultRow> rows,
                        const std::optional<BatchStats>& summary) {
  for (const ResultRow& row : rows) out << to_json(row).dump() << '\n';
  if (summary) out << to_json(*summary).dump() << '\n';
}

inline void emit_results(std::ostream& out, std::span<const ResultRow> rows,
                         const std::optional<BatchStats>& summary, Format format) {
  if (rows.empty()) throw std::invalid_argument("no results to emit");
  if (format == Format::Csv) {
    write_csv(out, rows);
  } else {
    write_jsonl(out, rows, summary);
  }
}

inline void emit_results(const std::string& path, std::span<const ResultRow> rows,
                         const std::optional<BatchStats>& summary, Format format) {
  if (rows.empty()) throw std::invalid_argument("no results to emit");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  emit_results(out, rows, summary, format);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace ddosguard::config

#endif  // DDOSGUARD_CONFIG_HPP_
