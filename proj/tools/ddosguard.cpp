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


// Command-line front end: runs a preset or config file once, as a batch, or
// as a short-window sweep, and writes per-run records as CSV or JSON Lines.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ddosguard/config.hpp"
#include "ddosguard/error.hpp"
#include "ddosguard/harness.hpp"

namespace {

namespace cfg = ddosguard::config;

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void print_summary(std::ostream& out, const ddosguard::BatchStats& s) {
  const auto line = [&](const char* name, const ddosguard::MetricSummary& m) {
    out << "  " << name << ": min " << cfg::format_number(m.min) << ", avg "
        << cfg::format_number(m.avg) << " +/- " << cfg::format_number(m.ci95_halfwidth)
        << " (n=" << m.count << ")\n";
  };
  out << "runs " << s.runs << ", detected " << s.detected_runs << '\n';
  line("detection_time", s.detection_time);
  line("restore_time", s.restore_time);
  line("packets_dropped", s.packets_dropped);
  line("legal_filtered", s.legal_filtered);
  line("attackers_filtered", s.attackers_filtered);
}

struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::string> mode;
  std::optional<std::size_t> runs;
  std::optional<std::string> sweep_ws;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::vector<std::string> sets;
};

cfg::LoadedConfig resolve(const Overrides& o, const std::optional<std::string>& config_path) {
  cfg::LoadedConfig c = cfg::from_preset(o.preset.value_or("sim1"));
  if (config_path) c = cfg::load_config(*config_path, c, o.preset.has_value());
  if (o.mode) cfg::apply_override(c, "experiment", "mode", *o.mode);
  if (o.runs) c.plan.runs = *o.runs;
  if (o.sweep_ws) cfg::apply_override(c, "experiment", "sweep_ws", *o.sweep_ws);
  if (o.seed) c.experiment.scenario.seed = *o.seed;
  if (o.format) cfg::apply_override(c, "experiment", "format", *o.format);
  for (const std::string& s : o.sets) {
    const auto dot = s.find('.');
    const auto eq = s.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
      throw ddosguard::ConfigError("set", "expected section.key=value, got '" + s + "'");
    }
    cfg::apply_override(c, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
  cfg::validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ddosguard: DDoS detection and source identification simulator"};
  Overrides o;
  std::optional<std::string> config_path;
  std::optional<std::string> out_path;
  bool dump = false;

  app.add_option("--preset", o.preset, "sim1, sim2, case1, case2 or case3");
  app.add_option("--config", config_path, "experiment file (key = value)");
  app.add_option("--mode", o.mode, "once, batch or sweep");
  app.add_option("--runs", o.runs, "runs per batch, or per sweep value");
  app.add_option("--sweep-ws", o.sweep_ws, "comma-separated short-window sizes in seconds");
  app.add_option("--seed", o.seed, "base seed; run i uses seed + i");
  app.add_option("--out", out_path, "output file (default: stdout)");
  app.add_option("--format", o.format, "csv or jsonl");
  app.add_option("--set", o.sets, "section.key=value override, repeatable");
  app.add_flag("--dump-config", dump, "print the resolved configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  cfg::LoadedConfig config;
  try {
    config = resolve(o, config_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  if (dump) {
    std::cout << cfg::dump_config(config);
    return 0;
  }

  try {
    const ddosguard::Experiment& e = config.experiment;
    const std::uint64_t seed = e.scenario.seed;
    std::vector<cfg::ResultRow> rows;
    std::optional<ddosguard::BatchStats> summary;
    switch (config.plan.mode) {
      case cfg::Mode::Once:
        rows.push_back({0, std::nullopt, ddosguard::run_once(e.scenario, e.detector, e.method, seed)});
        break;
      case cfg::Mode::Batch: {
        ddosguard::BatchReport report =
            ddosguard::run_batch(e.scenario, e.detector, e.method, config.plan.runs, seed);
        for (std::size_t i = 0; i < report.runs.size(); ++i) {
          rows.push_back({i, std::nullopt, report.runs[i]});
        }
        summary = report.stats;
        print_summary(std::cerr, report.stats);
        break;
      }
      case cfg::Mode::Sweep: {
        const auto sweep = ddosguard::sweep_window(e.scenario, e.detector, e.method,
                                                   config.plan.sweep_ws, config.plan.runs, seed);
        for (const auto& r : sweep) rows.push_back({r.run, r.w_s, r.metrics});
        break;
      }
    }
    if (out_path) {
      cfg::emit_results(*out_path, rows, summary, config.plan.format);
    } else {
      cfg::emit_results(std::cout, rows, summary, config.plan.format);
    }
  } catch (const ddosguard::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
