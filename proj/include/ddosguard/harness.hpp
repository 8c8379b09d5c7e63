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

#ifndef DDOSGUARD_HARNESS_HPP_
#define DDOSGUARD_HARNESS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddosguard/detector.hpp"
#include "ddosguard/error.hpp"
#include "ddosguard/identifier.hpp"
#include "ddosguard/queue.hpp"
#include "ddosguard/stats.hpp"
#include "ddosguard/traffic.hpp"

namespace ddosguard {

enum class IdentificationMethod { Greedy, History };

inline std::string_view to_string(IdentificationMethod m) {
  return m == IdentificationMethod::Greedy ? "greedy" : "history";
}

struct RunMetrics {
  std::uint64_t seed = 0;
  bool detected = false;
  std::optional<DetectionMethod> detection_method;
  std::optional<bool> statistical_confirmed;
  std::optional<double> detection_time;  // t_hat - t*
  std::optional<double> restore_time;    // after t*
  std::optional<double> l1_full_time;    // first L1-full at or after t*, after t*
  std::uint64_t correctly_identified_attackers = 0;
  std::uint64_t legal_filtered = 0;
  std::uint64_t packets_dropped = 0;
  std::uint64_t filtered_packets = 0;
  std::uint64_t dismissed_alarms = 0;  // alarms the statistical test did not confirm
  std::uint64_t max_buffer_level = 0;
  double max_buffer_time = 0.0;  // seconds since start of run

  bool operator==(const RunMetrics&) const = default;
};

/// Counts consecutive slots on which the restoration condition holds.
class RestorationTracker {
 public:
  explicit RestorationTracker(std::int64_t sustain_slots) : sustain_(sustain_slots) {}

  /// Returns true on the slot that completes the sustained run.
  bool update(bool condition) {
    run_ = condition ? run_ + 1 : 0;
    return run_ >= sustain_;
  }
  void reset() { run_ = 0; }

 private:
  std::int64_t sustain_;
  std::int64_t run_ = 0;
};

/// Restoration over recorded traces: the first slot, from `first_slot` on,
/// that completes `sustain_slots` consecutive slots with occupancy below L1
/// and admitted per-slot rate at or under `rate_threshold`. Returned relative
/// to t_star, measured at the end of that slot.
inline std::optional<double> declare_restored(std::span<const std::uint64_t> occupancy,
                                              std::span<const double> admitted_rate,
                                              std::uint64_t l1, double rate_threshold,
                                              std::int64_t sustain_slots,
                                              std::int64_t first_slot, double slot_dt,
                                              double t_star) {
  if (occupancy.size() != admitted_rate.size()) {
    throw std::invalid_argument("declare_restored: trace lengths differ");
  }
  RestorationTracker tracker(sustain_slots);
  for (auto k = std::max<std::int64_t>(first_slot, 0);
       k < static_cast<std::int64_t>(occupancy.size()); ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (tracker.update(occupancy[i] < l1 && admitted_rate[i] <= rate_threshold)) {
      return static_cast<double>(k + 1) * slot_dt - t_star;
    }
  }
  return std::nullopt;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

inline void validate_run(const ScenarioConfig& scenario, const DetectorConfig& detector) {
  scenario.validate();
  detector.validate(scenario.slot_dt);
  if (!(detector.w_s + detector.w_l < scenario.t_star)) {
    throw ConfigError("window_wl", "window_ws + window_wl must end before attack_start");
  }
}

/// Simulates one scenario end to end: generate, filter, buffer, detect,
/// measure for w_s seconds, classify and block, then watch for restoration.
/// After restoration the filter is released and detection re-arms; the
/// identification metrics describe the first cycle.
inline RunMetrics run_once(const ScenarioConfig& scenario, const DetectorConfig& detector,
                           IdentificationMethod method, std::uint64_t seed) {
  validate_run(scenario, detector);
  const double dt = scenario.slot_dt;
  const std::vector<TrafficSource> sources = build_sources(scenario);
  const TrafficPopulation population(sources, dt);
  const TrafficGenerator generator(population);
  Rng rng(detail::splitmix64(seed));

  BufferState buffer(scenario.l1, scenario.l2);
  DetectionEngine engine(detector, dt);
  const double service_per_slot = scenario.mu * dt;
  const std::int64_t total_slots = scenario.total_slots();
  const std::int64_t attack_slot = slot_of(scenario.t_star, dt);
  // End of slot k relative to t*, from slot counts to avoid cancellation.
  const auto since_attack = [&](std::int64_t k) {
    return static_cast<double>(k + 1 - attack_slot) * dt;
  };
  const std::int64_t measure_slots = slot_of(detector.w_s, dt);

  enum class Phase { Monitoring, Measuring, Filtering };
  Phase phase = Phase::Monitoring;
  bool first_cycle = true;
  const bool track_activity = method == IdentificationMethod::History;
  ActivityLog activity(population.size());
  PerSourceAccumulator measurement;
  std::int64_t measure_end = 0;
  FilterState filter;
  RestorationTracker restoration(measure_slots);

  RunMetrics m;
  m.seed = seed;

  for (std::int64_t k = 0; k < total_slots; ++k) {
    const bool per_source = track_activity || phase != Phase::Monitoring;
    SlotTraffic slot = generator.generate(k, rng, per_source);
    if (track_activity) activity.record(slot, dt);
    if (phase == Phase::Measuring) measurement.add(slot);
    if (filter.active()) {
      FilteredSlot f = apply_filter(filter, std::move(slot), population);
      m.filtered_packets += f.filtered;
      slot = std::move(f.slot);
    }

    step(buffer, slot.aggregate, service_per_slot);
    if (buffer.peak_slot == k) {
      m.max_buffer_level = buffer.peak_occupancy;
      m.max_buffer_time = static_cast<double>(k + 1) * dt;
    }
    if (!m.l1_full_time && k >= attack_slot && is_l1_full(buffer) && scenario.n_attack > 0) {
      m.l1_full_time = since_attack(k);
    }

    const DetectionEvent event = engine.observe(k, slot.aggregate, buffer);
    const DetectionOutcome& outcome = engine.outcome();
    if (event == DetectionEvent::Alarm && phase == Phase::Monitoring) {
      phase = Phase::Measuring;
      measure_end = k + measure_slots;
      measurement.reset(population.size());
    }
    if (phase == Phase::Measuring && outcome.confirmed == false) {
      // The accurate test overrules the approximate alarm.
      ++m.dismissed_alarms;
      engine.reset_cycle();
      phase = Phase::Monitoring;
      continue;
    }
    if (first_cycle && !m.detected && phase == Phase::Measuring && engine.settled()) {
      m.detected = true;
      m.detection_method = outcome.method;
      m.detection_time = since_attack(outcome.slot_index);
      m.statistical_confirmed = outcome.confirmed;
    }

    if (phase == Phase::Measuring && k == measure_end) {
      const PerSourceMeasurement measured = measurement.finish(outcome.t_hat, detector.w_s);
      const TrafficMonitor& monitor = engine.monitor();
      const std::int64_t lookback_slot = outcome.slot_index - slot_of(detector.c, dt);
      const double baseline_per_slot =
          monitor.long_average_at(lookback_slot).value_or(monitor.frozen_baseline());
      const double budget = estimate_attack_rate(measured.total_rate(), baseline_per_slot / dt);
      Classification classes;
      if (method == IdentificationMethod::History) {
        const double history_end = outcome.t_hat - detector.c;
        const std::vector<SourceId> exempt =
            activity.active_between(history_end - detector.w_l, history_end);
        classes = identify_by_history(measured, exempt, budget);
      } else {
        classes = identify_greedy(measured, budget);
      }
      if (first_cycle) {
        for (SourceId id : classes.attackers) {
          ++(population.kind(id) == SourceKind::Attacking ? m.correctly_identified_attackers
                                                          : m.legal_filtered);
        }
      }
      filter.activate(std::move(classes.attackers), static_cast<double>(k + 1) * dt);
      restoration.reset();
      phase = Phase::Filtering;
      continue;
    }

    if (phase == Phase::Filtering) {
      const double threshold = (1.0 + detector.r) * engine.monitor().frozen_baseline();
      const bool calm = buffer.occupancy < buffer.l1 &&
                        engine.monitor().short_window().average() <= threshold;
      if (restoration.update(calm)) {
        const double now = static_cast<double>(k + 1) * dt;
        if (first_cycle) m.restore_time = since_attack(k);
        filter.release(now);
        engine.reset_cycle();
        phase = Phase::Monitoring;
        first_cycle = false;
      }
    }
  }
  m.packets_dropped = buffer.cumulative_dropped;
  return m;
}

// ---------------------------------------------------------------------------
// Batches and sweeps

struct MetricSummary {
  double min = std::numeric_limits<double>::quiet_NaN();
  double avg = std::numeric_limits<double>::quiet_NaN();
  double ci95_halfwidth = 0.0;
  std::size_t count = 0;
};

/// Min, mean and 1.96 * s / sqrt(n) over the values present.
inline MetricSummary summarize_metric(std::span<const double> values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.min = *std::min_element(values.begin(), values.end());
  s.avg = stats::sample_mean(values);
  if (values.size() >= 2) {
    s.ci95_halfwidth =
        1.96 * stats::sample_stddev(values) / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

struct BatchStats {
  std::size_t runs = 0;
  std::size_t detected_runs = 0;
  MetricSummary restore_time;
  MetricSummary packets_dropped;
  MetricSummary legal_filtered;
  MetricSummary attackers_filtered;
  MetricSummary detection_time;
};

inline BatchStats summarize_runs(std::span<const RunMetrics> runs) {
  std::vector<double> restore, dropped, legal, attackers, detection;
  BatchStats b;
  b.runs = runs.size();
  for (const RunMetrics& r : runs) {
    if (r.detected) ++b.detected_runs;
    if (r.restore_time) restore.push_back(*r.restore_time);
    if (r.detection_time) detection.push_back(*r.detection_time);
    dropped.push_back(static_cast<double>(r.packets_dropped));
    legal.push_back(static_cast<double>(r.legal_filtered));
    attackers.push_back(static_cast<double>(r.correctly_identified_attackers));
  }
  b.restore_time = summarize_metric(restore);
  b.packets_dropped = summarize_metric(dropped);
  b.legal_filtered = summarize_metric(legal);
  b.attackers_filtered = summarize_metric(attackers);
  b.detection_time = summarize_metric(detection);
  return b;
}

struct BatchReport {
  std::vector<RunMetrics> runs;
  BatchStats stats;
};

/// Run i uses seed base_seed + i.
inline BatchReport run_batch(const ScenarioConfig& scenario, const DetectorConfig& detector,
                             IdentificationMethod method, std::size_t n_runs,
                             std::uint64_t base_seed) {
  if (n_runs < 2) throw ConfigError("runs", "a batch needs at least two runs");
  validate_run(scenario, detector);
  BatchReport report;
  report.runs.reserve(n_runs);
  for (std::size_t i = 0; i < n_runs; ++i) {
    report.runs.push_back(run_once(scenario, detector, method, base_seed + i));
  }
  report.stats = summarize_runs(report.runs);
  return report;
}

struct SweepRow {
  double w_s = 0.0;
  std::size_t run = 0;
  RunMetrics metrics;
};

/// One or more runs per short-window size, with the measurement window equal
/// to w_s. Seeds repeat across window sizes so rows are paired.
inline std::vector<SweepRow> sweep_window(const ScenarioConfig& scenario,
                                          const DetectorConfig& detector,
                                          IdentificationMethod method,
                                          std::span<const double> values,
                                          std::size_t runs_per_value, std::uint64_t base_seed) {
  if (values.empty()) throw ConfigError("sweep_ws", "needs at least one window size");
  if (runs_per_value == 0) throw ConfigError("runs", "must be positive");
  for (double w : values) {
    DetectorConfig d = detector;
    d.w_s = w;
    validate_run(scenario, d);
  }
  std::vector<SweepRow> rows;
  for (double w : values) {
    DetectorConfig d = detector;
    d.w_s = w;
    for (std::size_t i = 0; i < runs_per_value; ++i) {
      rows.push_back({w, i, run_once(scenario, d, method, base_seed + i)});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Presets

struct Experiment {
  ScenarioConfig scenario;
  DetectorConfig detector;
  IdentificationMethod method = IdentificationMethod::Greedy;

  bool operator==(const Experiment&) const = default;
};

/// Built-in scenarios: `sim1`, `sim2`, `case1`, `case2`, `case3`.
inline Experiment preset(std::string_view name) {
  Experiment e;
  ScenarioConfig& s = e.scenario;
  DetectorConfig& d = e.detector;
  s.t_star = 100.0;
  s.attack_end = 200.0;
  s.total_duration = 300.0;
  s.seed = 1;
  d = DetectorConfig{};

  const auto large = [&](std::uint32_t n, std::uint32_t a, double lambda_a) {
    s.n_legal = n;
    s.n_attack = a;
    s.lambda_n = 0.1;
    s.lambda_a = lambda_a;
    s.mu = 1500.0;
    s.l1 = 40;
    s.l2 = 30000;
    s.slot_dt = 0.01;
    d.use_buffer = d.use_ratio = true;
    d.use_statistical = false;
    e.method = IdentificationMethod::Greedy;
  };
  const auto small = [&](std::uint32_t n, std::uint32_t a, double mu) {
    s.n_legal = n;
    s.n_attack = a;
    s.lambda_n = 0.1;
    s.lambda_a = 0.2;
    s.mu = mu;
    s.l1 = 40;
    s.l2 = 160;
    s.slot_dt = 0.1;
    d.use_buffer = d.use_ratio = d.use_statistical = true;
    e.method = IdentificationMethod::History;
  };

  if (name == "sim1") {
    large(10000, 5000, 0.4);
  } else if (name == "case3") {
    large(10000, 5000, 1.0);
  } else if (name == "sim2" || name == "case2") {
    small(50, 50, 8.0);
  } else if (name == "case1") {
    small(5, 40, 4.0);
  } else {
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
  }
  return e;
}

}  // namespace ddosguard

#endif  // DDOSGUARD_HARNESS_HPP_
