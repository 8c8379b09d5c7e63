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

#ifndef DDOSGUARD_DETECTOR_HPP_
#define DDOSGUARD_DETECTOR_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ddosguard/error.hpp"
#include "ddosguard/queue.hpp"
#include "ddosguard/stats.hpp"
#include "ddosguard/traffic.hpp"

namespace ddosguard {

/// Fixed-capacity FIFO of per-slot packet counts with an exact running sum.
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity) : ring_(capacity) {
    if (capacity == 0) throw std::invalid_argument("window capacity must be positive");
  }

  /// Appends `value`; returns the evicted oldest value when the window was
  /// already full.
  std::optional<std::uint64_t> push(std::uint64_t value) {
    std::optional<std::uint64_t> evicted;
    if (size_ == ring_.size()) {
      evicted = ring_[head_];
      running_sum_ -= *evicted;
      ring_[head_] = value;
      head_ = (head_ + 1) % ring_.size();
    } else {
      ring_[(head_ + size_) % ring_.size()] = value;
      ++size_;
    }
    running_sum_ += value;
    return evicted;
  }

  double average() const {
    if (size_ == 0) throw std::logic_error("window not warmed up");
    return static_cast<double>(running_sum_) / static_cast<double>(size_);
  }

  std::size_t capacity() const { return ring_.size(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool full() const { return size_ == ring_.size(); }
  std::uint64_t running_sum() const { return running_sum_; }

  /// Oldest first.
  std::vector<std::uint64_t> contents() const {
    std::vector<std::uint64_t> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(ring_[(head_ + i) % ring_.size()]);
    return out;
  }

 private:
  std::vector<std::uint64_t> ring_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::uint64_t running_sum_ = 0;
};

enum class DetectionMethod { BufferFull, RatioRule, Statistical };

inline std::string_view to_string(DetectionMethod m) {
  switch (m) {
    case DetectionMethod::BufferFull: return "buffer_full";
    case DetectionMethod::RatioRule: return "ratio_rule";
    case DetectionMethod::Statistical: return "statistical";
  }
  return "unknown";
}

struct DetectorConfig {
  double w_s = 10.0;  // seconds
  double w_l = 45.0;  // seconds
  double r = 0.6;
  double c = 45.0;  // seconds of look-back for the last correct long-term rate
  double alpha = 0.05;
  double mpar_alpha = 0.025;
  std::size_t baseline_len = 45;  // PAR buckets
  bool use_buffer = true;
  bool use_ratio = true;
  bool use_statistical = false;

  void validate(double slot_dt) const {
    if (!(w_s > 0.0)) throw ConfigError("window_ws", "must be positive");
    if (!(w_s < w_l)) throw ConfigError("window_wl", "must exceed window_ws");
    if (!(r > 0.0)) throw ConfigError("tolerance_r", "must be positive");
    if (!(c > 0.0)) throw ConfigError("lookback_c", "must be positive");
    if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha", "must lie in (0, 0.5)");
    if (!(mpar_alpha > 0.0 && mpar_alpha <= 0.5)) {
      throw ConfigError("mpar_alpha", "must lie in (0, 0.5]");
    }
    if (baseline_len < 8) throw ConfigError("baseline_len", "must be at least 8");
    if (!use_buffer && !use_ratio && !use_statistical) {
      throw ConfigError("detect_buffer", "at least one detection method must be enabled");
    }
    for (auto [name, value] : {std::pair{"window_ws", w_s}, std::pair{"window_wl", w_l},
                               std::pair{"lookback_c", c}}) {
      if (!detail::is_slot_multiple(value, slot_dt)) {
        throw ConfigError(name, "must be a whole number of slots");
      }
    }
    if (use_statistical && !detail::is_slot_multiple(w_s, 1.0)) {
      throw ConfigError("window_ws", "must be whole seconds for the statistical detector");
    }
  }

  bool operator==(const DetectorConfig&) const = default;
};

/// Short average exceeds (1 + r) times the long average. Never fires against
/// a non-positive reference.
inline bool detect_ratio(double short_avg, double long_avg, double r) {
  if (!(long_avg > 0.0)) return false;
  return short_avg > (1.0 + r) * long_avg;
}

inline bool detect_buffer(const BufferState& buffer) { return is_l1_full(buffer); }

struct StatisticalDetails {
  std::optional<stats::TestResult> normality;  // K-S on the baseline
  double mpar = 0.0;                           // T_x upper bound
  double current_mean = 0.0;
  std::optional<stats::TestResult> mean_test;      // pooled t-test
  std::optional<stats::TestResult> variance_test;  // Levene
};

struct StatisticalVerdict {
  bool detected = false;
  StatisticalDetails details;
};

/// Accurate detector on PAR samples: K-S normality of the baseline
/// (informational), MPAR gate from the baseline's upper confidence bound, then
/// pooled t-test and Levene's test; flags an attack when the gate is exceeded
/// and either test rejects. A zero-variance baseline reduces to the gate.
inline StatisticalVerdict detect_statistical(std::span<const double> baseline_par,
                                             std::span<const double> current_par,
                                             double alpha = 0.05, double mpar_alpha = 0.025) {
  if (baseline_par.size() < 8 || current_par.size() < 2) {
    throw std::invalid_argument("detect_statistical: samples too short");
  }
  StatisticalVerdict verdict;
  auto& d = verdict.details;
  const stats::SummaryStats base = stats::summarize(baseline_par);
  d.current_mean = stats::sample_mean(current_par);
  d.mpar = stats::upper_conf_bound(base, mpar_alpha).upper;
  if (!(base.stddev > 0.0)) {
    verdict.detected = d.current_mean > d.mpar;
    return verdict;
  }
  d.normality = stats::ks_normality(baseline_par, alpha);
  if (d.current_mean <= d.mpar) return verdict;
  d.mean_test = stats::t_test_pooled(baseline_par, current_par, alpha);
  d.variance_test = stats::levene_test(baseline_par, current_par, alpha);
  verdict.detected = d.mean_test->reject || d.variance_test->reject;
  return verdict;
}

/// Short- and long-horizon traffic averages plus 1-second PAR buckets.
///
/// The long window is fed by values leaving the short window, so lambda-bar
/// covers the w_l slots that precede the short window and attack traffic in
/// the short window cannot inflate its own reference. Once frozen, the long
/// window stops absorbing traffic.
class TrafficMonitor {
 public:
  TrafficMonitor(const DetectorConfig& config, double slot_dt)
      : slot_dt_(slot_dt),
        short_(static_cast<std::size_t>(slot_of(config.w_s, slot_dt))),
        long_(static_cast<std::size_t>(slot_of(config.w_l, slot_dt))),
        slots_per_bucket_(slot_of(1.0, slot_dt)) {}

  void push(std::uint64_t aggregate) {
    if (auto evicted = short_.push(aggregate); evicted && !frozen_) long_.push(*evicted);
    long_history_.push_back(long_.full() ? long_.average()
                                         : std::numeric_limits<double>::quiet_NaN());
    bucket_accum_ += aggregate;
    bucket_closed_ = false;
    if (++slots_in_bucket_ == slots_per_bucket_) {
      buckets_.push_back(static_cast<double>(bucket_accum_));
      bucket_accum_ = 0;
      slots_in_bucket_ = 0;
      bucket_closed_ = true;
    }
  }

  void freeze() {
    if (frozen_) return;
    frozen_ = true;
    frozen_baseline_ = !long_.empty() ? long_.average() : short_.average();
  }
  void unfreeze() { frozen_ = false; }
  bool frozen() const { return frozen_; }
  /// Long-term per-slot average captured at freeze().
  double frozen_baseline() const { return frozen_baseline_; }

  const SlidingWindow& short_window() const { return short_; }
  const SlidingWindow& long_window() const { return long_; }
  bool ratio_armed() const { return long_.full(); }

  /// Long-window per-slot average as it stood at the end of `slot`, if the
  /// window was full then.
  std::optional<double> long_average_at(std::int64_t slot) const {
    if (slot < 0 || slot >= static_cast<std::int64_t>(long_history_.size())) return {};
    const double v = long_history_[static_cast<std::size_t>(slot)];
    if (std::isnan(v)) return {};
    return v;
  }

  std::int64_t slots_seen() const { return static_cast<std::int64_t>(long_history_.size()); }
  const std::vector<double>& par_buckets() const { return buckets_; }
  bool bucket_closed() const { return bucket_closed_; }
  double slot_dt() const { return slot_dt_; }

 private:
  double slot_dt_;
  SlidingWindow short_;
  SlidingWindow long_;
  bool frozen_ = false;
  double frozen_baseline_ = 0.0;
  std::vector<double> long_history_;
  std::int64_t slots_per_bucket_;
  std::int64_t slots_in_bucket_ = 0;
  std::uint64_t bucket_accum_ = 0;
  bool bucket_closed_ = false;
  std::vector<double> buckets_;
};

struct DetectionOutcome {
  bool detected = false;
  double t_hat = 0.0;  // seconds, end of the slot in which the alarm fired
  std::int64_t slot_index = -1;
  std::optional<DetectionMethod> method;
  /// Accurate-detector verdict; empty until it has been evaluated.
  std::optional<bool> confirmed;
  std::optional<StatisticalDetails> details;
};

enum class DetectionEvent { None, Alarm, StatisticalVerdict };

/// Per-run detection state machine.
///
/// Buffer-full and ratio rules are evaluated every slot. The statistical
/// detector is evaluated at the first PAR bucket boundary at or after an
/// alarm (confirmation); when it is the only enabled method it runs at every
/// bucket boundary instead. Simultaneous firings resolve by priority
/// Statistical > RatioRule > BufferFull.
class DetectionEngine {
 public:
  DetectionEngine(const DetectorConfig& config, double slot_dt)
      : config_(config), monitor_(config, slot_dt) {
    config_.validate(slot_dt);
  }

  DetectionEvent observe(std::int64_t slot_index, std::uint64_t aggregate,
                         const BufferState& buffer) {
    monitor_.push(aggregate);
    const double dt = monitor_.slot_dt();
    if (!outcome_.detected) {
      const bool buffer_fired = config_.use_buffer && detect_buffer(buffer);
      const bool ratio_fired =
          config_.use_ratio && monitor_.ratio_armed() &&
          detect_ratio(monitor_.short_window().average(), monitor_.long_window().average(),
                       config_.r);
      const bool standalone = !config_.use_buffer && !config_.use_ratio;
      if (!buffer_fired && !ratio_fired && !(standalone && monitor_.bucket_closed())) {
        return DetectionEvent::None;
      }
      const double t_hat = static_cast<double>(slot_index + 1) * dt;
      std::optional<StatisticalVerdict> verdict;
      if (config_.use_statistical && monitor_.bucket_closed()) verdict = evaluate(t_hat);
      const bool stat_fired = verdict && verdict->detected;
      if (!buffer_fired && !ratio_fired && !stat_fired) return DetectionEvent::None;

      outcome_.detected = true;
      outcome_.t_hat = t_hat;
      outcome_.slot_index = slot_index;
      outcome_.method = stat_fired    ? DetectionMethod::Statistical
                        : ratio_fired ? DetectionMethod::RatioRule
                                      : DetectionMethod::BufferFull;
      if (verdict) {
        outcome_.confirmed = verdict->detected;
        outcome_.details = verdict->details;
      }
      monitor_.freeze();
      return DetectionEvent::Alarm;
    }
    if (config_.use_statistical && !outcome_.confirmed && monitor_.bucket_closed()) {
      const StatisticalVerdict verdict = evaluate(outcome_.t_hat);
      outcome_.confirmed = verdict.detected;
      outcome_.details = verdict.details;
      return DetectionEvent::StatisticalVerdict;
    }
    return DetectionEvent::None;
  }

  /// True once the alarm is raised and no further verdict is pending.
  bool settled() const {
    return outcome_.detected && (!config_.use_statistical || outcome_.confirmed.has_value());
  }

  /// Starts a new detection cycle after service has been restored.
  void reset_cycle() {
    outcome_ = {};
    monitor_.unfreeze();
  }

  const DetectionOutcome& outcome() const { return outcome_; }
  const TrafficMonitor& monitor() const { return monitor_; }
  const DetectorConfig& config() const { return config_; }

 private:
  /// Baseline: `baseline_len` buckets ending at t_hat - c. Current: the last
  /// w_s completed buckets. Too little history yields a negative verdict.
  StatisticalVerdict evaluate(double t_hat) const {
    const auto& buckets = monitor_.par_buckets();
    const auto completed = static_cast<std::int64_t>(buckets.size());
    const auto current_len = static_cast<std::int64_t>(std::llround(config_.w_s));
    const auto baseline_end = static_cast<std::int64_t>(std::floor(t_hat - config_.c + 1e-9));
    const auto baseline_len = static_cast<std::int64_t>(config_.baseline_len);
    const std::int64_t baseline_begin = baseline_end - baseline_len;
    if (current_len > completed || baseline_begin < 0 || baseline_end > completed) return {};
    const std::span<const double> all(buckets);
    return detect_statistical(all.subspan(static_cast<std::size_t>(baseline_begin),
                                          static_cast<std::size_t>(baseline_len)),
                              all.subspan(static_cast<std::size_t>(completed - current_len)),
                              config_.alpha, config_.mpar_alpha);
  }

  DetectorConfig config_;
  TrafficMonitor monitor_;
  DetectionOutcome outcome_;
};

/// Runs detection over a recorded slot stream with the matching buffer
/// states (the state after each slot's step). Stops once the outcome is
/// settled or the stream ends.
inline DetectionOutcome run_detection(std::span<const SlotTraffic> slots,
                                      std::span<const BufferState> buffer_feed,
                                      const DetectorConfig& config, double slot_dt) {
  if (slots.size() != buffer_feed.size()) {
    throw std::invalid_argument("run_detection: slot and buffer feeds differ in length");
  }
  DetectionEngine engine(config, slot_dt);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    engine.observe(slots[i].slot_index, slots[i].aggregate, buffer_feed[i]);
    if (engine.settled()) break;
  }
  return engine.outcome();
}

}  // namespace ddosguard

#endif  // DDOSGUARD_DETECTOR_HPP_
