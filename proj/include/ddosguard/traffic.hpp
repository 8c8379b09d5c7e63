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

#ifndef DDOSGUARD_TRAFFIC_HPP_
#define DDOSGUARD_TRAFFIC_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "ddosguard/error.hpp"

namespace ddosguard {

using Rng = std::mt19937_64;

/// Dense source index: legal sources are 0..N-1, attackers N..N+A-1.
struct SourceId {
  std::uint32_t value = 0;
  auto operator<=>(const SourceId&) const = default;
};

enum class SourceKind { Legal, Attacking };

struct TrafficSource {
  SourceId id;
  SourceKind kind = SourceKind::Legal;
  double rate = 0.0;  // packets per second
  double active_from = 0.0;
  double active_to = 0.0;
};

/// Converts a time in seconds to a slot boundary index.
inline std::int64_t slot_of(double seconds, double slot_dt) {
  return static_cast<std::int64_t>(std::llround(seconds / slot_dt));
}

namespace detail {

inline bool is_slot_multiple(double seconds, double slot_dt) {
  const double slots = seconds / slot_dt;
  return std::fabs(slots - std::round(slots)) < 1e-6;
}

}  // namespace detail

struct ScenarioConfig {
  std::uint32_t n_legal = 0;
  std::uint32_t n_attack = 0;
  double lambda_n = 0.0;  // packets/sec per legal source
  double lambda_a = 0.0;  // packets/sec per attacking source
  double mu = 0.0;        // service, packets/sec
  std::uint64_t l1 = 0;
  std::uint64_t l2 = 0;
  double t_star = 0.0;
  double attack_end = 0.0;
  double total_duration = 0.0;
  double slot_dt = 0.1;
  std::uint64_t seed = 1;

  double q_ratio() const { return lambda_a / lambda_n; }

  /// Expected aggregate legal packets per slot; for Poisson traffic this is
  /// also the variance, so sigma_n is its square root.
  double normal_slot_mean() const { return n_legal * lambda_n * slot_dt; }
  double attack_slot_mean() const { return n_attack * lambda_a * slot_dt; }
  double sigma_n() const { return std::sqrt(normal_slot_mean()); }
  double sigma_a() const { return std::sqrt(attack_slot_mean()); }

  std::int64_t total_slots() const { return slot_of(total_duration, slot_dt); }

  void validate() const {
    if (n_legal == 0) throw ConfigError("legal_clients", "must be positive");
    if (!(lambda_n > 0.0)) throw ConfigError("normal_rate_lambda_n", "must be positive");
    if (!(lambda_a > 0.0)) throw ConfigError("attack_rate_lambda_a", "must be positive");
    if (!(mu > 0.0)) throw ConfigError("service_rate_mu", "must be positive");
    if (l1 == 0) throw ConfigError("buffer_l1", "must be positive");
    if (!(slot_dt > 0.0) || slot_dt > 1.0) {
      throw ConfigError("slot_dt", "must lie in (0, 1] seconds");
    }
    if (!detail::is_slot_multiple(1.0, slot_dt)) {
      throw ConfigError("slot_dt", "must divide one second evenly");
    }
    if (!(t_star >= 0.0)) throw ConfigError("attack_start", "must be non-negative");
    if (!(t_star < attack_end)) throw ConfigError("attack_end", "must follow attack_start");
    if (!(attack_end <= total_duration)) {
      throw ConfigError("duration", "must not precede attack_end");
    }
    for (auto [name, value] : {std::pair{"attack_start", t_star},
                               std::pair{"attack_end", attack_end},
                               std::pair{"duration", total_duration}}) {
      if (!detail::is_slot_multiple(value, slot_dt)) {
        throw ConfigError(name, "must be a whole number of slots");
      }
    }
  }

  bool operator==(const ScenarioConfig&) const = default;
};

inline std::vector<TrafficSource> build_sources(const ScenarioConfig& config) {
  std::vector<TrafficSource> sources;
  sources.reserve(std::size_t{config.n_legal} + config.n_attack);
  std::uint32_t next = 0;
  for (std::uint32_t i = 0; i < config.n_legal; ++i) {
    sources.push_back({SourceId{next++}, SourceKind::Legal, config.lambda_n, 0.0,
                       config.total_duration});
  }
  for (std::uint32_t i = 0; i < config.n_attack; ++i) {
    sources.push_back({SourceId{next++}, SourceKind::Attacking, config.lambda_a,
                       config.t_star, config.attack_end});
  }
  return sources;
}

// ---------------------------------------------------------------------------
// Sampling

/// Uniform double in the open interval (0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const auto i = static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n));
  return std::min(i, n - 1);
}

/// Poisson variate. Sequential-search inversion below mean 30, Hormann's
/// transformed rejection (PTRS) above.
inline std::uint64_t poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) {
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform01(rng);
    std::uint64_t k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p < 1e-300 && cdf < u) break;  // u beyond representable tail
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform01(rng) - 0.5;
    const double v = uniform01(rng);
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

struct SourceCount {
  SourceId id;
  std::uint64_t count = 0;
  bool operator==(const SourceCount&) const = default;
};

struct SlotTraffic {
  std::int64_t slot_index = 0;
  std::uint64_t aggregate = 0;
  std::uint64_t legal_aggregate = 0;
  std::uint64_t attack_aggregate = 0;
  /// Non-zero counts only, sorted by id. Present only when requested.
  std::optional<std::vector<SourceCount>> per_source;

  bool operator==(const SlotTraffic&) const = default;
};

/// Source set grouped into cohorts of identical (kind, rate, activity
/// window), so per-slot work scales with the number of cohorts rather than
/// sources.
class TrafficPopulation {
 public:
  TrafficPopulation(std::span<const TrafficSource> sources, double slot_dt)
      : sources_(sources.begin(), sources.end()), slot_dt_(slot_dt) {
    std::map<std::tuple<int, double, std::int64_t, std::int64_t>, std::size_t> index;
    for (const TrafficSource& s : sources_) {
      const auto key = std::tuple{static_cast<int>(s.kind), s.rate,
                                  slot_of(s.active_from, slot_dt),
                                  slot_of(s.active_to, slot_dt)};
      auto [it, inserted] = index.try_emplace(key, cohorts_.size());
      if (inserted) {
        cohorts_.push_back({s.kind, s.rate, std::get<2>(key), std::get<3>(key), {}});
      }
      cohorts_[it->second].members.push_back(s.id);
    }
    for (const TrafficSource& s : sources_) {
      if (s.id.value >= kinds_.size()) kinds_.resize(s.id.value + 1, SourceKind::Legal);
      kinds_[s.id.value] = s.kind;
    }
  }

  std::span<const TrafficSource> sources() const { return sources_; }
  std::size_t size() const { return kinds_.size(); }
  SourceKind kind(SourceId id) const { return kinds_.at(id.value); }
  double slot_dt() const { return slot_dt_; }

 private:
  struct Cohort {
    SourceKind kind;
    double rate;
    std::int64_t from_slot;
    std::int64_t to_slot;
    std::vector<SourceId> members;

    bool active(std::int64_t slot) const { return from_slot <= slot && slot < to_slot; }
  };

  std::vector<TrafficSource> sources_;
  std::vector<Cohort> cohorts_;
  std::vector<SourceKind> kinds_;
  double slot_dt_ = 0.0;

  friend class TrafficGenerator;
};

/// Slot generator bound to a population and a slot duration.
class TrafficGenerator {
 public:
  explicit TrafficGenerator(const TrafficPopulation& population)
      : population_(&population), slot_dt_(population.slot_dt()) {}

  /// Each class draws one Poisson aggregate with mean (sum of active member
  /// rates) * slot_dt. Per-source attribution splits the class aggregate
  /// multinomially with probabilities proportional to member rates, which is
  /// exact for independent Poisson sources.
  SlotTraffic generate(std::int64_t slot_index, Rng& rng, bool want_per_source) const {
    SlotTraffic slot;
    slot.slot_index = slot_index;
    std::vector<SourceCount> counts;
    for (SourceKind kind : {SourceKind::Legal, SourceKind::Attacking}) {
      active_.clear();
      weights_.clear();
      double total_weight = 0.0;
      for (const auto& cohort : population_->cohorts_) {
        if (cohort.kind != kind || !cohort.active(slot_index)) continue;
        total_weight += cohort.rate * static_cast<double>(cohort.members.size());
        active_.push_back(&cohort);
        weights_.push_back(total_weight);
      }
      const std::uint64_t n = poisson(rng, total_weight * slot_dt_);
      (kind == SourceKind::Legal ? slot.legal_aggregate : slot.attack_aggregate) = n;
      if (!want_per_source) continue;
      for (std::uint64_t p = 0; p < n; ++p) {
        std::size_t c = 0;
        if (active_.size() > 1) {
          const double u = uniform01(rng) * total_weight;
          c = static_cast<std::size_t>(
              std::upper_bound(weights_.begin(), weights_.end(), u) - weights_.begin());
          c = std::min(c, active_.size() - 1);
        }
        const auto& members = active_[c]->members;
        counts.push_back({members[uniform_index(rng, members.size())], 1});
      }
    }
    slot.aggregate = slot.legal_aggregate + slot.attack_aggregate;
    if (want_per_source) {
      std::sort(counts.begin(), counts.end(),
                [](const SourceCount& a, const SourceCount& b) { return a.id < b.id; });
      std::vector<SourceCount> merged;
      for (const SourceCount& c : counts) {
        if (!merged.empty() && merged.back().id == c.id) {
          ++merged.back().count;
        } else {
          merged.push_back(c);
        }
      }
      slot.per_source = std::move(merged);
    }
    return slot;
  }

 private:
  const TrafficPopulation* population_;
  double slot_dt_;
  mutable std::vector<const TrafficPopulation::Cohort*> active_;
  mutable std::vector<double> weights_;
};

inline SlotTraffic generate_slot(const TrafficPopulation& population,
                                 std::int64_t slot_index, Rng& rng, bool want_per_source) {
  return TrafficGenerator(population).generate(slot_index, rng, want_per_source);
}

}  // namespace ddosguard

#endif  // DDOSGUARD_TRAFFIC_HPP_
