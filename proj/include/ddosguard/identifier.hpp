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

#ifndef DDOSGUARD_IDENTIFIER_HPP_
#define DDOSGUARD_IDENTIFIER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ddosguard/traffic.hpp"

namespace ddosguard {

/// Measured per-source rates over [window_start, window_end). `rates` is
/// indexed by SourceId value and covers every known source.
struct PerSourceMeasurement {
  double window_start = 0.0;
  double window_end = 0.0;
  std::vector<double> rates;

  double window_length() const { return window_end - window_start; }
  double total_rate() const { return std::accumulate(rates.begin(), rates.end(), 0.0); }
};

/// Collects per-source packet counts slot by slot.
class PerSourceAccumulator {
 public:
  explicit PerSourceAccumulator(std::size_t n_sources = 0) : counts_(n_sources, 0) {}

  void reset(std::size_t n_sources) { counts_.assign(n_sources, 0); }

  void add(const SlotTraffic& slot) {
    if (!slot.per_source) {
      throw std::invalid_argument("per-source counts missing from measured slot");
    }
    for (const SourceCount& c : *slot.per_source) {
      if (c.id.value >= counts_.size()) counts_.resize(c.id.value + 1, 0);
      counts_[c.id.value] += c.count;
    }
  }

  PerSourceMeasurement finish(double window_start, double window_seconds) const {
    if (!(window_seconds > 0.0)) throw std::invalid_argument("empty measurement window");
    PerSourceMeasurement m{window_start, window_start + window_seconds, {}};
    m.rates.reserve(counts_.size());
    for (std::uint64_t c : counts_) m.rates.push_back(static_cast<double>(c) / window_seconds);
    return m;
  }

  const std::vector<std::uint64_t>& counts() const { return counts_; }

 private:
  std::vector<std::uint64_t> counts_;
};

inline PerSourceMeasurement measure_per_source(std::span<const SlotTraffic> slots,
                                               double window_start, double window_seconds,
                                               std::size_t n_sources) {
  if (slots.empty()) throw std::invalid_argument("empty measurement window");
  PerSourceAccumulator acc(n_sources);
  for (const SlotTraffic& s : slots) acc.add(s);
  return acc.finish(window_start, window_seconds);
}

/// Attack-rate budget: measured aggregate minus the last trusted normal
/// level, clamped at zero.
inline double estimate_attack_rate(double total_rate, double baseline_rate) {
  return std::max(0.0, total_rate - baseline_rate);
}

/// Disjoint split of the measured source set; both lists sorted by id.
struct Classification {
  std::vector<SourceId> attackers;
  std::vector<SourceId> legal;
};

namespace detail {

inline Classification greedy_prefix(const PerSourceMeasurement& m,
                                    std::vector<SourceId> candidates,
                                    std::vector<SourceId> legal, double budget) {
  std::sort(candidates.begin(), candidates.end(), [&](SourceId a, SourceId b) {
    const double ra = m.rates[a.value];
    const double rb = m.rates[b.value];
    return ra != rb ? ra > rb : a < b;
  });
  Classification out;
  double sum = 0.0;
  std::size_t taken = 0;
  for (; taken < candidates.size(); ++taken) {
    const double next = sum + m.rates[candidates[taken].value];
    if (next > budget) break;
    sum = next;
  }
  out.attackers.assign(candidates.begin(), candidates.begin() + taken);
  legal.insert(legal.end(), candidates.begin() + taken, candidates.end());
  out.legal = std::move(legal);
  std::sort(out.attackers.begin(), out.attackers.end());
  std::sort(out.legal.begin(), out.legal.end());
  return out;
}

}  // namespace detail

/// Highest-rate sources first (ties by ascending id); the longest prefix
/// whose summed rate stays within `budget` is classified as attacking.
inline Classification identify_greedy(const PerSourceMeasurement& m, double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("attack-rate budget must be >= 0");
  std::vector<SourceId> all(m.rates.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = SourceId{i};
  return detail::greedy_prefix(m, std::move(all), {}, budget);
}

/// As identify_greedy, except sources seen before the attack (`exempt`) are
/// always classified legal and only the remainder competes for the budget.
inline Classification identify_by_history(const PerSourceMeasurement& m,
                                          std::span<const SourceId> exempt, double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("attack-rate budget must be >= 0");
  std::vector<bool> is_exempt(m.rates.size(), false);
  for (SourceId id : exempt) {
    if (id.value < is_exempt.size()) is_exempt[id.value] = true;
  }
  std::vector<SourceId> candidates;
  std::vector<SourceId> legal;
  for (std::uint32_t i = 0; i < m.rates.size(); ++i) {
    (is_exempt[i] ? legal : candidates).push_back(SourceId{i});
  }
  return detail::greedy_prefix(m, std::move(candidates), std::move(legal), budget);
}

/// Records, per source, the 1-second buckets in which it sent traffic.
class ActivityLog {
 public:
  explicit ActivityLog(std::size_t n_sources = 0) : seen_(n_sources) {}

  void record(const SlotTraffic& slot, double slot_dt) {
    if (!slot.per_source) return;
    const auto second =
        static_cast<std::int64_t>(std::floor(static_cast<double>(slot.slot_index) * slot_dt + 1e-9));
    for (const SourceCount& c : *slot.per_source) {
      if (c.id.value >= seen_.size()) seen_.resize(c.id.value + 1);
      auto& v = seen_[c.id.value];
      if (v.empty() || v.back() != second) v.push_back(second);
    }
  }

  /// Sources with any traffic in [from, to) seconds, sorted by id.
  std::vector<SourceId> active_between(double from, double to) const {
    const auto lo = static_cast<std::int64_t>(std::floor(from + 1e-9));
    const auto hi = static_cast<std::int64_t>(std::floor(to + 1e-9));
    std::vector<SourceId> out;
    for (std::uint32_t i = 0; i < seen_.size(); ++i) {
      const auto& v = seen_[i];
      const auto it = std::lower_bound(v.begin(), v.end(), lo);
      if (it != v.end() && *it < hi) out.push_back(SourceId{i});
    }
    return out;
  }

 private:
  std::vector<std::vector<std::int64_t>> seen_;
};

struct FilterState {
  std::vector<SourceId> blocked;  // sorted
  std::optional<double> activated_at;
  std::optional<double> released_at;

  bool active() const { return activated_at.has_value() && !released_at.has_value(); }
  bool blocks(SourceId id) const {
    return std::binary_search(blocked.begin(), blocked.end(), id);
  }

  void activate(std::vector<SourceId> ids, double at) {
    std::sort(ids.begin(), ids.end());
    blocked = std::move(ids);
    activated_at = at;
    released_at.reset();
  }
  void release(double at) { released_at = at; }
};

struct FilteredSlot {
  SlotTraffic slot;
  std::uint64_t filtered = 0;
};

/// Discards packets from blocked sources ahead of buffer admission.
inline FilteredSlot apply_filter(const FilterState& filter, SlotTraffic slot,
                                 const TrafficPopulation& population) {
  if (!filter.active() || filter.blocked.empty()) return {std::move(slot), 0};
  if (!slot.per_source) {
    throw std::invalid_argument("apply_filter needs per-source counts while active");
  }
  FilteredSlot out;
  std::vector<SourceCount> kept;
  kept.reserve(slot.per_source->size());
  std::uint64_t legal = 0;
  std::uint64_t attack = 0;
  for (const SourceCount& c : *slot.per_source) {
    if (filter.blocks(c.id)) {
      out.filtered += c.count;
      continue;
    }
    kept.push_back(c);
    (population.kind(c.id) == SourceKind::Legal ? legal : attack) += c.count;
  }
  slot.per_source = std::move(kept);
  slot.legal_aggregate = legal;
  slot.attack_aggregate = attack;
  slot.aggregate = legal + attack;
  out.slot = std::move(slot);
  return out;
}

}  // namespace ddosguard

#endif  // DDOSGUARD_IDENTIFIER_HPP_
