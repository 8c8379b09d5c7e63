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


#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ddosguard/identifier.hpp"

using namespace ddosguard;

namespace {

PerSourceMeasurement rates_of(std::vector<double> r) { return {0.0, 1.0, std::move(r)}; }

std::vector<std::uint32_t> values(const std::vector<SourceId>& ids) {
  std::vector<std::uint32_t> out;
  for (SourceId id : ids) out.push_back(id.value);
  return out;
}

TEST(Greedy, WorkedExample) {
  const auto c = identify_greedy(rates_of({5, 4, 3, 2, 1}), 12.0);
  EXPECT_EQ(values(c.attackers), (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_EQ(values(c.legal), (std::vector<std::uint32_t>{3, 4}));
}

TEST(Greedy, PrefixStopsAtFirstOverflow) {
  // 5 + 4 = 9 fits in 10; adding 3 overflows, and 1 is not considered.
  const auto c = identify_greedy(rates_of({5, 4, 3, 1}), 10.0);
  EXPECT_EQ(values(c.attackers), (std::vector<std::uint32_t>{0, 1}));
}

TEST(Greedy, TiesBreakByAscendingId) {
  const auto c = identify_greedy(rates_of({2, 3, 2, 2}), 6.0);
  EXPECT_EQ(values(c.attackers), (std::vector<std::uint32_t>{0, 1}));
}

TEST(Greedy, ZeroBudgetAndValidation) {
  EXPECT_TRUE(identify_greedy(rates_of({1, 2}), 0.0).attackers.empty());
  EXPECT_THROW(identify_greedy(rates_of({1}), -1.0), std::invalid_argument);
}

// Brute force: the longest prefix of the (rate desc, id asc) order within
// the budget, found by trying every prefix length.
std::vector<std::uint32_t> brute_force(const std::vector<double>& r, double budget) {
  std::vector<std::uint32_t> order(r.size());
  for (std::uint32_t i = 0; i < r.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return r[a] > r[b]; });
  std::size_t best = 0;
  for (std::size_t len = 0; len <= order.size(); ++len) {
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) sum += r[order[i]];
    if (sum <= budget) best = len;
    else break;
  }
  std::vector<std::uint32_t> out(order.begin(), order.begin() + best);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Greedy, AgreesWithBruteForceAndPartitions) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<double> r(n);
    for (double& x : r) x = static_cast<double>(rng() % 6) * 0.5;
    const double budget = static_cast<double>(rng() % 40) * 0.5;
    const auto c = identify_greedy(rates_of(r), budget);
    ASSERT_EQ(values(c.attackers), brute_force(r, budget));
    std::vector<std::uint32_t> all = values(c.attackers);
    const auto legal = values(c.legal);
    all.insert(all.end(), legal.begin(), legal.end());
    std::sort(all.begin(), all.end());
    for (std::uint32_t i = 0; i < n; ++i) ASSERT_EQ(all[i], i);
    double sum = 0.0;
    for (auto id : values(c.attackers)) sum += r[id];
    ASSERT_LE(sum, budget);
  }
}

TEST(History, ExemptSourcesStayLegal) {
  const std::vector<SourceId> exempt{SourceId{0}};
  const auto c = identify_by_history(rates_of({5, 4, 3, 2, 1}), exempt, 8.0);
  EXPECT_EQ(values(c.attackers), (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(values(c.legal), (std::vector<std::uint32_t>{0, 3, 4}));
}

TEST(History, MatchesGreedyOnRemainingSources) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 30;
    std::vector<double> r(n);
    for (double& x : r) x = static_cast<double>(rng() % 8);
    // Sources 0..14 are legal and seen before the attack.
    std::vector<SourceId> exempt;
    for (std::uint32_t i = 0; i < 15; ++i) exempt.push_back(SourceId{i});
    const double budget = static_cast<double>(rng() % 60);
    const auto legal_hits = [](const Classification& c) {
      return std::count_if(c.attackers.begin(), c.attackers.end(),
                           [](SourceId id) { return id.value < 15; });
    };
    const auto h = identify_by_history(rates_of(r), exempt, budget);
    EXPECT_EQ(legal_hits(h), 0);
    // Same set as the greedy prefix over the non-exempt sources alone.
    std::vector<double> rest(r.begin() + 15, r.end());
    std::vector<std::uint32_t> expect;
    for (auto id : brute_force(rest, budget)) expect.push_back(id + 15);
    EXPECT_EQ(values(h.attackers), expect);
  }
}

TEST(Budget, ClampedAtZero) {
  EXPECT_DOUBLE_EQ(estimate_attack_rate(15.0, 5.0), 10.0);
  EXPECT_DOUBLE_EQ(estimate_attack_rate(4.0, 5.0), 0.0);
}

SlotTraffic slot_with(std::int64_t k, std::vector<SourceCount> counts) {
  SlotTraffic s;
  s.slot_index = k;
  for (const auto& c : counts) s.aggregate += c.count;
  s.per_source = std::move(counts);
  return s;
}

TEST(Measurement, RatesFromCounts) {
  std::vector<SlotTraffic> slots{slot_with(0, {{SourceId{0}, 2}, {SourceId{2}, 1}}),
                                 slot_with(1, {{SourceId{2}, 3}})};
  const auto m = measure_per_source(slots, 100.0, 2.0, 3);
  EXPECT_EQ(m.rates, (std::vector<double>{1.0, 0.0, 2.0}));
  EXPECT_DOUBLE_EQ(m.total_rate(), 3.0);
  EXPECT_DOUBLE_EQ(m.window_length(), 2.0);
  SlotTraffic bare;
  PerSourceAccumulator acc(3);
  EXPECT_THROW(acc.add(bare), std::invalid_argument);
}

TEST(Activity, SecondsWithTraffic) {
  ActivityLog log(3);
  log.record(slot_with(5, {{SourceId{0}, 1}}), 0.1);    // second 0
  log.record(slot_with(25, {{SourceId{1}, 1}}), 0.1);   // second 2
  log.record(slot_with(41, {{SourceId{2}, 1}}), 0.1);   // second 4
  EXPECT_EQ(values(log.active_between(0.0, 3.0)), (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(values(log.active_between(2.0, 4.0)), (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(values(log.active_between(4.0, 5.0)), (std::vector<std::uint32_t>{2}));
}

TEST(Filter, DropsBlockedSourcesOnly) {
  std::vector<TrafficSource> sources{{SourceId{0}, SourceKind::Legal, 1, 0, 10},
                                     {SourceId{1}, SourceKind::Attacking, 1, 0, 10},
                                     {SourceId{2}, SourceKind::Attacking, 1, 0, 10}};
  const TrafficPopulation pop(sources, 0.1);
  FilterState f;
  SlotTraffic s = slot_with(3, {{SourceId{0}, 2}, {SourceId{1}, 4}, {SourceId{2}, 1}});
  EXPECT_EQ(apply_filter(f, s, pop).filtered, 0u);
  f.activate({SourceId{1}}, 0.4);
  EXPECT_TRUE(f.active());
  const auto out = apply_filter(f, s, pop);
  EXPECT_EQ(out.filtered, 4u);
  EXPECT_EQ(out.slot.aggregate, 3u);
  EXPECT_EQ(out.slot.legal_aggregate, 2u);
  EXPECT_EQ(out.slot.attack_aggregate, 1u);
  f.release(5.0);
  EXPECT_FALSE(f.active());
  EXPECT_EQ(apply_filter(f, s, pop).slot.aggregate, 7u);
}

}  // namespace
