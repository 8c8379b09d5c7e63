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


#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ddosguard/harness.hpp"

using namespace ddosguard;

namespace {

TEST(Presets, KnownValues) {
  const Experiment s1 = preset("sim1");
  EXPECT_EQ(s1.scenario.n_legal, 10000u);
  EXPECT_EQ(s1.scenario.n_attack, 5000u);
  EXPECT_DOUBLE_EQ(s1.scenario.lambda_a, 0.4);
  EXPECT_DOUBLE_EQ(s1.scenario.mu, 1500.0);
  EXPECT_EQ(s1.scenario.l1 + s1.scenario.l2, 30040u);
  const Experiment s2 = preset("sim2");
  EXPECT_EQ(s2.scenario.n_legal, 50u);
  EXPECT_DOUBLE_EQ(s2.scenario.mu, 8.0);
  EXPECT_EQ(s2.scenario.l1 + s2.scenario.l2, 200u);
  EXPECT_TRUE(s2.detector.use_statistical);
  EXPECT_EQ(s2.method, IdentificationMethod::History);
  EXPECT_EQ(preset("case2"), s2);
  EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Validation, WindowsMustPrecedeAttack) {
  Experiment e = preset("sim2");
  e.detector.w_l = 95;
  EXPECT_THROW(validate_run(e.scenario, e.detector), ConfigError);
  e.detector.w_l = 89;
  EXPECT_NO_THROW(validate_run(e.scenario, e.detector));
}

TEST(RunOnce, DeterministicPerSeed) {
  const Experiment e = preset("sim2");
  const RunMetrics a = run_once(e.scenario, e.detector, e.method, 3);
  const RunMetrics b = run_once(e.scenario, e.detector, e.method, 3);
  EXPECT_EQ(a, b);
  int differing = 0;
  for (std::uint64_t s = 4; s < 8; ++s) {
    differing += !(run_once(e.scenario, e.detector, e.method, s) == a);
  }
  EXPECT_GT(differing, 0);
}

TEST(RunOnce, InvariantsOnSmallScenario) {
  const Experiment e = preset("sim2");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RunMetrics m = run_once(e.scenario, e.detector, e.method, seed);
    EXPECT_EQ(m.seed, seed);
    EXPECT_LE(m.correctly_identified_attackers, e.scenario.n_attack);
    EXPECT_LE(m.legal_filtered, e.scenario.n_legal);
    EXPECT_LE(m.max_buffer_level, e.scenario.l1 + e.scenario.l2);
    if (m.restore_time) {
      ASSERT_TRUE(m.detection_time);
      EXPECT_GT(*m.restore_time, *m.detection_time + e.detector.w_s);
    }
    if (m.packets_dropped > 0) {
      EXPECT_EQ(m.max_buffer_level, e.scenario.l1 + e.scenario.l2);
    }
  }
}

TEST(RunOnce, NoAttackersMeansNoAttackerMetrics) {
  Experiment e = preset("sim2");
  e.scenario.n_attack = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunMetrics m = run_once(e.scenario, e.detector, e.method, seed);
    EXPECT_EQ(m.correctly_identified_attackers, 0u);
    EXPECT_FALSE(m.l1_full_time);
    EXPECT_EQ(m.packets_dropped, 0u);
  }
}

TEST(RunOnce, UnconfirmedAlarmsAreDismissed) {
  Experiment e = preset("sim2");
  e.scenario.n_attack = 0;
  std::uint64_t dismissed = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const RunMetrics m = run_once(e.scenario, e.detector, e.method, seed);
    dismissed += m.dismissed_alarms;
    if (m.detected) {
      EXPECT_EQ(m.statistical_confirmed, std::optional<bool>(true));
    }
    if (!m.detected) {
      EXPECT_EQ(m.filtered_packets, 0u);
    }
  }
  EXPECT_GT(dismissed, 0u);
}

TEST(RunOnce, LargeScenarioDetectsByBufferQuickly) {
  const Experiment e = preset("sim1");
  const RunMetrics m = run_once(e.scenario, e.detector, e.method, 1);
  ASSERT_TRUE(m.detected);
  EXPECT_EQ(m.detection_method, DetectionMethod::BufferFull);
  ASSERT_TRUE(m.l1_full_time);
  // Excess arrival rate is 1000 + 2000 - 1500 packets/s, so 40 packets take
  // about 40 / 1500 s.
  EXPECT_LT(*m.l1_full_time, 0.1);
  EXPECT_GT(m.correctly_identified_attackers, 3000u);
  EXPECT_EQ(m.packets_dropped, 0u);
}

TEST(Restoration, FluidDrainOracle) {
  // Buffer drains 15 packets per slot from 15000 while 10 packets per slot
  // are admitted; calm once occupancy < 40 for 1000 consecutive slots.
  std::vector<std::uint64_t> occ;
  std::vector<double> admitted;
  for (int k = 0; k < 4000; ++k) {
    const long v = 15000 - 15L * (k + 1);
    occ.push_back(v > 0 ? static_cast<std::uint64_t>(v) : 0);
    admitted.push_back(10.0);
  }
  // First k with 15000 - 15 (k + 1) < 40.
  const int k0 = 997;
  const auto t = declare_restored(occ, admitted, 40, 16.0, 1000, 0, 0.01, 0.0);
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, (k0 + 1000) * 0.01, 1e-9);
  EXPECT_FALSE(declare_restored(occ, admitted, 40, 9.0, 1000, 0, 0.01, 0.0));
}

TEST(Restoration, TrackerNeedsConsecutiveSlots) {
  RestorationTracker t(3);
  EXPECT_FALSE(t.update(true));
  EXPECT_FALSE(t.update(true));
  EXPECT_FALSE(t.update(false));
  EXPECT_FALSE(t.update(true));
  EXPECT_FALSE(t.update(true));
  EXPECT_TRUE(t.update(true));
}

TEST(Summary, MinMeanAndInterval) {
  const std::vector<double> v{1.0, 3.0};
  const MetricSummary s = summarize_metric(v);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.avg, 2.0);
  EXPECT_NEAR(s.ci95_halfwidth, 1.96, 1e-12);
  EXPECT_EQ(summarize_metric({}).count, 0u);
}

TEST(Batch, SeedsAreConsecutive) {
  const Experiment e = preset("sim2");
  EXPECT_THROW(run_batch(e.scenario, e.detector, e.method, 1, 7), ConfigError);
  const BatchReport r = run_batch(e.scenario, e.detector, e.method, 3, 7);
  ASSERT_EQ(r.runs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.runs[i], run_once(e.scenario, e.detector, e.method, 7 + i));
  }
  EXPECT_EQ(r.stats.runs, 3u);
}

TEST(Sweep, SingleValueMatchesRunOnce) {
  const Experiment e = preset("sim2");
  const std::vector<double> ws{5.0, 20.0};
  const auto rows = sweep_window(e.scenario, e.detector, e.method, ws, 2, 11);
  ASSERT_EQ(rows.size(), 4u);
  DetectorConfig d = e.detector;
  d.w_s = 20.0;
  EXPECT_EQ(rows[3].metrics, run_once(e.scenario, d, e.method, 12));
  EXPECT_EQ(rows[0].metrics.seed, rows[2].metrics.seed);
  const std::vector<double> bad{50.0};
  EXPECT_THROW(sweep_window(e.scenario, e.detector, e.method, bad, 1, 1), ConfigError);
}

}  // namespace
