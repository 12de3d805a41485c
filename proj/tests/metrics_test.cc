// Copyright 2026 The mi-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "metrics_oracle.h"
#include "miaudit/error.h"
#include "miaudit/metrics.h"
#include "miaudit/rng.h"

namespace miaudit {
namespace {

using testing::BruteForceRoc;
using testing::BruteForceRta;

const std::vector<double> kScores = {0.9, 0.4, 0.6, 0.1};
const std::vector<bool> kTruth = {true, true, false, false};

TEST(MetricsTest, FourScoreExample) {
  const RocCurve c = Roc(kScores, kTruth);
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<RocPoint> expected = {{inf, 0.0, 0.0},
                                          {0.9, 0.0, 0.5},
                                          {0.6, 0.5, 0.5},
                                          {0.4, 0.5, 1.0},
                                          {0.1, 1.0, 1.0}};
  EXPECT_EQ(c.points, expected);
  EXPECT_EQ(Rta(c, 1.0), 2.5 / 3);
  EXPECT_EQ(TprAtFpr(c, 0.0), 0.5);
  // Max tpr over points with fpr <= 0.5 includes (0.5, 1.0).
  EXPECT_EQ(TprAtFpr(c, 0.5), 1.0);
  EXPECT_EQ(TprAtFpr(c, 0.49), 0.5);
  EXPECT_EQ(TprAtFpr(c, 1.0), 1.0);
}

TEST(MetricsTest, AllEqualScores) {
  const std::vector<double> s(6, 0.3);
  const std::vector<bool> t = {true, false, true, false, false, true};
  const RocCurve c = Roc(s, t);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0].fpr, 0.0);
  EXPECT_EQ(c.points[0].tpr, 0.0);
  EXPECT_EQ(c.points[1].fpr, 1.0);
  EXPECT_EQ(c.points[1].tpr, 1.0);
  EXPECT_EQ(Rta(c, 1.0), 0.5);
}

TEST(MetricsTest, PerfectAndAntiPerfectSeparation) {
  const std::vector<double> s = {5, 6, 7, 1, 2, 3};
  const std::vector<bool> t = {true, true, true, false, false, false};
  const RocCurve perfect = Roc(s, t);
  EXPECT_EQ(TprAtFpr(perfect, 0.0), 1.0);
  for (double x : {0.0, 0.001, 0.01, 0.3, 1.0}) EXPECT_EQ(Rta(perfect, x), 1.0);
  std::vector<bool> flipped(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) flipped[i] = !t[i];
  const RocCurve anti = Roc(s, flipped);
  for (double x : {0.0, 0.01, 0.5, 0.99}) EXPECT_EQ(Rta(anti, x), 0.0);
}

TEST(MetricsTest, SingleClassIsAnError) {
  const std::vector<double> s = {0.1, 0.2};
  try {
    Roc(s, {true, true});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMetric);
  }
  EXPECT_THROW(Roc(s, {false, false}), Error);
  EXPECT_THROW(Roc(s, {true}), Error);
  const std::vector<double> nan = {0.1, NAN};
  EXPECT_THROW(Roc(nan, {true, false}), Error);
}

TEST(MetricsTest, MatchesBruteForceOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    std::vector<double> s(n);
    std::vector<bool> t(n);
    const int levels = 1 + static_cast<int>(rng() % 50);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % levels) / levels;
      t[i] = rng() % 2;
    }
    t[0] = true;
    t[1] = false;
    const RocCurve c = Roc(s, t);
    EXPECT_EQ(c.points, BruteForceRoc(s, t));
    for (double x : {0.0, 0.01, 0.05, 0.3, 1.0}) {
      EXPECT_EQ(Rta(c, x), BruteForceRta(s, t, x));
    }
  }
}

TEST(MetricsTest, RtaIgnoresMonotoneTransforms) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(80), u(80);
    std::vector<bool> t(80);
    for (int i = 0; i < 80; ++i) {
      s[i] = static_cast<double>(rng() % 40);
      u[i] = 2.0 * s[i] * s[i] * s[i] + 1.0;
      t[i] = i % 2;
    }
    const RocCurve a = Roc(s, t), b = Roc(u, t);
    for (double x : DefaultRtaGrid()) EXPECT_EQ(Rta(a, x), Rta(b, x));
  }
}

TEST(MetricsTest, TprAtFprIsMonotone) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> s(200);
  std::vector<bool> t(200);
  for (int i = 0; i < 200; ++i) {
    s[i] = u(rng);
    t[i] = i % 3 == 0;
  }
  const RocCurve c = Roc(s, t);
  double prev = 0.0;
  for (double x : DefaultRtaGrid()) {
    const double v = TprAtFpr(c, x);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_EQ(TprAtFpr(c, 1.0), 1.0);
}

TEST(MetricsTest, RandomScoresGiveNullRta) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(DeriveSeed(seed, {77}));
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> s(1000);
    std::vector<bool> t(1000);
    for (int i = 0; i < 1000; ++i) {
      s[i] = u(rng);
      t[i] = i % 2;
    }
    const double r = Rta(Roc(s, t), 1.0);
    EXPECT_GE(r, 0.45);
    EXPECT_LE(r, 0.55);
  }
}

TEST(MetricsTest, DefaultGridIsLogSpaced) {
  const auto g = DefaultRtaGrid();
  ASSERT_EQ(g.size(), 30u);
  EXPECT_EQ(g.front(), 1e-3);
  EXPECT_EQ(g.back(), 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_GT(g[i], g[i - 1]);
    EXPECT_NEAR(std::log10(g[i]) - std::log10(g[i - 1]), 3.0 / 29, 1e-12);
  }
}

TEST(MetricsTest, RtaCurveFollowsGrid) {
  const std::vector<double> one = {1.0};
  const RtaCurve c = ComputeRtaCurve(kScores, kTruth, one);
  ASSERT_EQ(c.values.size(), 1u);
  EXPECT_EQ(c.values[0], Rta(Roc(kScores, kTruth), 1.0));
  const auto grid = DefaultRtaGrid();
  EXPECT_EQ(ComputeRtaCurve(kScores, kTruth, grid).values.size(), grid.size());
  const std::vector<double> bad = {0.5, 0.1};
  EXPECT_THROW(ComputeRtaCurve(kScores, kTruth, bad), Error);
  const std::vector<double> zero = {0.0};
  EXPECT_THROW(ComputeRtaCurve(kScores, kTruth, zero), Error);
}

TEST(MetricsTest, SummaryLevels) {
  const MetricSummary s = Summarize(Roc(kScores, kTruth));
  ASSERT_EQ(s.tpr_at.size(), 4u);
  ASSERT_EQ(s.rta_at.size(), 5u);
  EXPECT_EQ(s.tpr_at[1].first, 0.01);
  EXPECT_EQ(s.tpr_at[1].second, 0.5);
  EXPECT_EQ(s.rta_at[0].first, 0.0);
  EXPECT_EQ(s.rta_at[0].second, 0.5);
  EXPECT_EQ(s.rta_at[4].second, 2.5 / 3);
}

}  // namespace
}  // namespace miaudit
