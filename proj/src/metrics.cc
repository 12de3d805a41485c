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

#include "miaudit/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "miaudit/error.h"

namespace miaudit {

RocCurve Roc(std::span<const double> scores, const std::vector<bool>& truth) {
  if (scores.size() != truth.size()) {
    throw Error(ErrorCode::kMetric, "scores and truth differ in length");
  }
  std::size_t members = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw Error(ErrorCode::kMetric, "NaN score");
    members += truth[i];
  }
  const std::size_t nonmembers = scores.size() - members;
  if (members == 0 || nonmembers == 0) {
    throw Error(ErrorCode::kMetric,
                "ROC needs at least one member and one non-member");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double tau = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == tau; ++i) {
      if (truth[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
    }
    curve.points.push_back({tau, static_cast<double>(fp) / nonmembers,
                            static_cast<double>(tp) / members});
  }
  return curve;
}

double TprAtFpr(const RocCurve& curve, double t) {
  double best = 0.0;
  for (const RocPoint& p : curve.points) {
    if (p.fpr <= t) best = std::max(best, p.tpr);
  }
  return best;
}

double Rta(const RocCurve& curve, double t) {
  // Points arrive in non-decreasing fpr order.
  double sum = 0.0;
  std::size_t levels = 0;
  for (std::size_t i = 0; i < curve.points.size();) {
    const double fpr = curve.points[i].fpr;
    if (fpr > t) break;
    double best = 0.0;
    for (; i < curve.points.size() && curve.points[i].fpr == fpr; ++i) {
      best = std::max(best, curve.points[i].tpr);
    }
    sum += best;
    ++levels;
  }
  return levels == 0 ? 0.0 : sum / static_cast<double>(levels);
}

std::vector<double> DefaultRtaGrid() {
  constexpr int kPoints = 30;
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    grid[i] = std::pow(10.0, -3.0 + 3.0 * i / (kPoints - 1));
  }
  grid.front() = 1e-3;
  grid.back() = 1.0;
  return grid;
}

RtaCurve ComputeRtaCurve(const RocCurve& curve,
                         std::span<const double> t_grid) {
  RtaCurve out;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (!(t > 0.0 && t <= 1.0)) {
      throw Error(ErrorCode::kMetric,
                  "RTA grid values must lie in (0, 1], got " + std::to_string(t));
    }
    if (i > 0 && !(t > t_grid[i - 1])) {
      throw Error(ErrorCode::kMetric, "RTA grid must be strictly ascending");
    }
    out.t.push_back(t);
    out.values.push_back(Rta(curve, t));
  }
  return out;
}

RtaCurve ComputeRtaCurve(std::span<const double> scores,
                         const std::vector<bool>& truth,
                         std::span<const double> t_grid) {
  return ComputeRtaCurve(Roc(scores, truth), t_grid);
}

MetricSummary Summarize(const RocCurve& curve) {
  MetricSummary s;
  for (double t : kSummaryTprLevels) s.tpr_at.emplace_back(t, TprAtFpr(curve, t));
  for (double t : kSummaryRtaLevels) s.rta_at.emplace_back(t, Rta(curve, t));
  return s;
}

}  // namespace miaudit
