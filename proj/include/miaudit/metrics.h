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

#ifndef MIAUDIT_METRICS_H_
#define MIAUDIT_METRICS_H_

#include <span>
#include <utility>
#include <vector>

namespace miaudit {

struct RocPoint {
  double tau = 0.0;  // +inf for the sentinel
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

// Sorted by descending tau; fpr and tpr non-decreasing.
struct RocCurve {
  std::vector<RocPoint> points;
  bool operator==(const RocCurve&) const = default;
};

// Thresholds are the distinct scores plus +inf; member iff score >= tau.
RocCurve Roc(std::span<const double> scores, const std::vector<bool>& truth);

// Max tpr over points with fpr <= t.
double TprAtFpr(const RocCurve& curve, double t);

// Mean over distinct achievable fpr levels <= t of the max tpr at each
// level; 0 when no level qualifies.
double Rta(const RocCurve& curve, double t);

struct RtaCurve {
  std::vector<double> t;
  std::vector<double> values;
  bool operator==(const RtaCurve&) const = default;
};

// 30 log-spaced points from 1e-3 to 1.
std::vector<double> DefaultRtaGrid();

RtaCurve ComputeRtaCurve(std::span<const double> scores,
                         const std::vector<bool>& truth,
                         std::span<const double> t_grid);
RtaCurve ComputeRtaCurve(const RocCurve& curve, std::span<const double> t_grid);

inline constexpr double kSummaryTprLevels[] = {0.001, 0.01, 0.03, 0.05};
inline constexpr double kSummaryRtaLevels[] = {0.0, 0.01, 0.03, 0.05, 1.0};

struct MetricSummary {
  std::vector<std::pair<double, double>> tpr_at;  // (fpr bound, tpr)
  std::vector<std::pair<double, double>> rta_at;  // (t, rta)
  bool operator==(const MetricSummary&) const = default;
};

MetricSummary Summarize(const RocCurve& curve);

}  // namespace miaudit

#endif  // MIAUDIT_METRICS_H_
