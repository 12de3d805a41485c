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

#ifndef MIAUDIT_TESTS_METRICS_ORACLE_H_
#define MIAUDIT_TESTS_METRICS_ORACLE_H_

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "miaudit/metrics.h"

namespace miaudit::testing {

// Evaluates TPR and FPR at every candidate threshold independently.
inline std::vector<RocPoint> BruteForceRoc(std::span<const double> scores,
                                           const std::vector<bool>& truth) {
  std::set<double, std::greater<>> taus(scores.begin(), scores.end());
  std::vector<double> all = {std::numeric_limits<double>::infinity()};
  all.insert(all.end(), taus.begin(), taus.end());
  double members = 0, nonmembers = 0;
  for (bool t : truth) (t ? members : nonmembers) += 1;
  std::vector<RocPoint> out;
  for (double tau : all) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= tau) (truth[i] ? tp : fp) += 1;
    }
    out.push_back({tau, fp / nonmembers, tp / members});
  }
  return out;
}

inline double BruteForceRta(std::span<const double> scores,
                            const std::vector<bool>& truth, double t) {
  std::map<double, double> best;
  for (const RocPoint& p : BruteForceRoc(scores, truth)) {
    if (p.fpr > t) continue;
    auto [it, fresh] = best.emplace(p.fpr, p.tpr);
    if (!fresh) it->second = std::max(it->second, p.tpr);
  }
  if (best.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [fpr, tpr] : best) sum += tpr;
  return sum / static_cast<double>(best.size());
}

}  // namespace miaudit::testing

#endif  // MIAUDIT_TESTS_METRICS_ORACLE_H_
