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

#ifndef MIAUDIT_INDICATORS_H_
#define MIAUDIT_INDICATORS_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "miaudit/attack_prep.h"
#include "miaudit/nn.h"

namespace miaudit {

// Log-space likelihood ratios saturate at exp(+-kLogRatioLimit).
inline constexpr double kLogRatioLimit = 700.0;

// log(p / (1 - p)) with p clamped to [kProbClamp, 1 - kProbClamp].
double Phi(double prob);

double NormalCdf(double z);
double NormalLogPdf(double x, double mu, double sigma);

double LrOffline(double phi_obs, const GaussianStats& nonmember);
double LogLrOnline(double phi_obs, const GaussianStats& member,
                   const GaussianStats& nonmember);
double LrOnline(double phi_obs, const GaussianStats& member,
                const GaussianStats& nonmember);

// Per-noise-level statistics fitted from the shadow lists.
struct NoiseLevelStats {
  GaussianStats nonmember;
  GaussianStats member;  // unset (n_samples == 0) for offline attacks
};
std::vector<NoiseLevelStats> FitNoiseLevels(
    std::span<const NoiseLevelPhis> levels, bool with_member);

// Mean over the listed levels of LrOnline(target_phis[l]; stats[l]).
// Levels are visited in ascending index order regardless of input order.
double MeanOnlineLr(std::span<const double> target_phis,
                    std::span<const NoiseLevelStats> stats,
                    std::span<const std::size_t> levels);
double MeanOfflineLr(std::span<const double> target_phis,
                     std::span<const NoiseLevelStats> stats,
                     std::span<const std::size_t> levels);

double LrPerturbed(std::span<const double> target_phis,
                   std::span<const NoiseLevelStats> stats);

// Top-z indices by gap, ties to the lower index. Returned in selection order.
std::vector<std::size_t> SelectTopGaps(std::span<const double> gaps,
                                       std::size_t z);
std::vector<double> NoiseGaps(std::span<const NoiseLevelPhis> levels);
std::vector<std::size_t> SelectNoiseIndices(
    std::span<const NoiseLevelPhis> levels, std::size_t z);

double LrOptimal(std::span<const double> target_phis,
                 std::span<const NoiseLevelStats> stats,
                 std::span<const std::size_t> selection);

enum class IndicatorKind { kLrF, kLrN, kLrP, kLrO };

std::string_view IndicatorName(IndicatorKind kind);
IndicatorKind ParseIndicatorKind(std::string_view name);
bool IsCompatible(AttackKind attack, IndicatorKind indicator);
// Throws a config error naming the pair.
void CheckCompatible(AttackKind attack, IndicatorKind indicator);

struct IndicatorScore {
  std::size_t subject_index = 0;
  double score = 0.0;
  IndicatorKind kind = IndicatorKind::kLrF;
  bool operator==(const IndicatorScore&) const = default;
};

// phi of the target at x + delta_x + n^l for every noise level l.
std::vector<double> TargetNoisePhis(const ModelParams& target,
                                    const SubjectRecord& record,
                                    const NoiseBank& bank);

double ScoreSubject(const ModelParams& target,
                    const PreparedVariables& prepared, std::size_t i,
                    IndicatorKind kind, std::size_t z = 1);

std::vector<IndicatorScore> ScoreSubjects(const ModelParams& target,
                                          const PreparedVariables& prepared,
                                          IndicatorKind kind, std::size_t z = 1,
                                          std::size_t max_threads = 0);

// 1 iff score >= tau.
std::vector<int> Decide(std::span<const double> scores, double tau);

}  // namespace miaudit

#endif  // MIAUDIT_INDICATORS_H_
