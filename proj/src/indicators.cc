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

#include "miaudit/indicators.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "miaudit/error.h"
#include "miaudit/parallel.h"

namespace miaudit {

double Phi(double prob) {
  const double p = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  return std::log(p / (1.0 - p));
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double NormalLogPdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

double LrOffline(double phi_obs, const GaussianStats& nonmember) {
  return NormalCdf((phi_obs - nonmember.mu) / nonmember.sigma);
}

double LogLrOnline(double phi_obs, const GaussianStats& member,
                   const GaussianStats& nonmember) {
  return NormalLogPdf(phi_obs, member.mu, member.sigma) -
         NormalLogPdf(phi_obs, nonmember.mu, nonmember.sigma);
}

double LrOnline(double phi_obs, const GaussianStats& member,
                const GaussianStats& nonmember) {
  const double log_ratio = LogLrOnline(phi_obs, member, nonmember);
  if (std::isnan(log_ratio)) {
    throw Error(ErrorCode::kNumerical, "online likelihood ratio is NaN");
  }
  return std::exp(std::clamp(log_ratio, -kLogRatioLimit, kLogRatioLimit));
}

std::vector<NoiseLevelStats> FitNoiseLevels(
    std::span<const NoiseLevelPhis> levels, bool with_member) {
  std::vector<NoiseLevelStats> out(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    out[l].nonmember = FitGaussian(levels[l].nonmember);
    if (with_member) out[l].member = FitGaussian(levels[l].member);
  }
  return out;
}

namespace {

template <typename F>
double MeanOverLevels(std::span<const double> target_phis,
                      std::span<const NoiseLevelStats> stats,
                      std::span<const std::size_t> levels, F&& lr) {
  if (levels.empty()) {
    throw Error(ErrorCode::kContract, "no noise levels to average");
  }
  if (target_phis.size() != stats.size()) {
    throw Error(ErrorCode::kContract, "target phis and stats differ in length");
  }
  std::vector<std::size_t> order(levels.begin(), levels.end());
  std::sort(order.begin(), order.end());
  // Running mean: a mean of identical terms is exactly that term.
  double mean = 0.0;
  double count = 0.0;
  for (std::size_t l : order) {
    if (l >= stats.size()) {
      throw Error(ErrorCode::kContract, "noise level index out of range");
    }
    count += 1.0;
    mean += (lr(target_phis[l], stats[l]) - mean) / count;
  }
  return mean;
}

std::vector<std::size_t> AllLevels(std::size_t p) {
  std::vector<std::size_t> v(p);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

double MeanOnlineLr(std::span<const double> target_phis,
                    std::span<const NoiseLevelStats> stats,
                    std::span<const std::size_t> levels) {
  return MeanOverLevels(target_phis, stats, levels,
                        [](double phi, const NoiseLevelStats& s) {
                          return LrOnline(phi, s.member, s.nonmember);
                        });
}

double MeanOfflineLr(std::span<const double> target_phis,
                     std::span<const NoiseLevelStats> stats,
                     std::span<const std::size_t> levels) {
  return MeanOverLevels(target_phis, stats, levels,
                        [](double phi, const NoiseLevelStats& s) {
                          return LrOffline(phi, s.nonmember);
                        });
}

double LrPerturbed(std::span<const double> target_phis,
                   std::span<const NoiseLevelStats> stats) {
  const auto all = AllLevels(stats.size());
  return MeanOnlineLr(target_phis, stats, all);
}

std::vector<std::size_t> SelectTopGaps(std::span<const double> gaps,
                                       std::size_t z) {
  if (z == 0 || z > gaps.size()) {
    throw Error(ErrorCode::kConfig,
                "z must be in [1, p]; got z=" + std::to_string(z) +
                    ", p=" + std::to_string(gaps.size()));
  }
  std::vector<std::size_t> order = AllLevels(gaps.size());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gaps[a] > gaps[b]; });
  order.resize(z);
  return order;
}

std::vector<double> NoiseGaps(std::span<const NoiseLevelPhis> levels) {
  std::vector<double> gaps(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& m = levels[l].member;
    const auto& n = levels[l].nonmember;
    if (m.empty() || n.empty()) {
      throw Error(ErrorCode::kContract,
                  "noise selection needs member and non-member lists");
    }
    gaps[l] = std::accumulate(m.begin(), m.end(), 0.0) / m.size() -
              std::accumulate(n.begin(), n.end(), 0.0) / n.size();
  }
  return gaps;
}

std::vector<std::size_t> SelectNoiseIndices(
    std::span<const NoiseLevelPhis> levels, std::size_t z) {
  return SelectTopGaps(NoiseGaps(levels), z);
}

double LrOptimal(std::span<const double> target_phis,
                 std::span<const NoiseLevelStats> stats,
                 std::span<const std::size_t> selection) {
  return MeanOnlineLr(target_phis, stats, selection);
}

std::string_view IndicatorName(IndicatorKind kind) {
  switch (kind) {
    case IndicatorKind::kLrF:
      return "lr_f";
    case IndicatorKind::kLrN:
      return "lr_n";
    case IndicatorKind::kLrP:
      return "lr_p";
    case IndicatorKind::kLrO:
      return "lr_o";
  }
  return "unknown";
}

IndicatorKind ParseIndicatorKind(std::string_view name) {
  for (IndicatorKind kind : {IndicatorKind::kLrF, IndicatorKind::kLrN,
                             IndicatorKind::kLrP, IndicatorKind::kLrO}) {
    if (IndicatorName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kConfig,
              "unknown indicator '" + std::string(name) + "'");
}

bool IsCompatible(AttackKind attack, IndicatorKind indicator) {
  switch (indicator) {
    case IndicatorKind::kLrF:
    case IndicatorKind::kLrP:
      return true;
    case IndicatorKind::kLrN:
    case IndicatorKind::kLrO:
      return HasMemberStats(attack);
  }
  return false;
}

void CheckCompatible(AttackKind attack, IndicatorKind indicator) {
  if (!IsCompatible(attack, indicator)) {
    throw Error(ErrorCode::kConfig,
                "indicator " + std::string(IndicatorName(indicator)) +
                    " needs member statistics, which " +
                    std::string(AttackName(attack)) + " does not prepare");
  }
}

std::vector<double> TargetNoisePhis(const ModelParams& target,
                                    const SubjectRecord& record,
                                    const NoiseBank& bank) {
  const std::size_t d = record.x.size();
  if (record.delta_x.size() != d) {
    throw Error(ErrorCode::kContract, "delta_x length does not match x");
  }
  std::vector<double> base(d);
  for (std::size_t i = 0; i < d; ++i) base[i] = record.x[i] + record.delta_x[i];
  std::vector<double> out(bank.p());
  std::vector<double> point(d);
  for (std::size_t l = 0; l < bank.p(); ++l) {
    for (std::size_t i = 0; i < d; ++i) point[i] = base[i] + bank.noises[l][i];
    out[l] = ModelPhi(target, point, record.y);
  }
  return out;
}

double ScoreSubject(const ModelParams& target,
                    const PreparedVariables& prepared, std::size_t i,
                    IndicatorKind kind, std::size_t z) {
  CheckCompatible(prepared.attack, kind);
  if (i >= prepared.subjects.size()) {
    throw Error(ErrorCode::kContract, "subject index out of range");
  }
  const SubjectRecord& rec = prepared.subjects[i];
  const bool online = HasMemberStats(prepared.attack);
  switch (kind) {
    case IndicatorKind::kLrF:
    case IndicatorKind::kLrN: {
      std::vector<double> point(rec.x.size());
      for (std::size_t j = 0; j < point.size(); ++j) {
        point[j] = rec.x[j] + rec.delta_x[j];
      }
      const double phi = ModelPhi(target, point, rec.y);
      if (kind == IndicatorKind::kLrF) {
        return LrOffline(phi, rec.nonmember_stats);
      }
      return LrOnline(phi, *rec.member_stats, rec.nonmember_stats);
    }
    case IndicatorKind::kLrP: {
      const auto phis = TargetNoisePhis(target, rec, prepared.noise_bank);
      const auto stats = FitNoiseLevels(rec.noise_phis, online);
      const auto all = AllLevels(stats.size());
      return online ? MeanOnlineLr(phis, stats, all)
                    : MeanOfflineLr(phis, stats, all);
    }
    case IndicatorKind::kLrO: {
      const auto phis = TargetNoisePhis(target, rec, prepared.noise_bank);
      const auto stats = FitNoiseLevels(rec.noise_phis, true);
      const auto selection = SelectNoiseIndices(rec.noise_phis, z);
      return LrOptimal(phis, stats, selection);
    }
  }
  throw Error(ErrorCode::kInternal, "unhandled indicator");
}

std::vector<IndicatorScore> ScoreSubjects(const ModelParams& target,
                                          const PreparedVariables& prepared,
                                          IndicatorKind kind, std::size_t z,
                                          std::size_t max_threads) {
  CheckCompatible(prepared.attack, kind);
  if (kind == IndicatorKind::kLrO &&
      (z == 0 || z > prepared.noise_bank.p())) {
    throw Error(ErrorCode::kConfig,
                "z must be in [1, p]; got z=" + std::to_string(z) +
                    ", p=" + std::to_string(prepared.noise_bank.p()));
  }
  std::vector<IndicatorScore> out(prepared.subjects.size());
  ParallelFor(
      out.size(),
      [&](std::size_t i) {
        const double s = ScoreSubject(target, prepared, i, kind, z);
        if (!std::isfinite(s)) {
          throw Error(ErrorCode::kNumerical,
                      "non-finite score for subject " + std::to_string(i));
        }
        out[i] = IndicatorScore{i, s, kind};
      },
      max_threads);
  return out;
}

std::vector<int> Decide(std::span<const double> scores, double tau) {
  std::vector<int> bits(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) bits[i] = scores[i] >= tau;
  return bits;
}

}  // namespace miaudit
