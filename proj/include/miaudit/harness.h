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

#ifndef MIAUDIT_HARNESS_H_
#define MIAUDIT_HARNESS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "miaudit/attack_prep.h"
#include "miaudit/config.h"
#include "miaudit/data.h"
#include "miaudit/indicators.h"
#include "miaudit/metrics.h"
#include "miaudit/nn.h"

namespace miaudit {

// Data, target model and subjects; a pure function of the config.
struct ExperimentSetup {
  ExperimentSplit split;
  ModelParams target;
  SubjectSet subjects;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

ExperimentSetup BuildSetup(const ExperimentConfig& config);

// One scored (model, attack, indicator) combination.
struct AttackRun {
  std::string model = "target";
  std::optional<double> sweep_value;
  AttackKind attack = AttackKind::kFLira;
  IndicatorKind indicator = IndicatorKind::kLrF;
  std::vector<IndicatorScore> scores;  // empty for averaged rows
  RocCurve roc;                        // empty for averaged rows
  RtaCurve rta;
  MetricSummary summary;
};

struct RunRecord {
  ExperimentConfig config;
  std::string kind = "attack";  // attack | transfer | dp-eval | sweep
  std::string sweep_param;
  double target_train_accuracy = 0.0;
  double target_test_accuracy = 0.0;
  std::vector<bool> truth;
  std::vector<PreparedVariables> prepared;
  std::vector<AttackRun> runs;
  // Wall-clock seconds per stage. Not written by EmitReport.
  std::map<std::string, double> timings;
  std::vector<std::filesystem::path> artifacts;
  std::string failure;  // empty on success

  bool ok() const { return failure.empty(); }
};

struct NamedModel {
  std::string name;
  const ModelParams* params = nullptr;
};

// Scores every configured pair whose attack has prepared variables against
// each model. No shadow training happens here.
std::vector<AttackRun> ScoreModels(const ExperimentConfig& config,
                                   std::span<const PreparedVariables> prepared,
                                   std::span<const NamedModel> models,
                                   const std::vector<bool>& truth);

// Mean of the RTA curves and summaries of runs sharing (attack, indicator).
std::vector<AttackRun> AverageRuns(std::span<const AttackRun> runs,
                                   std::string_view label);

std::vector<PreparedVariables> PrepareAll(const ExperimentConfig& config,
                                          const ExperimentSetup& setup);

// Validation errors throw before any training; later failures are recorded
// in RunRecord::failure with whatever finished.
RunRecord RunAttackExperiment(const ExperimentConfig& config);

// Retrains n_unknown models on the same D_t and rescores with prepared.
RunRecord RunTransferability(const ExperimentConfig& config,
                             std::vector<PreparedVariables> prepared,
                             std::size_t n_unknown);
RunRecord RunTransferability(const ExperimentConfig& config,
                             const ExperimentSetup& setup,
                             std::vector<PreparedVariables> prepared,
                             std::span<const NamedModel> unknown_models);

// Plain (L2) and DP-SGD unknown models, both scored with prepared.
RunRecord RunDpSgdEval(const ExperimentConfig& config,
                       std::vector<PreparedVariables> prepared,
                       const DpConfig& dp);

enum class SweepParam { kEpsilon, kSigmaNoise, kShadows };
SweepParam ParseSweepParam(std::string_view name);
std::string_view SweepParamName(SweepParam param);

RunRecord RunSweep(const ExperimentConfig& config, SweepParam param,
                   std::span<const double> values);

// Writes config.json, scores.csv, roc.csv, rta.csv, summary.json and one
// prepared_<attack>.json per prepared attack. Returns the paths written.
std::vector<std::filesystem::path> EmitReport(const RunRecord& record,
                                              const std::filesystem::path& out_dir);

// Shuffled-truth reference for RTA(1), averaged over repeats.
double ShuffledBaselineRta(std::span<const double> scores,
                           const std::vector<bool>& truth, std::uint64_t seed,
                           std::size_t repeats = 20);

}  // namespace miaudit

#endif  // MIAUDIT_HARNESS_H_
