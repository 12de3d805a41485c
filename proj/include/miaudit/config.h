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

#ifndef MIAUDIT_CONFIG_H_
#define MIAUDIT_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "miaudit/attack_prep.h"
#include "miaudit/indicators.h"
#include "miaudit/nn.h"

namespace miaudit {

enum class DataSource { kSynthetic, kIdx };

struct DatasetConfig {
  DataSource source = DataSource::kSynthetic;
  // synthetic
  int num_classes = 2;
  std::size_t dims = 16;
  double spread = 0.15;
  std::size_t population = 400;  // |D_r|
  std::size_t test = 200;
  // idx; names resolve against MI_AUDIT_DATA_DIR
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::optional<std::size_t> limit;
  std::optional<std::size_t> test_limit;
};

struct DpConfig {
  double clip_norm = 1.0;
  double noise_multiplier = 1.0;
  std::size_t n_unknown = 5;
  // Privacy budget; recorded only.
  double budget_epsilon = 1.56;
  double budget_delta = 1e-5;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "mi-audit-out";
  std::size_t max_threads = 0;

  DatasetConfig dataset;
  ModelSpec model;
  TrainConfig train;

  std::vector<AttackKind> attacks;
  std::vector<IndicatorKind> indicators;
  // Explicit (attack, indicator) pairs; the cartesian product when empty.
  std::vector<std::pair<AttackKind, IndicatorKind>> pairs;
  std::size_t k = 50;
  std::size_t num_rounds = 8;  // N
  double epsilon = 0.02;
  std::size_t fgsm_steps = 10;
  std::size_t noise_count = 10;  // p
  double sigma_noise = 0.02;
  std::size_t z = 5;
  std::size_t max_member_shadows = 4096;

  std::size_t n_unknown = 10;
  DpConfig dp;

  // Pairs to run, in order.
  std::vector<std::pair<AttackKind, IndicatorKind>> Pairs() const;
  // Rejects incompatible pairs and bad sizes before any compute.
  void Validate() const;
  PrepareOptions MakePrepareOptions() const;
};

// Flat key = value lines under [section] headers; '#' and ';' start comments.
ExperimentConfig ParseConfig(std::string_view text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Canonical text form; ParseConfig(FormatConfig(c)) reproduces c.
std::string FormatConfig(const ExperimentConfig& config);

}  // namespace miaudit

#endif  // MIAUDIT_CONFIG_H_
