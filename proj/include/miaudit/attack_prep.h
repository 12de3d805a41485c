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

// Preparation stage of the membership inference attacks: shadow ensembles,
// per-subject Gaussian fits of log-odds confidences, Gaussian noise banks
// and the adversarial perturbation optimizer.
//
// Attack kinds and their shadow budgets for N rounds and k subjects:
//
//   flira   N non-member shadows, one per attacker set D_a^j.
//   emia    as flira, with D_a^j relabeled by the target's soft outputs.
//   nlira   N shared non-member shadows plus N * k member shadows trained on
//           D_a^j with one subject added.
//   amia    N pairs; each pair splits the subjects in two halves and trains
//           one model per half on D_a^j plus that half. A subject's member
//           model in round j is the one that saw it.
//   eamia   as amia, with D_a^j soft-relabeled (subjects keep hard labels).
//
// For amia and eamia every subject also gets an L-infinity bounded
// perturbation that lowers mean_j[phi(x+dx | nonmember_j) -
// phi(x+dx | member_j)]; all statistics are taken at x + dx.

#ifndef MIAUDIT_ATTACK_PREP_H_
#define MIAUDIT_ATTACK_PREP_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "miaudit/data.h"
#include "miaudit/nn.h"

namespace miaudit {

inline constexpr double kSigmaFloor = 1e-6;

struct GaussianStats {
  double mu = 0.0;
  double sigma = kSigmaFloor;
  std::size_t n_samples = 0;
  bool operator==(const GaussianStats&) const = default;
};

// Sample mean and max(sample std with ddof = 1, kSigmaFloor). Needs at least
// two finite values (kStat otherwise).
GaussianStats FitGaussian(std::span<const double> values);

enum class AttackKind { kFLira, kNLira, kEmia, kAmia, kEAmia };

std::string_view AttackName(AttackKind kind);
// Accepts "flira", "nlira", "emia", "amia", "eamia". Throws kConfig.
AttackKind ParseAttackKind(std::string_view name);
// True for attacks that train member shadows.
bool HasMemberStats(AttackKind kind);
// True for attacks that soft-relabel the attacker sets.
bool UsesSoftLabels(AttackKind kind);
// True for attacks that optimize a perturbation.
bool UsesPerturbation(AttackKind kind);

// Noises n^0..n^{p-1} over the input; n^0 is identically zero and the rest
// are i.i.d. N(0, sigma_noise^2) per coordinate.
struct NoiseBank {
  double sigma_noise = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> noises;

  std::size_t p() const { return noises.size(); }
  bool operator==(const NoiseBank&) const = default;
};

NoiseBank MakeNoiseBank(std::size_t p, double sigma_noise,
                        std::size_t input_size, std::uint64_t seed);

// F_n^l and F_m^l for one noise level: raw log-odds of every non-member and
// member shadow. `member` is empty for attacks without member shadows.
struct NoiseLevelPhis {
  std::vector<double> nonmember;
  std::vector<double> member;
  bool operator==(const NoiseLevelPhis&) const = default;
};

struct SubjectRecord {
  std::size_t subject_index = 0;
  std::size_t population_index = 0;
  std::vector<double> x;
  int y = 0;
  std::vector<double> delta_x;  // all zero unless the attack perturbs
  GaussianStats nonmember_stats;
  std::optional<GaussianStats> member_stats;
  std::vector<NoiseLevelPhis> noise_phis;  // one entry per noise level

  bool operator==(const SubjectRecord&) const = default;
};

// The prepared variables V. Immutable once built.
struct PreparedVariables {
  static constexpr int kFormatVersion = 1;

  AttackKind attack = AttackKind::kFLira;
  double epsilon = 0.0;
  std::size_t fgsm_steps = 0;
  std::size_t num_rounds = 0;  // N
  std::size_t shadow_models_trained = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> sample_shape;
  int num_classes = 0;
  NoiseBank noise_bank;
  std::vector<SubjectRecord> subjects;

  bool operator==(const PreparedVariables&) const = default;
};

struct PrepareOptions {
  std::size_t num_rounds = 50;  // N
  ModelSpec shadow_spec;
  TrainConfig shadow_train;  // seed is ignored; each shadow derives its own
  double epsilon = 0.02;
  std::size_t fgsm_steps = 10;
  std::size_t noise_count = 1;  // p, including the zero noise
  double sigma_noise = 0.02;
  // n-LiRA refuses k * N member shadows above this.
  std::size_t max_member_shadows = 4096;
  std::uint64_t seed = 0;
  std::size_t max_threads = 0;  // 0 = hardware concurrency
};

enum class ShadowRole { kNonmember, kMember, kPairFirst, kPairSecond };

struct ShadowModel {
  ModelParams params;
  ShadowRole role = ShadowRole::kNonmember;
  std::size_t round = 0;
  // Indices into the subject list that were added to D_a^round.
  std::vector<std::size_t> subjects_in_training;
  // Population indices of D_a^round.
  std::vector<std::size_t> attacker_indices;
};

// Per-round bookkeeping for paired ensembles. `sign[i]` is -1 when subject i
// is in the first half and +1 otherwise; it is recorded but not used in any
// computation.
struct BisectionRecord {
  Bisection halves;
  std::vector<int> sign;
};

struct ShadowEnsemble {
  AttackKind attack = AttackKind::kFLira;
  std::vector<ShadowModel> models;
  std::vector<BisectionRecord> bisections;  // amia / eamia only
};

// Number of shadows an attack trains for N rounds and k subjects.
std::size_t ExpectedShadowCount(AttackKind kind, std::size_t num_rounds,
                                std::size_t k);

// D_a^j (optionally soft-relabeled) followed by the chosen subjects with
// their hard labels.
Dataset BuildShadowTrainingSet(const Dataset& attacker_part,
                               std::span<const Subject> subjects,
                               std::span<const std::size_t> which);

// Trains the ensemble for `kind`. `target` is only queried (for soft
// labels).
ShadowEnsemble TrainShadowEnsemble(AttackKind kind, const ModelParams& target,
                                   const Dataset& population,
                                   std::span<const Subject> subjects,
                                   const PrepareOptions& options);

// Member and non-member models of subject `i` in every round.
struct SubjectModels {
  std::vector<const ModelParams*> member;
  std::vector<const ModelParams*> nonmember;
};
SubjectModels ModelsForSubject(const ShadowEnsemble& ensemble, std::size_t i);

// Builds V from a trained ensemble.
PreparedVariables PrepareFromEnsemble(const ShadowEnsemble& ensemble,
                                      std::span<const Subject> subjects,
                                      const PrepareOptions& options);

// TrainShadowEnsemble followed by PrepareFromEnsemble.
PreparedVariables Prepare(AttackKind kind, const ModelParams& target,
                          const Dataset& population,
                          std::span<const Subject> subjects,
                          const PrepareOptions& options);

PreparedVariables PrepareFLira(const ModelParams& target,
                               const Dataset& population,
                               std::span<const Subject> subjects,
                               const PrepareOptions& options);
PreparedVariables PrepareNLira(const ModelParams& target,
                               const Dataset& population,
                               std::span<const Subject> subjects,
                               const PrepareOptions& options);
PreparedVariables PrepareEmia(const ModelParams& target,
                              const Dataset& population,
                              std::span<const Subject> subjects,
                              const PrepareOptions& options);
PreparedVariables PrepareAmia(const ModelParams& target,
                              const Dataset& population,
                              std::span<const Subject> subjects,
                              const PrepareOptions& options);
PreparedVariables PrepareEAmia(const ModelParams& target,
                               const Dataset& population,
                               std::span<const Subject> subjects,
                               const PrepareOptions& options);

// mean_j phi(x+delta | nonmember_j) - mean_j phi(x+delta | member_j)
double PerturbationObjective(std::span<const double> x, int y,
                             std::span<const ModelParams* const> members,
                             std::span<const ModelParams* const> nonmembers,
                             std::span<const double> delta);

struct PerturbationResult {
  std::vector<double> delta;
  double initial_objective = 0.0;  // at delta = 0
  double final_objective = 0.0;
};

// Iterative signed-gradient descent on PerturbationObjective with step
// epsilon / steps, projecting onto ||delta||_inf <= epsilon and
// x + delta in [0,1] after every step. Returns the best iterate seen, so the
// result never scores worse than delta = 0.
PerturbationResult OptimizePerturbation(
    std::span<const double> x, int y,
    std::span<const ModelParams* const> members,
    std::span<const ModelParams* const> nonmembers, double epsilon,
    std::size_t steps);

// phi(x + delta + n^l, y | model) for every noise level and model.
std::vector<NoiseLevelPhis> CollectNoiseStats(
    std::span<const double> x, int y, std::span<const double> delta,
    const NoiseBank& bank, std::span<const ModelParams* const> members,
    std::span<const ModelParams* const> nonmembers);

// Shadow models trained by preparation in this process.
std::uint64_t ShadowTrainingCount();

// Versioned JSON container; tensors are base64 little-endian float64.
std::string SerializePrepared(const PreparedVariables& prepared);
PreparedVariables DeserializePrepared(std::string_view text);
void SavePrepared(const PreparedVariables& prepared,
                  const std::filesystem::path& path);
PreparedVariables LoadPrepared(const std::filesystem::path& path);

}  // namespace miaudit

#endif  // MIAUDIT_ATTACK_PREP_H_
