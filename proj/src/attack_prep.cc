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

#include "miaudit/attack_prep.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "miaudit/error.h"
#include "miaudit/parallel.h"
#include "miaudit/rng.h"

namespace miaudit {
namespace {

std::atomic<std::uint64_t> g_shadow_trainings{0};

struct ShadowJob {
  ShadowRole role;
  std::size_t round;
  std::vector<std::size_t> subjects;
};

std::uint64_t RoleTag(ShadowRole role) {
  switch (role) {
    case ShadowRole::kNonmember:
      return seed_tag::kShadowNonmember;
    case ShadowRole::kMember:
      return seed_tag::kShadowMember;
    case ShadowRole::kPairFirst:
      return seed_tag::kShadowPairFirst;
    case ShadowRole::kPairSecond:
      return seed_tag::kShadowPairSecond;
  }
  return 0;
}

void ValidateOptions(AttackKind kind, std::size_t k,
                     const PrepareOptions& options) {
  if (options.num_rounds < 2) {
    throw Error(ErrorCode::kConfig, "need at least 2 shadow rounds (N >= 2)");
  }
  if (k == 0) throw Error(ErrorCode::kConfig, "no subjects to prepare");
  if ((kind == AttackKind::kAmia || kind == AttackKind::kEAmia) && k < 2) {
    throw Error(ErrorCode::kConfig, "paired attacks need k >= 2 subjects");
  }
  if (!(options.epsilon >= 0.0)) {
    throw Error(ErrorCode::kConfig, "epsilon must be non-negative");
  }
  if (UsesPerturbation(kind) && options.fgsm_steps == 0) {
    throw Error(ErrorCode::kConfig, "fgsm_steps must be at least 1");
  }
  if (options.noise_count == 0) {
    throw Error(ErrorCode::kConfig, "noise bank needs p >= 1");
  }
  if (!(options.sigma_noise >= 0.0)) {
    throw Error(ErrorCode::kConfig, "sigma_noise must be non-negative");
  }
  if (kind == AttackKind::kNLira &&
      k * options.num_rounds > options.max_member_shadows) {
    throw Error(ErrorCode::kConfig,
                "n-LiRA would train " + std::to_string(k * options.num_rounds) +
                    " member shadows, above the ceiling of " +
                    std::to_string(options.max_member_shadows));
  }
}

}  // namespace

GaussianStats FitGaussian(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kStat, "Gaussian fit needs at least 2 values, got " +
                                      std::to_string(values.size()));
  }
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kStat, "Gaussian fit of a non-finite value");
    }
    sum += v;
  }
  const double n = static_cast<double>(values.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return GaussianStats{mean, std::max(sd, kSigmaFloor), values.size()};
}

std::string_view AttackName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kFLira:
      return "flira";
    case AttackKind::kNLira:
      return "nlira";
    case AttackKind::kEmia:
      return "emia";
    case AttackKind::kAmia:
      return "amia";
    case AttackKind::kEAmia:
      return "eamia";
  }
  return "unknown";
}

AttackKind ParseAttackKind(std::string_view name) {
  for (AttackKind kind : {AttackKind::kFLira, AttackKind::kNLira,
                          AttackKind::kEmia, AttackKind::kAmia,
                          AttackKind::kEAmia}) {
    if (AttackName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kConfig, "unknown attack '" + std::string(name) + "'");
}

bool HasMemberStats(AttackKind kind) {
  return kind == AttackKind::kNLira || kind == AttackKind::kAmia ||
         kind == AttackKind::kEAmia;
}

bool UsesSoftLabels(AttackKind kind) {
  return kind == AttackKind::kEmia || kind == AttackKind::kEAmia;
}

bool UsesPerturbation(AttackKind kind) {
  return kind == AttackKind::kAmia || kind == AttackKind::kEAmia;
}

NoiseBank MakeNoiseBank(std::size_t p, double sigma_noise,
                        std::size_t input_size, std::uint64_t seed) {
  if (p == 0) throw Error(ErrorCode::kConfig, "noise bank needs p >= 1");
  if (!(sigma_noise >= 0.0)) {
    throw Error(ErrorCode::kConfig, "sigma_noise must be non-negative");
  }
  NoiseBank bank;
  bank.sigma_noise = sigma_noise;
  bank.seed = seed;
  bank.noises.assign(p, std::vector<double>(input_size, 0.0));
  Rng rng(DeriveSeed(seed, {seed_tag::kNoiseBank}));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 1; l < p; ++l) {
    for (double& v : bank.noises[l]) v = sigma_noise * gauss(rng);
  }
  return bank;
}

std::size_t ExpectedShadowCount(AttackKind kind, std::size_t num_rounds,
                                std::size_t k) {
  switch (kind) {
    case AttackKind::kFLira:
    case AttackKind::kEmia:
      return num_rounds;
    case AttackKind::kNLira:
      return num_rounds * (k + 1);
    case AttackKind::kAmia:
    case AttackKind::kEAmia:
      return 2 * num_rounds;
  }
  return 0;
}

Dataset BuildShadowTrainingSet(const Dataset& attacker_part,
                               std::span<const Subject> subjects,
                               std::span<const std::size_t> which) {
  return Concat(attacker_part,
                SubjectsAsDataset(subjects, which, attacker_part.sample_shape,
                                  attacker_part.num_classes));
}

ShadowEnsemble TrainShadowEnsemble(AttackKind kind, const ModelParams& target,
                                   const Dataset& population,
                                   std::span<const Subject> subjects,
                                   const PrepareOptions& options) {
  const std::size_t k = subjects.size();
  const std::size_t rounds = options.num_rounds;
  ValidateOptions(kind, k, options);

  std::vector<AttackerSet> attacker_sets;
  attacker_sets.reserve(rounds);
  for (std::size_t j = 0; j < rounds; ++j) {
    attacker_sets.push_back(
        SampleAttackerSet(population, subjects, options.seed, j));
    if (UsesSoftLabels(kind)) {
      attacker_sets.back().data = SoftRelabel(attacker_sets.back().data, target);
    }
  }

  ShadowEnsemble ensemble;
  ensemble.attack = kind;
  std::vector<ShadowJob> jobs;
  switch (kind) {
    case AttackKind::kFLira:
    case AttackKind::kEmia:
      for (std::size_t j = 0; j < rounds; ++j) {
        jobs.push_back({ShadowRole::kNonmember, j, {}});
      }
      break;
    case AttackKind::kNLira:
      for (std::size_t j = 0; j < rounds; ++j) {
        jobs.push_back({ShadowRole::kNonmember, j, {}});
      }
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < rounds; ++j) {
          jobs.push_back({ShadowRole::kMember, j, {i}});
        }
      }
      break;
    case AttackKind::kAmia:
    case AttackKind::kEAmia:
      for (std::size_t j = 0; j < rounds; ++j) {
        BisectionRecord record;
        record.halves = RandomBisect(k, options.seed, j);
        record.sign.assign(k, 1);
        for (std::size_t i : record.halves.first) record.sign[i] = -1;
        jobs.push_back({ShadowRole::kPairFirst, j, record.halves.first});
        jobs.push_back({ShadowRole::kPairSecond, j, record.halves.second});
        ensemble.bisections.push_back(std::move(record));
      }
      break;
  }

  ensemble.models.resize(jobs.size());
  ParallelFor(
      jobs.size(),
      [&](std::size_t n) {
        const ShadowJob& job = jobs[n];
        const AttackerSet& attacker = attacker_sets[job.round];
        Dataset train_set =
            BuildShadowTrainingSet(attacker.data, subjects, job.subjects);
        TrainConfig cfg = options.shadow_train;
        const std::uint64_t subject_tag =
            job.role == ShadowRole::kMember ? job.subjects[0] + 1 : 0;
        cfg.seed = DeriveSeed(options.seed,
                              {RoleTag(job.role), job.round, subject_tag});
        ShadowModel& model = ensemble.models[n];
        try {
          model.params = Train(options.shadow_spec, train_set, cfg);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kTraining) throw;
          throw Error(ErrorCode::kTraining,
                      "shadow training failed in round " +
                          std::to_string(job.round) + ": " + e.what());
        }
        ++g_shadow_trainings;
        model.role = job.role;
        model.round = job.round;
        model.subjects_in_training = job.subjects;
        model.attacker_indices = attacker.population_indices;
      },
      options.max_threads);
  return ensemble;
}

SubjectModels ModelsForSubject(const ShadowEnsemble& ensemble, std::size_t i) {
  SubjectModels out;
  switch (ensemble.attack) {
    case AttackKind::kFLira:
    case AttackKind::kEmia:
      for (const auto& m : ensemble.models) out.nonmember.push_back(&m.params);
      break;
    case AttackKind::kNLira: {
      for (const auto& m : ensemble.models) {
        if (m.role == ShadowRole::kNonmember) {
          out.nonmember.push_back(&m.params);
        } else if (m.subjects_in_training.size() == 1 &&
                   m.subjects_in_training[0] == i) {
          out.member.push_back(&m.params);
        }
      }
      break;
    }
    case AttackKind::kAmia:
    case AttackKind::kEAmia:
      for (std::size_t j = 0; j < ensemble.bisections.size(); ++j) {
        const auto& halves = ensemble.bisections[j].halves;
        const ModelParams& first = ensemble.models[2 * j].params;
        const ModelParams& second = ensemble.models[2 * j + 1].params;
        const bool in_first = std::binary_search(halves.first.begin(),
                                                 halves.first.end(), i);
        const bool in_second = std::binary_search(halves.second.begin(),
                                                  halves.second.end(), i);
        if (in_first == in_second) {
          throw Error(ErrorCode::kInternal,
                      "subject " + std::to_string(i) +
                          " is not in exactly one half in round " +
                          std::to_string(j));
        }
        out.member.push_back(in_first ? &first : &second);
        out.nonmember.push_back(in_first ? &second : &first);
      }
      break;
  }
  return out;
}

PreparedVariables PrepareFromEnsemble(const ShadowEnsemble& ensemble,
                                      std::span<const Subject> subjects,
                                      const PrepareOptions& options) {
  const AttackKind kind = ensemble.attack;
  ValidateOptions(kind, subjects.size(), options);
  const ModelSpec& spec = options.shadow_spec;
  PreparedVariables prepared;
  prepared.attack = kind;
  prepared.epsilon = UsesPerturbation(kind) ? options.epsilon : 0.0;
  prepared.fgsm_steps = UsesPerturbation(kind) ? options.fgsm_steps : 0;
  prepared.num_rounds = options.num_rounds;
  prepared.shadow_models_trained = ensemble.models.size();
  prepared.seed = options.seed;
  prepared.sample_shape = spec.input_shape;
  prepared.num_classes = static_cast<int>(spec.NumClasses());
  prepared.noise_bank =
      MakeNoiseBank(options.noise_count, options.sigma_noise, spec.InputSize(),
                    DeriveSeed(options.seed, {seed_tag::kPrepare}));
  prepared.subjects.resize(subjects.size());

  ParallelFor(
      subjects.size(),
      [&](std::size_t i) {
        const Subject& subject = subjects[i];
        SubjectModels models = ModelsForSubject(ensemble, i);
        SubjectRecord& rec = prepared.subjects[i];
        rec.subject_index = i;
        rec.population_index = subject.population_index;
        rec.x = subject.x;
        rec.y = subject.y;
        if (UsesPerturbation(kind)) {
          rec.delta_x = OptimizePerturbation(subject.x, subject.y,
                                             models.member, models.nonmember,
                                             options.epsilon,
                                             options.fgsm_steps)
                            .delta;
        } else {
          rec.delta_x.assign(subject.x.size(), 0.0);
        }
        rec.noise_phis =
            CollectNoiseStats(subject.x, subject.y, rec.delta_x,
                              prepared.noise_bank, models.member,
                              models.nonmember);
        rec.nonmember_stats = FitGaussian(rec.noise_phis[0].nonmember);
        if (HasMemberStats(kind)) {
          rec.member_stats = FitGaussian(rec.noise_phis[0].member);
        }
      },
      options.max_threads);
  return prepared;
}

PreparedVariables Prepare(AttackKind kind, const ModelParams& target,
                          const Dataset& population,
                          std::span<const Subject> subjects,
                          const PrepareOptions& options) {
  ShadowEnsemble ensemble =
      TrainShadowEnsemble(kind, target, population, subjects, options);
  return PrepareFromEnsemble(ensemble, subjects, options);
}

PreparedVariables PrepareFLira(const ModelParams& target,
                               const Dataset& population,
                               std::span<const Subject> subjects,
                               const PrepareOptions& options) {
  return Prepare(AttackKind::kFLira, target, population, subjects, options);
}

PreparedVariables PrepareNLira(const ModelParams& target,
                               const Dataset& population,
                               std::span<const Subject> subjects,
                               const PrepareOptions& options) {
  return Prepare(AttackKind::kNLira, target, population, subjects, options);
}

PreparedVariables PrepareEmia(const ModelParams& target,
                              const Dataset& population,
                              std::span<const Subject> subjects,
                              const PrepareOptions& options) {
  return Prepare(AttackKind::kEmia, target, population, subjects, options);
}

PreparedVariables PrepareAmia(const ModelParams& target,
                              const Dataset& population,
                              std::span<const Subject> subjects,
                              const PrepareOptions& options) {
  return Prepare(AttackKind::kAmia, target, population, subjects, options);
}

PreparedVariables PrepareEAmia(const ModelParams& target,
                               const Dataset& population,
                               std::span<const Subject> subjects,
                               const PrepareOptions& options) {
  return Prepare(AttackKind::kEAmia, target, population, subjects, options);
}

namespace {

std::vector<PhiTerm> PerturbationTerms(
    std::span<const ModelParams* const> members,
    std::span<const ModelParams* const> nonmembers) {
  std::vector<PhiTerm> terms;
  const double wn = 1.0 / static_cast<double>(nonmembers.size());
  const double wm = -1.0 / static_cast<double>(members.size());
  for (const ModelParams* m : nonmembers) terms.push_back({m, wn});
  for (const ModelParams* m : members) terms.push_back({m, wm});
  return terms;
}

std::vector<double> Shifted(std::span<const double> x,
                            std::span<const double> delta) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + delta[i];
  return out;
}

}  // namespace

double PerturbationObjective(std::span<const double> x, int y,
                             std::span<const ModelParams* const> members,
                             std::span<const ModelParams* const> nonmembers,
                             std::span<const double> delta) {
  if (members.empty() || nonmembers.empty()) {
    throw Error(ErrorCode::kContract,
                "perturbation objective needs member and non-member models");
  }
  auto terms = PerturbationTerms(members, nonmembers);
  return EvaluatePhiObjective(terms, Shifted(x, delta), y, false).value;
}

PerturbationResult OptimizePerturbation(
    std::span<const double> x, int y,
    std::span<const ModelParams* const> members,
    std::span<const ModelParams* const> nonmembers, double epsilon,
    std::size_t steps) {
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::kConfig, "epsilon must be non-negative");
  }
  if (steps == 0) throw Error(ErrorCode::kConfig, "steps must be >= 1");
  if (members.empty() || nonmembers.empty()) {
    throw Error(ErrorCode::kContract,
                "perturbation needs member and non-member models");
  }
  const auto terms = PerturbationTerms(members, nonmembers);
  PerturbationResult result;
  std::vector<double> delta(x.size(), 0.0);
  PhiObjective eval = EvaluatePhiObjective(terms, x, y, epsilon > 0.0);
  if (!std::isfinite(eval.value)) {
    throw Error(ErrorCode::kNumerical, "perturbation objective is not finite");
  }
  result.delta = delta;
  result.initial_objective = eval.value;
  result.final_objective = eval.value;
  if (epsilon == 0.0) return result;

  const double step = epsilon / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double g = eval.gradient[i];
      const double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
      double d = std::clamp(delta[i] - step * sign, -epsilon, epsilon);
      delta[i] = std::clamp(d, -x[i], 1.0 - x[i]);
    }
    eval = EvaluatePhiObjective(terms, Shifted(x, delta), y, s + 1 < steps);
    if (!std::isfinite(eval.value)) {
      throw Error(ErrorCode::kNumerical,
                  "perturbation objective became non-finite at step " +
                      std::to_string(s));
    }
    if (eval.value < result.final_objective) {
      result.final_objective = eval.value;
      result.delta = delta;
    }
  }
  return result;
}

std::vector<NoiseLevelPhis> CollectNoiseStats(
    std::span<const double> x, int y, std::span<const double> delta,
    const NoiseBank& bank, std::span<const ModelParams* const> members,
    std::span<const ModelParams* const> nonmembers) {
  const std::vector<double> base = Shifted(x, delta);
  std::vector<NoiseLevelPhis> out(bank.p());
  for (std::size_t l = 0; l < bank.p(); ++l) {
    const std::vector<double> point = Shifted(base, bank.noises[l]);
    for (const ModelParams* m : nonmembers) {
      out[l].nonmember.push_back(ModelPhi(*m, point, y));
    }
    for (const ModelParams* m : members) {
      out[l].member.push_back(ModelPhi(*m, point, y));
    }
  }
  return out;
}

std::uint64_t ShadowTrainingCount() { return g_shadow_trainings.load(); }

}  // namespace miaudit
