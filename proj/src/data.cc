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

#include "miaudit/data.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "miaudit/error.h"
#include "miaudit/rng.h"

namespace miaudit {
namespace {

// First `count` entries of a seeded Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> SampleWithoutReplacement(
    std::vector<std::size_t> pool, std::size_t count, Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

Dataset ExperimentSplit::TargetTrainingSet() const {
  return population.Subset(target_indices);
}

std::vector<bool> ExperimentSplit::TargetMask() const {
  std::vector<bool> mask(population.size(), false);
  for (std::size_t i : target_indices) mask[i] = true;
  return mask;
}

ExperimentSplit MakeSplit(Dataset population, Dataset test,
                          std::uint64_t seed) {
  if (population.size() < 2) {
    throw Error(ErrorCode::kConfig, "population needs at least 2 samples");
  }
  ExperimentSplit split;
  std::vector<std::size_t> all(population.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng(DeriveSeed(seed, {seed_tag::kSplit}));
  split.target_indices =
      SampleWithoutReplacement(std::move(all), population.size() / 2, rng);
  std::sort(split.target_indices.begin(), split.target_indices.end());
  split.population = std::move(population);
  split.test = std::move(test);
  return split;
}

std::size_t MembershipTruth::num_members() const {
  return static_cast<std::size_t>(
      std::count(bits_.begin(), bits_.end(), true));
}

SubjectSet SampleSubjects(const ExperimentSplit& split, std::size_t k,
                          std::uint64_t seed) {
  const Dataset& pop = split.population;
  if (k > pop.size()) {
    throw Error(ErrorCode::kConfig,
                "k = " + std::to_string(k) + " exceeds the " +
                    std::to_string(pop.size()) + " available points");
  }
  const auto mask = split.TargetMask();
  std::vector<std::size_t> members, nonmembers;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    (mask[i] ? members : nonmembers).push_back(i);
  }
  Rng rng(DeriveSeed(seed, {seed_tag::kSubjects}));
  std::bernoulli_distribution coin(0.5);
  SubjectSet out;
  std::vector<bool> bits;
  std::size_t used_members = 0, used_nonmembers = 0;
  for (std::size_t s = 0; s < k; ++s) {
    bool from_target = coin(rng);
    if (from_target && used_members == members.size()) from_target = false;
    if (!from_target && used_nonmembers == nonmembers.size()) {
      from_target = true;
    }
    auto& pool = from_target ? members : nonmembers;
    std::size_t& used = from_target ? used_members : used_nonmembers;
    std::uniform_int_distribution<std::size_t> pick(used, pool.size() - 1);
    std::swap(pool[used], pool[pick(rng)]);
    const std::size_t idx = pool[used++];
    auto x = pop.Sample(idx);
    out.subjects.push_back(
        Subject{std::vector<double>(x.begin(), x.end()), pop.labels[idx], idx});
    bits.push_back(from_target);
  }
  out.truth = MembershipTruth(std::move(bits));
  return out;
}

std::size_t AttackerSetSize(std::size_t population_size) {
  return (population_size / 2) / 2;
}

AttackerSet SampleAttackerSet(const Dataset& population,
                              std::span<const Subject> subjects,
                              std::uint64_t seed, std::size_t round) {
  std::vector<bool> excluded(population.size(), false);
  for (const Subject& s : subjects) {
    if (s.population_index >= population.size()) {
      throw Error(ErrorCode::kContract, "subject index outside population");
    }
    excluded[s.population_index] = true;
  }
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (!excluded[i]) pool.push_back(i);
  }
  const std::size_t size = AttackerSetSize(population.size());
  if (pool.size() < size) {
    throw Error(ErrorCode::kConfig,
                "attacker pool of " + std::to_string(pool.size()) +
                    " points cannot supply " + std::to_string(size));
  }
  Rng rng(DeriveSeed(seed, {seed_tag::kAttackerSet, round}));
  AttackerSet out;
  out.population_indices = SampleWithoutReplacement(std::move(pool), size, rng);
  out.data = population.Subset(out.population_indices);
  return out;
}

Dataset SoftRelabel(const Dataset& data, const ModelParams& target) {
  Dataset out = data;
  out.soft_labels.assign(data.size(), {});
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto probs = PredictProba(target, data.Sample(i));
    out.labels[i] = static_cast<int>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    out.soft_labels[i] = std::move(probs);
  }
  return out;
}

Bisection RandomBisect(std::size_t k, std::uint64_t seed, std::size_t round) {
  if (k < 2) throw Error(ErrorCode::kConfig, "bisection needs k >= 2");
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(DeriveSeed(seed, {seed_tag::kBisect, round}));
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t half = (k + 1) / 2;
  Bisection out;
  out.first.assign(order.begin(), order.begin() + half);
  out.second.assign(order.begin() + half, order.end());
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

Dataset SubjectsAsDataset(std::span<const Subject> subjects,
                          std::span<const std::size_t> which,
                          const std::vector<std::size_t>& sample_shape,
                          int num_classes) {
  Dataset out;
  out.sample_shape = sample_shape;
  out.num_classes = num_classes;
  for (std::size_t i : which) out.Append(subjects[i].x, subjects[i].y);
  return out;
}

std::vector<std::vector<double>> BlobCenters(const BlobSpec& spec,
                                             std::uint64_t seed) {
  if (spec.num_classes < 2) {
    throw Error(ErrorCode::kConfig, "blobs need at least 2 classes");
  }
  Rng rng(DeriveSeed(seed, {seed_tag::kData, 0}));
  std::uniform_real_distribution<double> center(0.25, 0.75);
  std::vector<std::vector<double>> centers(spec.num_classes,
                                           std::vector<double>(spec.dims));
  for (auto& c : centers) {
    for (double& v : c) v = center(rng);
  }
  return centers;
}

Dataset SynthBlobs(const std::vector<std::vector<double>>& centers,
                   double spread, std::size_t count, std::uint64_t seed) {
  if (centers.size() < 2) {
    throw Error(ErrorCode::kConfig, "blobs need at least 2 classes");
  }
  if (!(spread >= 0.0)) {
    throw Error(ErrorCode::kConfig, "blob spread must be non-negative");
  }
  const std::size_t dims = centers[0].size();
  Dataset out;
  out.sample_shape = {dims};
  out.num_classes = static_cast<int>(centers.size());
  out.inputs.reserve(count * dims);
  Rng rng(DeriveSeed(seed, {seed_tag::kData, 1}));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % centers.size());
    for (std::size_t d = 0; d < dims; ++d) {
      double v = centers[label][d] + spread * noise(rng);
      out.inputs.push_back(std::clamp(v, 0.0, 1.0));
    }
    out.labels.push_back(label);
  }
  return out;
}

Dataset SynthBlobs(const BlobSpec& spec, std::size_t count,
                   std::uint64_t seed) {
  return SynthBlobs(BlobCenters(spec, seed), spec.spread, count, seed);
}

}  // namespace miaudit
