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

// Experiment data protocol: target/held-out split, subject sampling,
// attacker datasets, soft relabeling, subject bisection and synthetic blobs.
// Every sampling operation is a pure function of its seed arguments.

#ifndef MIAUDIT_DATA_H_
#define MIAUDIT_DATA_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "miaudit/dataset.h"
#include "miaudit/nn.h"

namespace miaudit {

// The population D_r, the target's training indices D_t into it, and a
// held-out test set D_s.
struct ExperimentSplit {
  Dataset population;
  std::vector<std::size_t> target_indices;  // sorted ascending
  Dataset test;

  Dataset TargetTrainingSet() const;
  // is_target[i] for every population index i.
  std::vector<bool> TargetMask() const;
};

// Draws D_t uniformly without replacement, |D_t| = floor(|D_r| / 2).
ExperimentSplit MakeSplit(Dataset population, Dataset test, std::uint64_t seed);

// A labeled example whose membership is being inferred. Carries no
// membership information.
struct Subject {
  std::vector<double> x;
  int y = 0;
  std::size_t population_index = 0;
  bool operator==(const Subject&) const = default;
};

// Ground-truth membership of a subject list. Only the metrics stage reads
// it; preparation and indication take std::span<const Subject>.
class MembershipTruth {
 public:
  MembershipTruth() = default;
  explicit MembershipTruth(std::vector<bool> bits) : bits_(std::move(bits)) {}

  const std::vector<bool>& bits() const { return bits_; }
  std::size_t size() const { return bits_.size(); }
  std::size_t num_members() const;

 private:
  std::vector<bool> bits_;
};

struct SubjectSet {
  std::vector<Subject> subjects;
  MembershipTruth truth;

  std::size_t k() const { return subjects.size(); }
};

// Each subject comes from D_t with probability 1/2, else from D_r \ D_t,
// without replacement. When one side runs out the other side is used.
SubjectSet SampleSubjects(const ExperimentSplit& split, std::size_t k,
                          std::uint64_t seed);

// floor(floor(|D_r| / 2) / 2)
std::size_t AttackerSetSize(std::size_t population_size);

struct AttackerSet {
  Dataset data;
  std::vector<std::size_t> population_indices;
};

// D_a^j: AttackerSetSize(|D_r|) points drawn uniformly without replacement
// from D_r, excluding every subject. `round` selects a fresh draw.
AttackerSet SampleAttackerSet(const Dataset& population,
                              std::span<const Subject> subjects,
                              std::uint64_t seed, std::size_t round);

// Replaces every label by the target's full probability row (hard label =
// argmax).
Dataset SoftRelabel(const Dataset& data, const ModelParams& target);

// Indices into the subject list; sizes ceil(k/2) and floor(k/2).
struct Bisection {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

Bisection RandomBisect(std::size_t k, std::uint64_t seed, std::size_t round);

// Subjects as a dataset with hard labels.
Dataset SubjectsAsDataset(std::span<const Subject> subjects,
                          std::span<const std::size_t> which,
                          const std::vector<std::size_t>& sample_shape,
                          int num_classes);

struct BlobSpec {
  int num_classes = 2;
  std::size_t dims = 2;
  double spread = 0.1;  // per-coordinate standard deviation
};

// Class centers drawn uniformly in [0.25, 0.75]^dims.
std::vector<std::vector<double>> BlobCenters(const BlobSpec& spec,
                                             std::uint64_t seed);

// Gaussian clusters around `centers`, clipped to [0,1]; label i % classes.
Dataset SynthBlobs(const std::vector<std::vector<double>>& centers,
                   double spread, std::size_t count, std::uint64_t seed);

// Centers derived from `seed`.
Dataset SynthBlobs(const BlobSpec& spec, std::size_t count,
                   std::uint64_t seed);

}  // namespace miaudit

#endif  // MIAUDIT_DATA_H_
