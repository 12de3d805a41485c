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

#ifndef MIAUDIT_DATASET_H_
#define MIAUDIT_DATASET_H_

#include <cstddef>
#include <span>
#include <vector>

#include "miaudit/tensor.h"

namespace miaudit {

// Labeled inputs in the unit hypercube. Samples are stored back to back in
// `inputs`, each with `sample_shape`.
//
// `soft_labels` is either empty (hard labels only) or holds one row per
// sample; an empty row marks a sample trained against its hard label. Soft
// rows are full probability vectors of length `num_classes`.
struct Dataset {
  std::vector<std::size_t> sample_shape;
  std::vector<double> inputs;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::vector<double>> soft_labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::size_t SampleSize() const;

  std::span<const double> Sample(std::size_t i) const;
  bool HasSoftLabel(std::size_t i) const;

  // Appends one sample; `soft` may be empty.
  void Append(std::span<const double> x, int y,
              std::span<const double> soft = {});

  Dataset Subset(std::span<const std::size_t> indices) const;

  // [size, sample_shape...] view of all inputs.
  TensorF InputsTensor() const;

  // Throws kContract when any invariant is broken.
  void Validate() const;

  bool operator==(const Dataset&) const = default;
};

// Samples of `a` followed by samples of `b`. Shapes and class counts must
// agree.
Dataset Concat(const Dataset& a, const Dataset& b);

}  // namespace miaudit

#endif  // MIAUDIT_DATASET_H_
