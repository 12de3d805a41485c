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

#include "miaudit/dataset.h"

#include <cmath>
#include <string>

#include "miaudit/error.h"

namespace miaudit {

std::size_t Dataset::SampleSize() const { return ShapeProduct(sample_shape); }

std::span<const double> Dataset::Sample(std::size_t i) const {
  const std::size_t d = SampleSize();
  return std::span<const double>(inputs).subspan(i * d, d);
}

bool Dataset::HasSoftLabel(std::size_t i) const {
  return !soft_labels.empty() && !soft_labels[i].empty();
}

void Dataset::Append(std::span<const double> x, int y,
                     std::span<const double> soft) {
  if (x.size() != SampleSize()) {
    throw Error(ErrorCode::kContract,
                "sample has " + std::to_string(x.size()) +
                    " values, dataset expects " +
                    std::to_string(SampleSize()));
  }
  inputs.insert(inputs.end(), x.begin(), x.end());
  labels.push_back(y);
  if (!soft.empty() || !soft_labels.empty()) {
    soft_labels.resize(labels.size() - 1);
    soft_labels.emplace_back(soft.begin(), soft.end());
  }
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.sample_shape = sample_shape;
  out.num_classes = num_classes;
  out.inputs.reserve(indices.size() * SampleSize());
  out.labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= size()) {
      throw Error(ErrorCode::kContract,
                  "subset index " + std::to_string(idx) + " out of range");
    }
    auto x = Sample(idx);
    out.inputs.insert(out.inputs.end(), x.begin(), x.end());
    out.labels.push_back(labels[idx]);
    if (!soft_labels.empty()) out.soft_labels.push_back(soft_labels[idx]);
  }
  return out;
}

TensorF Dataset::InputsTensor() const {
  std::vector<std::size_t> shape{size()};
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  return TensorF(std::move(shape), inputs);
}

void Dataset::Validate() const {
  if (inputs.size() != size() * SampleSize()) {
    throw Error(ErrorCode::kContract, "dataset input count mismatch");
  }
  for (double v : inputs) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kContract, "dataset input outside [0,1]");
    }
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw Error(ErrorCode::kContract,
                  "label " + std::to_string(y) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
  }
  if (!soft_labels.empty()) {
    if (soft_labels.size() != size()) {
      throw Error(ErrorCode::kContract, "soft label row count mismatch");
    }
    for (const auto& row : soft_labels) {
      if (row.empty()) continue;
      if (row.size() != static_cast<std::size_t>(num_classes)) {
        throw Error(ErrorCode::kContract, "soft label row has wrong length");
      }
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) {
          throw Error(ErrorCode::kContract, "negative soft label entry");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::kContract, "soft label row does not sum to 1");
      }
    }
  }
}

Dataset Concat(const Dataset& a, const Dataset& b) {
  if (a.sample_shape != b.sample_shape || a.num_classes != b.num_classes) {
    throw Error(ErrorCode::kContract, "cannot concatenate unlike datasets");
  }
  Dataset out = a;
  out.inputs.insert(out.inputs.end(), b.inputs.begin(), b.inputs.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  if (!a.soft_labels.empty() || !b.soft_labels.empty()) {
    out.soft_labels.resize(a.size());
    if (b.soft_labels.empty()) {
      out.soft_labels.resize(a.size() + b.size());
    } else {
      out.soft_labels.insert(out.soft_labels.end(), b.soft_labels.begin(),
                             b.soft_labels.end());
    }
  }
  return out;
}

}  // namespace miaudit
