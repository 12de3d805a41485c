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

#ifndef MIAUDIT_TENSOR_H_
#define MIAUDIT_TENSOR_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace miaudit {

std::size_t ShapeProduct(std::span<const std::size_t> shape);

// Dense row-major tensor of 64-bit reals.
struct TensorF {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  TensorF() = default;
  // Throws kContract if product(shape) != values.size().
  TensorF(std::vector<std::size_t> shape, std::vector<double> values);

  static TensorF Zeros(std::vector<std::size_t> shape);

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  bool operator==(const TensorF&) const = default;
};

// Throws kNumerical naming `what` if any value is NaN or infinite.
void CheckFinite(std::span<const double> values, std::string_view what);

}  // namespace miaudit

#endif  // MIAUDIT_TENSOR_H_
