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

#include "miaudit/tensor.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "miaudit/error.h"

namespace miaudit {

std::size_t ShapeProduct(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

TensorF::TensorF(std::vector<std::size_t> shape_in,
                 std::vector<double> values_in)
    : shape(std::move(shape_in)), values(std::move(values_in)) {
  if (ShapeProduct(shape) != values.size()) {
    throw Error(ErrorCode::kContract,
                "tensor shape product " + std::to_string(ShapeProduct(shape)) +
                    " does not match " + std::to_string(values.size()) +
                    " values");
  }
}

TensorF TensorF::Zeros(std::vector<std::size_t> shape) {
  std::size_t n = ShapeProduct(shape);
  return TensorF(std::move(shape), std::vector<double>(n, 0.0));
}

void CheckFinite(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNumerical, std::string(what) +
                                             ": non-finite value at index " +
                                             std::to_string(i));
    }
  }
}

}  // namespace miaudit
