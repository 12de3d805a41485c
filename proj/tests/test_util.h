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

#ifndef MIAUDIT_TESTS_TEST_UTIL_H_
#define MIAUDIT_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "miaudit/data.h"
#include "miaudit/dataset.h"
#include "miaudit/nn.h"
#include "miaudit/rng.h"

namespace miaudit::testing {

inline ModelSpec Mlp(std::size_t in, std::size_t hidden, std::size_t classes) {
  ModelSpec spec;
  spec.input_shape = {in};
  spec.layers = {DenseLayer{in, hidden}, ReluLayer{}, DenseLayer{hidden, classes},
                 SoftmaxOutputLayer{classes}};
  return spec;
}

inline ModelSpec Linear(std::size_t in, std::size_t classes) {
  ModelSpec spec;
  spec.input_shape = {in};
  spec.layers = {DenseLayer{in, classes}, SoftmaxOutputLayer{classes}};
  return spec;
}

// Random parameters with a wider spread than Glorot so tests see
// non-trivial logits.
inline ModelParams RandomParams(const ModelSpec& spec, std::uint64_t seed,
                                double scale = 1.0) {
  ModelParams p = InitParams(spec, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& l : p.layers) {
    for (double& v : l.weight.values) v = u(rng);
    for (double& v : l.bias.values) v = u(rng);
  }
  return p;
}

inline std::vector<double> RandomPoint(std::size_t d, Rng& rng,
                                       double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(d);
  for (double& v : x) v = u(rng);
  return x;
}

inline Dataset RandomDataset(std::size_t dims, int classes, std::size_t n,
                             std::uint64_t seed) {
  Dataset d;
  d.sample_shape = {dims};
  d.num_classes = classes;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    d.Append(RandomPoint(dims, rng), static_cast<int>(i % classes));
  }
  return d;
}

inline double RelErr(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

}  // namespace miaudit::testing

#endif  // MIAUDIT_TESTS_TEST_UTIL_H_
