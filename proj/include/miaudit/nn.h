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

// Small differentiable classifier engine: forward inference, analytic
// gradients with respect to parameters and inputs, SGD with L2
// regularization and a DP-SGD variant. All arithmetic is in double.

#ifndef MIAUDIT_NN_H_
#define MIAUDIT_NN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "miaudit/dataset.h"
#include "miaudit/tensor.h"

namespace miaudit {

// ---------------------------------------------------------------------------
// Architecture
// ---------------------------------------------------------------------------

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  bool operator==(const DenseLayer&) const = default;
};

// Valid (unpadded) stride-1 convolution over [channels, height, width].
// `channels` is the number of output channels.
struct Conv2dLayer {
  std::size_t channels = 0;
  std::size_t kernel = 0;
  bool operator==(const Conv2dLayer&) const = default;
};

struct ReluLayer {
  bool operator==(const ReluLayer&) const = default;
};

// Non-overlapping max pooling with stride equal to the window.
struct MaxPoolLayer {
  std::size_t window = 0;
  bool operator==(const MaxPoolLayer&) const = default;
};

struct FlattenLayer {
  bool operator==(const FlattenLayer&) const = default;
};

// Terminal layer: softmax over `num_classes` logits.
struct SoftmaxOutputLayer {
  std::size_t num_classes = 0;
  bool operator==(const SoftmaxOutputLayer&) const = default;
};

using Layer = std::variant<DenseLayer, Conv2dLayer, ReluLayer, MaxPoolLayer,
                           FlattenLayer, SoftmaxOutputLayer>;

struct ModelSpec {
  std::vector<std::size_t> input_shape;
  std::vector<Layer> layers;

  // Throws kContract unless shapes compose, the last layer is
  // SoftmaxOutputLayer and some layer is trainable.
  void Validate() const;

  // Input shape of every layer followed by the output shape.
  std::vector<std::vector<std::size_t>> LayerShapes() const;

  std::size_t NumClasses() const;
  std::size_t InputSize() const { return ShapeProduct(input_shape); }

  // "dense(16,32) relu dense(32,2) softmax(2)"
  std::string LayersToString() const;

  bool operator==(const ModelSpec&) const = default;
};

// Parses the textual layer list produced by LayersToString. Commas between
// layers are optional.
std::vector<Layer> ParseLayers(std::string_view text);

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

// Weight and bias of one layer. Both are empty for layers without
// parameters.
struct LayerParams {
  TensorF weight;
  TensorF bias;
  bool operator==(const LayerParams&) const = default;
};

struct ModelParams {
  ModelSpec spec;
  std::vector<LayerParams> layers;  // one entry per layer in spec
  std::uint64_t rng_seed = 0;

  std::size_t NumParameters() const;
  bool operator==(const ModelParams&) const = default;
};

// Uniform Glorot initialization, s = sqrt(6 / (fan_in + fan_out)), biases 0.
ModelParams InitParams(const ModelSpec& spec, std::uint64_t seed);

// Gradients share the ModelParams layout.
using ParamGradients = std::vector<LayerParams>;

// Flattened view helpers; order is layer by layer, weight then bias.
std::vector<double> FlattenGradients(const ParamGradients& grads);
double GradientNorm(const ParamGradients& grads);

// ---------------------------------------------------------------------------
// Inference and gradients
// ---------------------------------------------------------------------------

// `batch` has shape [n, input_shape...]; returns [n, num_classes]
// probability rows.
TensorF Forward(const ModelParams& params, const TensorF& batch);

std::vector<double> PredictProba(const ModelParams& params,
                                 std::span<const double> x);
int PredictClass(const ModelParams& params, std::span<const double> x);

// Mean cross-entropy over the batch plus (l2_lambda / 2) * sum of squared
// weights (biases are not regularized).
double Loss(const ModelParams& params, const TensorF& batch,
            std::span<const int> labels, double l2_lambda);
double Loss(const ModelParams& params, const Dataset& data, double l2_lambda);

ParamGradients GradParams(const ModelParams& params, const TensorF& batch,
                          std::span<const int> labels, double l2_lambda);
// Uses soft rows where the dataset has them.
ParamGradients GradParams(const ModelParams& params, const Dataset& data,
                          double l2_lambda);

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before the
// log-odds transform.
inline constexpr double kProbClamp = 1e-7;

// Clamped log-odds of the true-class probability, log(p_y / (1 - p_y)),
// evaluated from the logits.
double ModelPhi(const ModelParams& params, std::span<const double> x, int y);

// One weighted term of a log-odds objective: weight * phi(x, y | model).
struct PhiTerm {
  const ModelParams* model = nullptr;
  double weight = 1.0;
};

struct PhiObjective {
  double value = 0.0;
  std::vector<double> gradient;  // d value / d x; empty if not requested
};

// Evaluates sum_i weight_i * phi(x, y | model_i) and optionally its input
// gradient. Gradients are zero where the clamp is active.
PhiObjective EvaluatePhiObjective(std::span<const PhiTerm> terms,
                                  std::span<const double> x, int y,
                                  bool with_gradient = true);

// Gradient of phi(x, y | params) with respect to x.
std::vector<double> GradInput(const ModelParams& params,
                              std::span<const double> x, int y);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  double l2_lambda = 0.0;
  std::uint64_t seed = 0;

  void Validate(std::size_t dataset_size) const;
};

struct DpSgdConfig {
  TrainConfig train;
  double clip_norm = 1.0;
  double noise_multiplier = 0.0;

  void Validate(std::size_t dataset_size) const;
};

// Called once per sample with the gradient norm before and after clipping.
using ClipObserver = std::function<void(double before, double after)>;

// Mini-batch SGD on mean cross-entropy plus L2. Batches are drawn from a
// per-epoch shuffle seeded by cfg.seed; the result is a pure function of
// (spec, data, cfg).
ModelParams Train(const ModelSpec& spec, const Dataset& data,
                  const TrainConfig& cfg);

// DP-SGD: every per-sample gradient is clipped to L2 norm <= clip_norm, the
// batch mean is taken and N(0, (noise_multiplier * clip_norm / batch)^2)
// noise is added per coordinate. The L2 penalty gradient is added after
// privatization.
ModelParams TrainDpSgd(const ModelSpec& spec, const Dataset& data,
                       const DpSgdConfig& cfg,
                       const ClipObserver& observer = {});

// Scales `grad` in place so its L2 norm is at most `clip_norm`; returns the
// norm before clipping.
double ClipToNorm(std::span<double> grad, double clip_norm);

double DpNoiseStddev(double clip_norm, double noise_multiplier,
                     std::size_t batch_size);

// Fraction of argmax-correct predictions. Empty data is a kContract error.
double Accuracy(const ModelParams& params, const Dataset& data);

// Number of Train/TrainDpSgd calls made by this process.
std::uint64_t TrainingCallCount();

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

// Versioned binary container: "MIAMODEL", u32 version, spec descriptor,
// seed, then every tensor as rank, dims and little-endian float64 values.
std::vector<std::uint8_t> SerializeModel(const ModelParams& params);
ModelParams DeserializeModel(std::span<const std::uint8_t> bytes);
void SaveModel(const ModelParams& params, const std::filesystem::path& path);
ModelParams LoadModel(const std::filesystem::path& path);

}  // namespace miaudit

#endif  // MIAUDIT_NN_H_
