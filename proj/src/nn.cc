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

#include "miaudit/nn.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "miaudit/error.h"
#include "miaudit/rng.h"

namespace miaudit {
namespace {

// Largest scale <= clip / norm whose scaled norm does not exceed clip after
// rounding. `scaled_norm(scale)` recomputes the norm of scale * g.
template <typename F>
double ExactClipScale(double norm, double clip, F&& scaled_norm) {
  double scale = clip / norm;
  while (scaled_norm(scale) > clip) scale = std::nextafter(scale, 0.0);
  return scale;
}

using Shape = std::vector<std::size_t>;

std::atomic<std::uint64_t> g_training_calls{0};

// Log-odds bound implied by the probability clamp.
const double kPhiMax = std::log((1.0 - kProbClamp) / kProbClamp);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string ShapeToString(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

[[noreturn]] void ShapeFail(std::size_t layer, const std::string& what) {
  throw Error(ErrorCode::kContract,
              "layer " + std::to_string(layer) + ": " + what);
}

bool IsTrainable(const Layer& layer) {
  return std::holds_alternative<DenseLayer>(layer) ||
         std::holds_alternative<Conv2dLayer>(layer);
}

// Activations of one sample through the network. acts[0] is the input and
// acts[l + 1] the output of layer l; the last entry holds the logits.
struct Trace {
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<std::size_t>> pool_argmax;
};

void ForwardSample(const ModelParams& params,
                   const std::vector<Shape>& shapes,
                   std::span<const double> x, Trace& trace) {
  const std::size_t num_layers = params.spec.layers.size();
  trace.acts.resize(num_layers + 1);
  trace.pool_argmax.resize(num_layers);
  trace.acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::vector<double>& in = trace.acts[l];
    std::vector<double>& out = trace.acts[l + 1];
    const Shape& in_shape = shapes[l];
    const Shape& out_shape = shapes[l + 1];
    const LayerParams& lp = params.layers[l];
    std::visit(
        Overloaded{
            [&](const DenseLayer& d) {
              out.assign(d.out, 0.0);
              const double* w = lp.weight.values.data();
              for (std::size_t o = 0; o < d.out; ++o) {
                double acc = lp.bias.values[o];
                const double* row = w + o * d.in;
                for (std::size_t i = 0; i < d.in; ++i) acc += row[i] * in[i];
                out[o] = acc;
              }
            },
            [&](const Conv2dLayer& c) {
              const std::size_t cin = in_shape[0], h = in_shape[1],
                                w = in_shape[2];
              const std::size_t oh = out_shape[1], ow = out_shape[2];
              const std::size_t k = c.kernel;
              out.assign(c.channels * oh * ow, 0.0);
              for (std::size_t f = 0; f < c.channels; ++f) {
                for (std::size_t y = 0; y < oh; ++y) {
                  for (std::size_t xx = 0; xx < ow; ++xx) {
                    double acc = lp.bias.values[f];
                    for (std::size_t ch = 0; ch < cin; ++ch) {
                      for (std::size_t ky = 0; ky < k; ++ky) {
                        const double* wrow =
                            &lp.weight.values[((f * cin + ch) * k + ky) * k];
                        const double* irow = &in[(ch * h + y + ky) * w + xx];
                        for (std::size_t kx = 0; kx < k; ++kx) {
                          acc += wrow[kx] * irow[kx];
                        }
                      }
                    }
                    out[(f * oh + y) * ow + xx] = acc;
                  }
                }
              }
            },
            [&](const ReluLayer&) {
              out.resize(in.size());
              for (std::size_t i = 0; i < in.size(); ++i) {
                out[i] = in[i] > 0.0 ? in[i] : 0.0;
              }
            },
            [&](const MaxPoolLayer& m) {
              const std::size_t ch = in_shape[0], h = in_shape[1],
                                w = in_shape[2];
              const std::size_t oh = out_shape[1], ow = out_shape[2];
              out.assign(ch * oh * ow, 0.0);
              auto& argmax = trace.pool_argmax[l];
              argmax.assign(out.size(), 0);
              for (std::size_t c = 0; c < ch; ++c) {
                for (std::size_t y = 0; y < oh; ++y) {
                  for (std::size_t xx = 0; xx < ow; ++xx) {
                    std::size_t best = (c * h + y * m.window) * w +
                                       xx * m.window;
                    for (std::size_t py = 0; py < m.window; ++py) {
                      for (std::size_t px = 0; px < m.window; ++px) {
                        std::size_t idx = (c * h + y * m.window + py) * w +
                                          xx * m.window + px;
                        if (in[idx] > in[best]) best = idx;
                      }
                    }
                    std::size_t o = (c * oh + y) * ow + xx;
                    out[o] = in[best];
                    argmax[o] = best;
                  }
                }
              }
            },
            [&](const FlattenLayer&) { out = in; },
            [&](const SoftmaxOutputLayer&) { out = in; },
        },
        params.spec.layers[l]);
  }
}

// Back-propagates `grad_out` (d loss / d logits). Parameter gradients are
// accumulated into `grads` when non-null; the input gradient is written to
// `grad_input` when non-null.
void BackwardSample(const ModelParams& params,
                    const std::vector<Shape>& shapes, const Trace& trace,
                    std::vector<double> grad_out, ParamGradients* grads,
                    std::vector<double>* grad_input) {
  const std::size_t num_layers = params.spec.layers.size();
  std::vector<double> grad_in;
  for (std::size_t l = num_layers; l-- > 0;) {
    const bool need_input_grad = l > 0 || grad_input != nullptr;
    const std::vector<double>& in = trace.acts[l];
    const Shape& in_shape = shapes[l];
    const Shape& out_shape = shapes[l + 1];
    const LayerParams& lp = params.layers[l];
    grad_in.assign(in.size(), 0.0);
    std::visit(
        Overloaded{
            [&](const DenseLayer& d) {
              const double* w = lp.weight.values.data();
              if (grads != nullptr) {
                double* gw = (*grads)[l].weight.values.data();
                double* gb = (*grads)[l].bias.values.data();
                for (std::size_t o = 0; o < d.out; ++o) {
                  const double g = grad_out[o];
                  gb[o] += g;
                  double* row = gw + o * d.in;
                  for (std::size_t i = 0; i < d.in; ++i) row[i] += g * in[i];
                }
              }
              if (need_input_grad) {
                for (std::size_t o = 0; o < d.out; ++o) {
                  const double g = grad_out[o];
                  const double* row = w + o * d.in;
                  for (std::size_t i = 0; i < d.in; ++i) {
                    grad_in[i] += row[i] * g;
                  }
                }
              }
            },
            [&](const Conv2dLayer& c) {
              const std::size_t cin = in_shape[0], h = in_shape[1],
                                w = in_shape[2];
              const std::size_t oh = out_shape[1], ow = out_shape[2];
              const std::size_t k = c.kernel;
              for (std::size_t f = 0; f < c.channels; ++f) {
                for (std::size_t y = 0; y < oh; ++y) {
                  for (std::size_t xx = 0; xx < ow; ++xx) {
                    const double g = grad_out[(f * oh + y) * ow + xx];
                    if (g == 0.0) continue;
                    if (grads != nullptr) (*grads)[l].bias.values[f] += g;
                    for (std::size_t ch = 0; ch < cin; ++ch) {
                      for (std::size_t ky = 0; ky < k; ++ky) {
                        const std::size_t wbase = ((f * cin + ch) * k + ky) * k;
                        const std::size_t ibase = (ch * h + y + ky) * w + xx;
                        for (std::size_t kx = 0; kx < k; ++kx) {
                          if (grads != nullptr) {
                            (*grads)[l].weight.values[wbase + kx] +=
                                g * in[ibase + kx];
                          }
                          if (need_input_grad) {
                            grad_in[ibase + kx] +=
                                lp.weight.values[wbase + kx] * g;
                          }
                        }
                      }
                    }
                  }
                }
              }
            },
            [&](const ReluLayer&) {
              for (std::size_t i = 0; i < in.size(); ++i) {
                grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
              }
            },
            [&](const MaxPoolLayer&) {
              const auto& argmax = trace.pool_argmax[l];
              for (std::size_t o = 0; o < argmax.size(); ++o) {
                grad_in[argmax[o]] += grad_out[o];
              }
            },
            [&](const FlattenLayer&) { grad_in = grad_out; },
            [&](const SoftmaxOutputLayer&) { grad_in = grad_out; },
        },
        params.spec.layers[l]);
    grad_out.swap(grad_in);
  }
  if (grad_input != nullptr) *grad_input = std::move(grad_out);
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

void FillZero(LayerParams& g) {
  std::fill(g.weight.values.begin(), g.weight.values.end(), 0.0);
  std::fill(g.bias.values.begin(), g.bias.values.end(), 0.0);
}

ParamGradients ZeroGradients(const ModelParams& params) {
  ParamGradients grads(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    grads[l] = params.layers[l];
    FillZero(grads[l]);
  }
  return grads;
}

void FillZero(ParamGradients& grads) {
  for (auto& g : grads) FillZero(g);
}

double SquaredWeightNorm(const ModelParams& params) {
  double sum = 0.0;
  for (const auto& lp : params.layers) {
    for (double w : lp.weight.values) sum += w * w;
  }
  return sum;
}

void CheckInputShape(const ModelParams& params, const Shape& sample_shape) {
  if (sample_shape != params.spec.input_shape) {
    throw Error(ErrorCode::kContract,
                "input shape " + ShapeToString(sample_shape) +
                    " does not match model input " +
                    ShapeToString(params.spec.input_shape));
  }
}

Dataset BatchAsDataset(const ModelParams& params, const TensorF& batch,
                       std::span<const int> labels) {
  if (batch.shape.empty()) {
    throw Error(ErrorCode::kContract, "batch tensor has no batch dimension");
  }
  Dataset data;
  data.sample_shape.assign(batch.shape.begin() + 1, batch.shape.end());
  CheckInputShape(params, data.sample_shape);
  if (labels.size() != batch.shape[0]) {
    throw Error(ErrorCode::kContract, "label count does not match batch size");
  }
  data.inputs = batch.values;
  data.labels.assign(labels.begin(), labels.end());
  data.num_classes = static_cast<int>(params.spec.NumClasses());
  return data;
}

// Finds the first layer whose output is non-finite for `x`, for error
// messages after a non-finite loss.
std::size_t FirstNonFiniteLayer(const ModelParams& params,
                                const std::vector<Shape>& shapes,
                                std::span<const double> x) {
  Trace trace;
  ForwardSample(params, shapes, x, trace);
  for (std::size_t l = 0; l < params.spec.layers.size(); ++l) {
    for (double v : trace.acts[l + 1]) {
      if (!std::isfinite(v)) return l;
    }
  }
  return params.spec.layers.size() - 1;
}

struct DpOptions {
  double clip_norm = 0.0;
  double noise_stddev_multiplier = 0.0;
  const ClipObserver* observer = nullptr;
  Rng* noise_rng = nullptr;
};

struct BatchResult {
  double loss = 0.0;  // mean cross-entropy plus L2 term
  ParamGradients grads;
};

// Per-sample gradients are computed into a scratch buffer and then summed so
// the plain and DP paths share the same accumulation order.
BatchResult ComputeBatch(const ModelParams& params,
                         const std::vector<Shape>& shapes,
                         const Dataset& data,
                         std::span<const std::size_t> indices,
                         double l2_lambda, const DpOptions* dp) {
  const std::size_t num_classes = params.spec.NumClasses();
  BatchResult result;
  result.grads = ZeroGradients(params);
  ParamGradients sample_grads = ZeroGradients(params);
  Trace trace;
  std::vector<double> target(num_classes);
  double loss_sum = 0.0;
  for (std::size_t idx : indices) {
    auto x = data.Sample(idx);
    ForwardSample(params, shapes, x, trace);
    const std::vector<double>& logits = trace.acts.back();
    const double max = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - max);
    const double log_norm = max + std::log(sum);

    if (data.HasSoftLabel(idx)) {
      const auto& soft = data.soft_labels[idx];
      std::copy(soft.begin(), soft.end(), target.begin());
    } else {
      std::fill(target.begin(), target.end(), 0.0);
      target[static_cast<std::size_t>(data.labels[idx])] = 1.0;
    }
    std::vector<double> grad_logits(num_classes);
    double sample_loss = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double log_p = logits[k] - log_norm;
      if (target[k] != 0.0) sample_loss -= target[k] * log_p;
      grad_logits[k] = std::exp(log_p) - target[k];
    }
    if (!std::isfinite(sample_loss)) {
      std::size_t layer = FirstNonFiniteLayer(params, shapes, x);
      throw Error(ErrorCode::kNumerical,
                  "non-finite loss at sample " + std::to_string(idx) +
                      ", first non-finite output in layer " +
                      std::to_string(layer));
    }
    loss_sum += sample_loss;

    FillZero(sample_grads);
    BackwardSample(params, shapes, trace, std::move(grad_logits),
                   &sample_grads, nullptr);

    double scale = 1.0;
    if (dp != nullptr) {
      const double norm = GradientNorm(sample_grads);
      auto scaled_norm = [&](double c) {
        double sum = 0.0;
        for (const auto& g : sample_grads) {
          for (double v : g.weight.values) sum += (c * v) * (c * v);
          for (double v : g.bias.values) sum += (c * v) * (c * v);
        }
        return std::sqrt(sum);
      };
      if (norm > dp->clip_norm) {
        scale = ExactClipScale(norm, dp->clip_norm, scaled_norm);
      }
      if (dp->observer != nullptr && *dp->observer) {
        (*dp->observer)(norm, scale == 1.0 ? norm : scaled_norm(scale));
      }
    }
    for (std::size_t l = 0; l < sample_grads.size(); ++l) {
      auto& dst_w = result.grads[l].weight.values;
      auto& dst_b = result.grads[l].bias.values;
      const auto& src_w = sample_grads[l].weight.values;
      const auto& src_b = sample_grads[l].bias.values;
      for (std::size_t i = 0; i < src_w.size(); ++i) dst_w[i] += scale * src_w[i];
      for (std::size_t i = 0; i < src_b.size(); ++i) dst_b[i] += scale * src_b[i];
    }
  }

  const double n = static_cast<double>(indices.size());
  const double noise_std =
      dp != nullptr ? dp->noise_stddev_multiplier * dp->clip_norm / n : 0.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 0; l < result.grads.size(); ++l) {
    for (auto* t : {&result.grads[l].weight, &result.grads[l].bias}) {
      for (double& g : t->values) {
        g /= n;
        if (noise_std > 0.0) g += noise_std * gauss(*dp->noise_rng);
      }
    }
    if (l2_lambda != 0.0) {
      const auto& w = params.layers[l].weight.values;
      auto& gw = result.grads[l].weight.values;
      for (std::size_t i = 0; i < w.size(); ++i) gw[i] += l2_lambda * w[i];
    }
  }
  result.loss = loss_sum / n;
  if (l2_lambda != 0.0) {
    result.loss += 0.5 * l2_lambda * SquaredWeightNorm(params);
  }
  return result;
}

std::vector<std::size_t> AllIndices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

ModelParams RunSgd(const ModelSpec& spec, const Dataset& data,
                   const TrainConfig& cfg, const DpOptions* dp_template,
                   double noise_multiplier) {
  ++g_training_calls;
  spec.Validate();
  cfg.Validate(data.size());
  ModelParams params = InitParams(spec, cfg.seed);
  CheckInputShape(params, data.sample_shape);
  if (data.num_classes != static_cast<int>(spec.NumClasses())) {
    throw Error(ErrorCode::kContract,
                "dataset has " + std::to_string(data.num_classes) +
                    " classes, model outputs " +
                    std::to_string(spec.NumClasses()));
  }
  const auto shapes = spec.LayerShapes();
  Rng shuffle_rng(DeriveSeed(cfg.seed, {seed_tag::kShuffle}));
  Rng noise_rng(DeriveSeed(cfg.seed, {seed_tag::kDpNoise}));
  DpOptions dp;
  if (dp_template != nullptr) {
    dp = *dp_template;
    dp.noise_stddev_multiplier = noise_multiplier;
    dp.noise_rng = &noise_rng;
  }
  std::vector<std::size_t> order = AllIndices(data.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      BatchResult step;
      try {
        step = ComputeBatch(params, shapes, data, batch, cfg.l2_lambda,
                            dp_template != nullptr ? &dp : nullptr);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNumerical) throw;
        throw Error(ErrorCode::kTraining, "training diverged in epoch " +
                                              std::to_string(epoch) + ": " +
                                              e.what());
      }
      if (!std::isfinite(step.loss)) {
        throw Error(ErrorCode::kTraining,
                    "training diverged in epoch " + std::to_string(epoch));
      }
      for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& w = params.layers[l].weight.values;
        auto& b = params.layers[l].bias.values;
        const auto& gw = step.grads[l].weight.values;
        const auto& gb = step.grads[l].bias.values;
        for (std::size_t i = 0; i < w.size(); ++i) {
          w[i] -= cfg.learning_rate * gw[i];
        }
        for (std::size_t i = 0; i < b.size(); ++i) {
          b[i] -= cfg.learning_rate * gb[i];
        }
      }
    }
  }
  return params;
}

// --- binary serialization helpers -----------------------------------------

constexpr char kModelMagic[8] = {'M', 'I', 'A', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kModelVersion = 1;

class ByteWriter {
 public:
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back((v >> (8 * i)) & 0xff);
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back((v >> (8 * i)) & 0xff);
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Str(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void Raw(std::span<const char> s) {
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t UInt(int width) {
    Need(width, "integer");
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += width;
    return v;
  }
  std::uint32_t U32() { return static_cast<std::uint32_t>(UInt(4)); }
  std::uint64_t U64() { return UInt(8); }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    std::uint32_t n = U32();
    Need(n, "string");
    std::string s(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> Raw(std::size_t n) {
    Need(n, "magic");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(pos_, std::string("truncated model file reading ") +
                                 what);
    }
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void WriteTensor(ByteWriter& w, const TensorF& t) {
  w.U32(static_cast<std::uint32_t>(t.shape.size()));
  for (std::size_t d : t.shape) w.U64(d);
  for (double v : t.values) w.F64(v);
}

TensorF ReadTensor(ByteReader& r) {
  std::uint32_t rank = r.U32();
  if (rank > 8) throw ParseError(r.pos(), "implausible tensor rank");
  Shape shape(rank);
  for (auto& d : shape) d = r.U64();
  // Parameterless layers carry rank-0 tensors with no values.
  if (rank == 0) return TensorF();
  std::vector<double> values(ShapeProduct(shape));
  for (auto& v : values) v = r.F64();
  return TensorF(std::move(shape), std::move(values));
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelSpec
// ---------------------------------------------------------------------------

std::vector<Shape> ModelSpec::LayerShapes() const {
  if (input_shape.empty() || ShapeProduct(input_shape) == 0) {
    throw Error(ErrorCode::kContract, "model input shape is empty");
  }
  std::vector<Shape> shapes{input_shape};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Shape& in = shapes.back();
    Shape out = std::visit(
        Overloaded{
            [&](const DenseLayer& d) -> Shape {
              if (in.size() != 1 || in[0] != d.in || d.out == 0) {
                ShapeFail(l, "dense(" + std::to_string(d.in) + "," +
                                 std::to_string(d.out) + ") cannot take " +
                                 ShapeToString(in));
              }
              return {d.out};
            },
            [&](const Conv2dLayer& c) -> Shape {
              if (in.size() != 3 || c.kernel == 0 || c.channels == 0 ||
                  in[1] < c.kernel || in[2] < c.kernel) {
                ShapeFail(l, "conv2d cannot take " + ShapeToString(in));
              }
              return {c.channels, in[1] - c.kernel + 1, in[2] - c.kernel + 1};
            },
            [&](const ReluLayer&) -> Shape { return in; },
            [&](const MaxPoolLayer& m) -> Shape {
              if (in.size() != 3 || m.window == 0 || in[1] < m.window ||
                  in[2] < m.window) {
                ShapeFail(l, "maxpool cannot take " + ShapeToString(in));
              }
              return {in[0], in[1] / m.window, in[2] / m.window};
            },
            [&](const FlattenLayer&) -> Shape { return {ShapeProduct(in)}; },
            [&](const SoftmaxOutputLayer& s) -> Shape {
              if (in.size() != 1 || in[0] != s.num_classes ||
                  s.num_classes < 2) {
                ShapeFail(l, "softmax(" + std::to_string(s.num_classes) +
                                 ") cannot take " + ShapeToString(in));
              }
              return in;
            },
        },
        layers[l]);
    shapes.push_back(std::move(out));
  }
  return shapes;
}

void ModelSpec::Validate() const {
  if (layers.empty() ||
      !std::holds_alternative<SoftmaxOutputLayer>(layers.back())) {
    throw Error(ErrorCode::kContract,
                "model must end with a softmax output layer");
  }
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    if (std::holds_alternative<SoftmaxOutputLayer>(layers[l])) {
      ShapeFail(l, "softmax output must be the last layer");
    }
  }
  if (std::none_of(layers.begin(), layers.end(), IsTrainable)) {
    throw Error(ErrorCode::kContract, "model has no trainable layer");
  }
  LayerShapes();
}

std::size_t ModelSpec::NumClasses() const {
  if (layers.empty() ||
      !std::holds_alternative<SoftmaxOutputLayer>(layers.back())) {
    throw Error(ErrorCode::kContract,
                "model must end with a softmax output layer");
  }
  return std::get<SoftmaxOutputLayer>(layers.back()).num_classes;
}

std::string ModelSpec::LayersToString() const {
  std::string out;
  for (const Layer& layer : layers) {
    if (!out.empty()) out += " ";
    out += std::visit(
        Overloaded{
            [](const DenseLayer& d) {
              return "dense(" + std::to_string(d.in) + "," +
                     std::to_string(d.out) + ")";
            },
            [](const Conv2dLayer& c) {
              return "conv2d(" + std::to_string(c.channels) + "," +
                     std::to_string(c.kernel) + ")";
            },
            [](const ReluLayer&) { return std::string("relu"); },
            [](const MaxPoolLayer& m) {
              return "maxpool(" + std::to_string(m.window) + ")";
            },
            [](const FlattenLayer&) { return std::string("flatten"); },
            [](const SoftmaxOutputLayer& s) {
              return "softmax(" + std::to_string(s.num_classes) + ")";
            },
        },
        layer);
  }
  return out;
}

std::vector<Layer> ParseLayers(std::string_view text) {
  std::vector<Layer> layers;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() &&
           (std::isspace(static_cast<unsigned char>(text[pos])) ||
            text[pos] == ',' || text[pos] == ';')) {
      ++pos;
    }
  };
  auto fail = [&](const std::string& what) -> void {
    throw ParseError(pos, "layer list: " + what);
  };
  skip();
  while (pos < text.size()) {
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_')) {
      ++pos;
    }
    std::string name(text.substr(start, pos - start));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (name.empty()) fail("expected a layer name");
    std::vector<std::size_t> args;
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      while (true) {
        while (pos < text.size() && text[pos] == ' ') ++pos;
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos,
                                         text.data() + text.size(), value);
        if (ec != std::errc()) fail("expected an integer argument");
        pos = static_cast<std::size_t>(ptr - text.data());
        args.push_back(value);
        while (pos < text.size() && text[pos] == ' ') ++pos;
        if (pos < text.size() && text[pos] == ',') {
          ++pos;
          continue;
        }
        if (pos < text.size() && text[pos] == ')') {
          ++pos;
          break;
        }
        fail("unterminated argument list");
      }
    }
    auto want = [&](std::size_t n) {
      if (args.size() != n) {
        fail(name + " takes " + std::to_string(n) + " argument(s)");
      }
    };
    if (name == "dense") {
      want(2);
      layers.emplace_back(DenseLayer{args[0], args[1]});
    } else if (name == "conv2d") {
      want(2);
      layers.emplace_back(Conv2dLayer{args[0], args[1]});
    } else if (name == "relu") {
      want(0);
      layers.emplace_back(ReluLayer{});
    } else if (name == "maxpool") {
      want(1);
      layers.emplace_back(MaxPoolLayer{args[0]});
    } else if (name == "flatten") {
      want(0);
      layers.emplace_back(FlattenLayer{});
    } else if (name == "softmax") {
      want(1);
      layers.emplace_back(SoftmaxOutputLayer{args[0]});
    } else {
      fail("unknown layer '" + name + "'");
    }
    skip();
  }
  return layers;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

std::size_t ModelParams::NumParameters() const {
  std::size_t n = 0;
  for (const auto& lp : layers) n += lp.weight.size() + lp.bias.size();
  return n;
}

ModelParams InitParams(const ModelSpec& spec, std::uint64_t seed) {
  spec.Validate();
  const auto shapes = spec.LayerShapes();
  ModelParams params;
  params.spec = spec;
  params.rng_seed = seed;
  params.layers.resize(spec.layers.size());
  Rng rng(DeriveSeed(seed, {seed_tag::kInit}));
  auto fill = [&](TensorF& t, double fan_in, double fan_out) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    for (double& v : t.values) v = dist(rng);
  };
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    LayerParams& lp = params.layers[l];
    if (const auto* d = std::get_if<DenseLayer>(&spec.layers[l])) {
      lp.weight = TensorF::Zeros({d->out, d->in});
      lp.bias = TensorF::Zeros({d->out});
      fill(lp.weight, static_cast<double>(d->in), static_cast<double>(d->out));
    } else if (const auto* c = std::get_if<Conv2dLayer>(&spec.layers[l])) {
      const std::size_t cin = shapes[l][0];
      lp.weight = TensorF::Zeros({c->channels, cin, c->kernel, c->kernel});
      lp.bias = TensorF::Zeros({c->channels});
      const double area = static_cast<double>(c->kernel * c->kernel);
      fill(lp.weight, static_cast<double>(cin) * area,
           static_cast<double>(c->channels) * area);
    }
  }
  return params;
}

std::vector<double> FlattenGradients(const ParamGradients& grads) {
  std::vector<double> flat;
  for (const auto& g : grads) {
    flat.insert(flat.end(), g.weight.values.begin(), g.weight.values.end());
    flat.insert(flat.end(), g.bias.values.begin(), g.bias.values.end());
  }
  return flat;
}

double GradientNorm(const ParamGradients& grads) {
  double sum = 0.0;
  for (const auto& g : grads) {
    for (double v : g.weight.values) sum += v * v;
    for (double v : g.bias.values) sum += v * v;
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Inference and gradients
// ---------------------------------------------------------------------------

TensorF Forward(const ModelParams& params, const TensorF& batch) {
  if (batch.shape.empty()) {
    throw Error(ErrorCode::kContract, "batch tensor has no batch dimension");
  }
  CheckInputShape(params, Shape(batch.shape.begin() + 1, batch.shape.end()));
  const auto shapes = params.spec.LayerShapes();
  const std::size_t n = batch.shape[0];
  const std::size_t d = params.spec.InputSize();
  const std::size_t m = params.spec.NumClasses();
  TensorF out = TensorF::Zeros({n, m});
  Trace trace;
  for (std::size_t i = 0; i < n; ++i) {
    ForwardSample(params, shapes,
                  std::span<const double>(batch.values).subspan(i * d, d),
                  trace);
    auto probs = Softmax(trace.acts.back());
    std::copy(probs.begin(), probs.end(), out.values.begin() + i * m);
  }
  return out;
}

std::vector<double> PredictProba(const ModelParams& params,
                                 std::span<const double> x) {
  if (x.size() != params.spec.InputSize()) {
    throw Error(ErrorCode::kContract, "input has " + std::to_string(x.size()) +
                                          " values, model expects " +
                                          std::to_string(
                                              params.spec.InputSize()));
  }
  Trace trace;
  ForwardSample(params, params.spec.LayerShapes(), x, trace);
  return Softmax(trace.acts.back());
}

int PredictClass(const ModelParams& params, std::span<const double> x) {
  auto probs = PredictProba(params, x);
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                          probs.begin());
}

double Loss(const ModelParams& params, const Dataset& data, double l2_lambda) {
  CheckInputShape(params, data.sample_shape);
  auto idx = AllIndices(data.size());
  return ComputeBatch(params, params.spec.LayerShapes(), data, idx, l2_lambda,
                      nullptr)
      .loss;
}

double Loss(const ModelParams& params, const TensorF& batch,
            std::span<const int> labels, double l2_lambda) {
  return Loss(params, BatchAsDataset(params, batch, labels), l2_lambda);
}

ParamGradients GradParams(const ModelParams& params, const Dataset& data,
                          double l2_lambda) {
  CheckInputShape(params, data.sample_shape);
  if (data.empty()) throw Error(ErrorCode::kContract, "empty batch");
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= params.spec.NumClasses()) {
      throw Error(ErrorCode::kContract,
                  "label " + std::to_string(y) + " out of range");
    }
  }
  auto idx = AllIndices(data.size());
  return ComputeBatch(params, params.spec.LayerShapes(), data, idx, l2_lambda,
                      nullptr)
      .grads;
}

ParamGradients GradParams(const ModelParams& params, const TensorF& batch,
                          std::span<const int> labels, double l2_lambda) {
  return GradParams(params, BatchAsDataset(params, batch, labels), l2_lambda);
}

PhiObjective EvaluatePhiObjective(std::span<const PhiTerm> terms,
                                  std::span<const double> x, int y,
                                  bool with_gradient) {
  PhiObjective result;
  if (with_gradient) result.gradient.assign(x.size(), 0.0);
  Trace trace;
  std::vector<double> grad_x;
  for (const PhiTerm& term : terms) {
    const ModelParams& params = *term.model;
    if (x.size() != params.spec.InputSize()) {
      throw Error(ErrorCode::kContract, "input size does not match model");
    }
    const std::size_t m = params.spec.NumClasses();
    if (y < 0 || static_cast<std::size_t>(y) >= m) {
      throw Error(ErrorCode::kContract, "label out of range");
    }
    const auto shapes = params.spec.LayerShapes();
    ForwardSample(params, shapes, x, trace);
    const std::vector<double>& z = trace.acts.back();
    // phi = z_y - logsumexp_{k != y} z_k
    double other_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      if (k != static_cast<std::size_t>(y)) other_max = std::max(other_max, z[k]);
    }
    double other_sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != static_cast<std::size_t>(y)) other_sum += std::exp(z[k] - other_max);
    }
    const double raw = z[y] - (other_max + std::log(other_sum));
    if (std::isnan(raw)) {
      throw Error(ErrorCode::kNumerical, "log-odds objective is NaN");
    }
    const double phi = std::clamp(raw, -kPhiMax, kPhiMax);
    result.value += term.weight * phi;
    if (with_gradient && raw > -kPhiMax && raw < kPhiMax) {
      std::vector<double> grad_z(m);
      for (std::size_t k = 0; k < m; ++k) {
        grad_z[k] = k == static_cast<std::size_t>(y)
                        ? term.weight
                        : -term.weight * std::exp(z[k] - other_max) / other_sum;
      }
      BackwardSample(params, shapes, trace, std::move(grad_z), nullptr,
                     &grad_x);
      for (std::size_t i = 0; i < x.size(); ++i) result.gradient[i] += grad_x[i];
    }
  }
  return result;
}

double ModelPhi(const ModelParams& params, std::span<const double> x, int y) {
  PhiTerm term{&params, 1.0};
  return EvaluatePhiObjective(std::span(&term, 1), x, y, false).value;
}

std::vector<double> GradInput(const ModelParams& params,
                              std::span<const double> x, int y) {
  PhiTerm term{&params, 1.0};
  return EvaluatePhiObjective(std::span(&term, 1), x, y, true).gradient;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

void TrainConfig::Validate(std::size_t dataset_size) const {
  if (dataset_size == 0) {
    throw Error(ErrorCode::kConfig, "cannot train on an empty dataset");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kConfig, "learning_rate must be positive");
  }
  if (!(l2_lambda >= 0.0)) {
    throw Error(ErrorCode::kConfig, "l2_lambda must be non-negative");
  }
  if (batch_size == 0 || batch_size > dataset_size) {
    throw Error(ErrorCode::kConfig,
                "batch_size " + std::to_string(batch_size) +
                    " must be in [1, " + std::to_string(dataset_size) + "]");
  }
}

void DpSgdConfig::Validate(std::size_t dataset_size) const {
  train.Validate(dataset_size);
  if (!(clip_norm > 0.0)) {
    throw Error(ErrorCode::kConfig, "clip_norm must be positive");
  }
  if (!(noise_multiplier >= 0.0)) {
    throw Error(ErrorCode::kConfig, "noise_multiplier must be non-negative");
  }
}

ModelParams Train(const ModelSpec& spec, const Dataset& data,
                  const TrainConfig& cfg) {
  return RunSgd(spec, data, cfg, nullptr, 0.0);
}

ModelParams TrainDpSgd(const ModelSpec& spec, const Dataset& data,
                       const DpSgdConfig& cfg, const ClipObserver& observer) {
  cfg.Validate(data.size());
  DpOptions dp;
  dp.clip_norm = cfg.clip_norm;
  dp.observer = &observer;
  return RunSgd(spec, data, cfg.train, &dp, cfg.noise_multiplier);
}

double ClipToNorm(std::span<double> grad, double clip_norm) {
  if (!(clip_norm > 0.0)) {
    throw Error(ErrorCode::kConfig, "clip_norm must be positive");
  }
  double sum = 0.0;
  for (double g : grad) sum += g * g;
  const double norm = std::sqrt(sum);
  if (norm > clip_norm) {
    const double scale = ExactClipScale(norm, clip_norm, [&](double c) {
      double acc = 0.0;
      for (double g : grad) acc += (c * g) * (c * g);
      return std::sqrt(acc);
    });
    for (double& g : grad) g *= scale;
  }
  return norm;
}

double DpNoiseStddev(double clip_norm, double noise_multiplier,
                     std::size_t batch_size) {
  return noise_multiplier * clip_norm / static_cast<double>(batch_size);
}

double Accuracy(const ModelParams& params, const Dataset& data) {
  if (data.empty()) {
    throw Error(ErrorCode::kContract, "accuracy of an empty dataset");
  }
  CheckInputShape(params, data.sample_shape);
  const auto shapes = params.spec.LayerShapes();
  Trace trace;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ForwardSample(params, shapes, data.Sample(i), trace);
    const auto& z = trace.acts.back();
    const int pred =
        static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (pred == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::uint64_t TrainingCallCount() { return g_training_calls.load(); }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> SerializeModel(const ModelParams& params) {
  ByteWriter w;
  w.Raw(kModelMagic);
  w.U32(kModelVersion);
  w.U32(static_cast<std::uint32_t>(params.spec.input_shape.size()));
  for (std::size_t d : params.spec.input_shape) w.U64(d);
  w.Str(params.spec.LayersToString());
  w.U64(params.rng_seed);
  w.U32(static_cast<std::uint32_t>(params.layers.size()));
  for (const auto& lp : params.layers) {
    WriteTensor(w, lp.weight);
    WriteTensor(w, lp.bias);
  }
  return w.Take();
}

ModelParams DeserializeModel(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.Raw(sizeof(kModelMagic));
  if (!std::equal(magic.begin(), magic.end(), kModelMagic)) {
    throw ParseError(0, "not a model file");
  }
  const std::size_t version_pos = r.pos();
  if (r.U32() != kModelVersion) {
    throw ParseError(version_pos, "unsupported model file version");
  }
  ModelParams params;
  std::uint32_t rank = r.U32();
  if (rank > 8) throw ParseError(r.pos(), "implausible input rank");
  params.spec.input_shape.resize(rank);
  for (auto& d : params.spec.input_shape) d = r.U64();
  params.spec.layers = ParseLayers(r.Str());
  params.rng_seed = r.U64();
  std::uint32_t count = r.U32();
  if (count != params.spec.layers.size()) {
    throw ParseError(r.pos(), "layer count does not match the layer list");
  }
  params.layers.resize(count);
  for (auto& lp : params.layers) {
    lp.weight = ReadTensor(r);
    lp.bias = ReadTensor(r);
  }
  if (!r.AtEnd()) throw ParseError(r.pos(), "trailing bytes in model file");
  ModelParams reference = InitParams(params.spec, 0);
  for (std::size_t l = 0; l < count; ++l) {
    if (reference.layers[l].weight.shape != params.layers[l].weight.shape ||
        reference.layers[l].bias.shape != params.layers[l].bias.shape) {
      throw Error(ErrorCode::kParse,
                  "tensor shapes of layer " + std::to_string(l) +
                      " do not match the layer list");
    }
    CheckFinite(params.layers[l].weight.values, "model weights");
    CheckFinite(params.layers[l].bias.values, "model biases");
  }
  return params;
}

void SaveModel(const ModelParams& params, const std::filesystem::path& path) {
  auto bytes = SerializeModel(params);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

ModelParams LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return DeserializeModel(bytes);
}

}  // namespace miaudit
