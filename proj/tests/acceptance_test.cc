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

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "idx_fixture.h"
#include "metrics_oracle.h"
#include "miaudit/attack_prep.h"
#include "miaudit/config.h"
#include "miaudit/error.h"
#include "miaudit/harness.h"
#include "miaudit/idx.h"
#include "miaudit/indicators.h"
#include "miaudit/metrics.h"
#include "miaudit/nn.h"
#include "miaudit/rng.h"
#include "test_util.h"

namespace miaudit {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using testing::Linear;
using testing::Mlp;
using testing::RandomDataset;
using testing::RandomParams;
using testing::RandomPoint;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

// Overfit MLP on two 16-dimensional blobs.
constexpr const char* kBlobs = R"(
[experiment]
attacks = amia
indicators = lr_n
k = 50
[dataset]
classes = 2
dims = 16
spread = 0.5
population = 200
test = 200
[model]
input_shape = 16
layers = dense(16,64) relu dense(64,2) softmax(2)
[train]
epochs = 200
batch_size = 16
learning_rate = 0.1
[attack]
shadows = 8
epsilon = 0.02
fgsm_steps = 10
noise_count = 10
sigma_noise = 0.02
z = 5
)";

ExperimentConfig Blobs(std::uint64_t seed) {
  ExperimentConfig c = ParseConfig(kBlobs);
  c.seed = seed;
  return c;
}

double RtaAtOne(const AttackRun& run) {
  for (const auto& [t, v] : run.summary.rta_at) {
    if (t == 1.0) return v;
  }
  throw Error(ErrorCode::kInternal, "summary has no RTA(1)");
}

const AttackRun& FindRun(const RunRecord& r, const std::string& model) {
  for (const AttackRun& run : r.runs) {
    if (run.model == model) return run;
  }
  throw Error(ErrorCode::kInternal, "no run for model " + model);
}

std::vector<double> ScoreValues(const AttackRun& run) {
  std::vector<double> v;
  for (const auto& s : run.scores) v.push_back(s.score);
  return v;
}

double NormRelErr(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

ModelSpec TinyConv() {
  ModelSpec spec;
  spec.input_shape = {1, 6, 6};
  spec.layers = {Conv2dLayer{2, 3}, ReluLayer{}, MaxPoolLayer{2}, FlattenLayer{},
                 DenseLayer{8, 3}, SoftmaxOutputLayer{3}};
  return spec;
}

Outcome GradientCorrectness() {
  Outcome o;
  const auto start = Clock::now();
  const double h = 1e-5;
  double worst = 0.0;
  Rng rng(9);
  for (int t = 0; t < 24; ++t) {
    const ModelSpec spec = t % 2 == 0 ? Mlp(5, 7, 3) : TinyConv();
    const ModelParams p = RandomParams(spec, 200 + t, 0.5);
    const Dataset d = RandomDataset(spec.InputSize(), 3, 4, 300 + t);
    std::vector<std::size_t> shape = {4};
    shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
    const TensorF batch(shape, d.inputs);
    const double lambda = 0.01;
    const auto analytic = FlattenGradients(GradParams(p, batch, d.labels, lambda));
    std::vector<double> numeric;
    ModelParams q = p;
    for (auto& layer : q.layers) {
      for (auto* tensor : {&layer.weight, &layer.bias}) {
        for (double& v : tensor->values) {
          const double saved = v;
          v = saved + h;
          const double up = Loss(q, batch, d.labels, lambda);
          v = saved - h;
          const double down = Loss(q, batch, d.labels, lambda);
          v = saved;
          numeric.push_back((up - down) / (2 * h));
        }
      }
    }
    worst = std::max(worst, NormRelErr(analytic, numeric));

    auto x = RandomPoint(spec.InputSize(), rng);
    const int y = t % 3;
    const auto input_analytic = GradInput(p, x, y);
    std::vector<double> input_numeric;
    for (double& xi : x) {
      const double saved = xi;
      xi = saved + h;
      const double up = ModelPhi(p, x, y);
      xi = saved - h;
      const double down = ModelPhi(p, x, y);
      xi = saved;
      input_numeric.push_back((up - down) / (2 * h));
    }
    worst = std::max(worst, NormRelErr(input_analytic, input_numeric));
  }
  const double secs = Seconds(start);
  o.Check(worst <= 1e-4, "relative error " + Fmt("%.3g", worst));
  o.Check(secs < 10.0, "runtime " + Fmt("%.2f s", secs));
  if (o.pass) o.detail = "24 models, worst rel err " + Fmt("%.2e", worst) +
                         ", " + Fmt("%.2f s", secs);
  return o;
}

Outcome IndicatorMath() {
  Outcome o;
  const GaussianStats n{1.5, 0.7, 10};
  o.Check(std::abs(LrOffline(1.5, n) - 0.5) <= 1e-12, "lr_offline(mu_n)");
  const GaussianStats m1{1.0, 1.0, 5}, n1{-1.0, 1.0, 5};
  o.Check(std::abs(LrOnline(0.0, m1, n1) - 1.0) <= 1e-12, "symmetric lr_online");
  o.Check(std::abs(LrOnline(1.0, m1, n1) - 7.38906) <= 1e-5, "e^2 lr_online");
  o.Check(Phi(0.5) == 0.0, "phi(0.5)");
  Rng rng(8);
  std::uniform_real_distribution<double> u(-4, 4), s(0.05, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = 1 + trial % 16;
    std::vector<NoiseLevelStats> stats(p);
    std::vector<double> phis(p), gaps(p);
    for (std::size_t l = 0; l < p; ++l) {
      stats[l] = {GaussianStats{u(rng), s(rng), 3}, GaussianStats{u(rng), s(rng), 3}};
      phis[l] = u(rng);
      gaps[l] = u(rng);
    }
    o.Check(LrOptimal(phis, stats, SelectTopGaps(gaps, p)) ==
                LrPerturbed(phis, stats),
            "lr_optimal(z=p) differs on bank " + std::to_string(trial));
  }
  if (o.pass) o.detail = "100 banks bit-exact";
  return o;
}

Outcome RocRtaOracle() {
  Outcome o;
  Rng rng(31);
  const auto grid = DefaultRtaGrid();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 499;
    std::vector<double> s(n);
    std::vector<bool> t(n);
    const int levels = 1 + static_cast<int>(rng() % 100);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial % 2 ? g(rng) : static_cast<double>(rng() % levels) / levels;
      t[i] = rng() % 2;
    }
    t[0] = true;
    t[1] = false;
    const RocCurve c = Roc(s, t);
    o.Check(c.points == testing::BruteForceRoc(s, t),
            "roc mismatch in case " + std::to_string(trial));
    for (double x : grid) {
      o.Check(Rta(c, x) == testing::BruteForceRta(s, t, x),
              "rta mismatch in case " + std::to_string(trial));
    }
    o.Check(Rta(c, 0.0) == testing::BruteForceRta(s, t, 0.0), "rta(0) mismatch");
  }
  std::vector<double> s(100);
  std::vector<bool> t(100);
  for (int i = 0; i < 100; ++i) {
    t[i] = i % 2 == 0;
    s[i] = t[i] ? 1.0 + i : -1.0 - i;
  }
  const RocCurve perfect = Roc(s, t);
  o.Check(Rta(perfect, 0.0) == 1.0, "perfect separation rta(0)");
  for (double x : grid) o.Check(Rta(perfect, x) == 1.0, "perfect separation");

  double null_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<bool> shuffled = t;
    std::vector<double> scores(1000);
    std::vector<bool> truth(1000);
    Rng r(DeriveSeed(seed, {7}));
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      truth[i] = i % 2 == 0;
      scores[i] = g(r) + (truth[i] ? 2.0 : 0.0);
    }
    std::shuffle(truth.begin(), truth.end(), r);
    null_sum += Rta(Roc(scores, truth), 1.0);
  }
  const double null_mean = null_sum / 5.0;
  o.Check(null_mean >= 0.45 && null_mean <= 0.55,
          "shuffled null rta(1) " + Fmt("%.4f", null_mean));
  if (o.pass) o.detail = "200 oracle cases, null rta(1) " + Fmt("%.4f", null_mean);
  return o;
}

Outcome PerturbationContract() {
  Outcome o;
  Rng rng(41);
  std::uniform_real_distribution<double> eps_dist(0.0, 0.2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 6;
    const ModelSpec spec = Mlp(d, 5, 3);
    std::vector<ModelParams> models;
    for (int j = 0; j < 4; ++j) models.push_back(RandomParams(spec, 1000 * t + j));
    const std::vector<const ModelParams*> members = {&models[0], &models[1]};
    const std::vector<const ModelParams*> nonmembers = {&models[2], &models[3]};
    auto x = RandomPoint(d, rng);
    if (t % 3 == 0) x[0] = 0.0;
    if (t % 5 == 0) x[d - 1] = 1.0;
    const int y = t % 3;
    const double eps = t % 10 == 0 ? 0.0 : eps_dist(rng);
    const std::size_t steps = 1 + t % 12;
    const PerturbationResult r =
        OptimizePerturbation(x, y, members, nonmembers, eps, steps);
    const std::vector<double> zero(d, 0.0);
    const double at_zero = PerturbationObjective(x, y, members, nonmembers, zero);
    const double at_delta =
        PerturbationObjective(x, y, members, nonmembers, r.delta);
    o.Check(at_delta <= at_zero, "objective increased in case " + std::to_string(t));
    o.Check(r.final_objective == at_delta, "reported objective mismatch");
    for (std::size_t i = 0; i < d; ++i) {
      o.Check(std::abs(r.delta[i]) <= eps, "delta exceeds epsilon");
      o.Check(x[i] + r.delta[i] >= 0.0 && x[i] + r.delta[i] <= 1.0,
              "x + delta leaves [0,1]");
    }
  }
  // Two-class linear models: phi(x, 0) = (w0 - w1) . x + (b0 - b1), so the
  // objective gradient is w_n - w_m and one signed step of size eps is optimal.
  ModelParams member = InitParams(Linear(3, 2), 1);
  ModelParams nonmember = member;
  member.layers[0].weight.values = {0.5, -1.0, 2.0, 0.0, 0.0, 0.0};
  nonmember.layers[0].weight.values = {-0.5, 1.0, 1.0, 0.0, 0.0, 0.0};
  const std::vector<const ModelParams*> m = {&member};
  const std::vector<const ModelParams*> n = {&nonmember};
  const std::vector<double> x = {0.5, 0.5, 0.5};
  const double eps = 0.02;
  const PerturbationResult r = OptimizePerturbation(x, 0, m, n, eps, 1);
  const std::vector<double> expected = {eps, -eps, eps};
  o.Check(r.delta == expected, "linear closed form not recovered");
  if (o.pass) o.detail = "100 ensembles plus linear closed form";
  return o;
}

Outcome EndToEndSeparation() {
  Outcome o;
  const auto start = Clock::now();
  double rta_sum = 0.0, base_sum = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunRecord r = RunAttackExperiment(Blobs(seed));
    if (!r.ok()) {
      o.Check(false, "run failed: " + r.failure);
      return o;
    }
    const AttackRun& run = FindRun(r, "target");
    const double rta = RtaAtOne(run);
    rta_sum += rta;
    base_sum += ShuffledBaselineRta(ScoreValues(run), r.truth, seed);
    per_seed += Fmt(" %.3f", rta);
  }
  const double rta = rta_sum / 5.0, base = base_sum / 5.0;
  const double secs = Seconds(start);
  o.detail = "AMIA lr_n rta(1) " + Fmt("%.4f", rta) + " (seeds" + per_seed +
             "), shuffled " + Fmt("%.4f", base) + ", " + Fmt("%.1f s", secs);
  o.Check(rta >= 0.55, o.detail);
  o.Check(rta - base >= 0.05, o.detail);
  o.Check(secs < 180.0, o.detail);
  return o;
}

Outcome ShadowAccounting() {
  Outcome o;
  const std::size_t num_rounds = 4, k = 5;
  const BlobSpec spec{2, 4, 0.3};
  const auto centers = BlobCenters(spec, 3);
  const ExperimentSplit split = MakeSplit(SynthBlobs(centers, 0.3, 60, 4),
                                          SynthBlobs(centers, 0.3, 20, 5), 6);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  const ModelParams target = Train(Mlp(4, 6, 2), split.TargetTrainingSet(), cfg);
  const SubjectSet subjects = SampleSubjects(split, k, 7);
  PrepareOptions options;
  options.num_rounds = num_rounds;
  options.shadow_spec = Mlp(4, 6, 2);
  options.shadow_train = cfg;
  options.noise_count = 2;
  options.fgsm_steps = 2;
  options.seed = 8;
  const std::pair<AttackKind, std::size_t> expected[] = {
      {AttackKind::kFLira, num_rounds},
      {AttackKind::kEmia, num_rounds},
      {AttackKind::kAmia, 2 * num_rounds},
      {AttackKind::kEAmia, 2 * num_rounds},
      {AttackKind::kNLira, num_rounds * (k + 1)}};
  std::string counts;
  for (const auto& [kind, want] : expected) {
    const std::uint64_t before = ShadowTrainingCount();
    const PreparedVariables p =
        Prepare(kind, target, split.population, subjects.subjects, options);
    const std::uint64_t got = ShadowTrainingCount() - before;
    counts += " " + std::string(AttackName(kind)) + "=" + std::to_string(got);
    o.Check(got == want && p.shadow_models_trained == want,
            std::string(AttackName(kind)) + " trained " + std::to_string(got));
  }
  if (o.pass) o.detail = "N=4, k=5:" + counts;
  return o;
}

Outcome DpMechanism() {
  Outcome o;
  Rng rng(17);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> v(1 + t % 50);
    for (double& x : v) x = g(rng);
    const double clip = 0.1 + (t % 7) * 0.37;
    ClipToNorm(v, clip);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    o.Check(std::sqrt(norm) <= clip, "clipped norm above C");
  }
  {
    DpSgdConfig dp;
    dp.train.epochs = 2;
    dp.train.batch_size = 8;
    dp.clip_norm = 0.05;
    TrainDpSgd(Mlp(4, 5, 2), RandomDataset(4, 2, 40, 3), dp,
               [&](double, double after) {
                 o.Check(after <= dp.clip_norm, "observed norm above C");
               });
  }

  // One full-batch step with and without noise; the difference is lr * noise.
  const Dataset d = RandomDataset(100, 100, 10, 4);
  DpSgdConfig dp;
  dp.train.epochs = 1;
  dp.train.batch_size = 10;
  dp.train.learning_rate = 0.5;
  dp.train.seed = 21;
  dp.clip_norm = 2.0;
  dp.noise_multiplier = 1.3;
  const ModelParams noisy = TrainDpSgd(Linear(100, 100), d, dp);
  DpSgdConfig quiet = dp;
  quiet.noise_multiplier = 0.0;
  const ModelParams clean = TrainDpSgd(Linear(100, 100), d, quiet);
  std::vector<double> noise;
  for (std::size_t l = 0; l < noisy.layers.size(); ++l) {
    for (auto member : {&LayerParams::weight, &LayerParams::bias}) {
      const auto& a = (clean.layers[l].*member).values;
      const auto& b = (noisy.layers[l].*member).values;
      for (std::size_t i = 0; i < a.size(); ++i) {
        noise.push_back((a[i] - b[i]) / dp.train.learning_rate);
      }
    }
  }
  const double mean = std::accumulate(noise.begin(), noise.end(), 0.0) / noise.size();
  double var = 0.0;
  for (double v : noise) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (noise.size() - 1));
  const double want = 1.3 * 2.0 / 10.0;
  o.Check(noise.size() >= 10000, "fewer than 10000 draws");
  o.Check(std::abs(sd - want) / want <= 0.05, "noise std " + Fmt("%.4f", sd));

  // Noise-dominated DP training against prepared AMIA variables.
  double dp_sum = 0.0, l2_sum = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ExperimentConfig c = Blobs(seed);
    const RunRecord base = RunAttackExperiment(c);
    if (!base.ok()) {
      o.Check(false, "run failed: " + base.failure);
      return o;
    }
    DpConfig dpc;
    dpc.clip_norm = 1.0;
    dpc.noise_multiplier = 8.0;
    dpc.n_unknown = 2;
    const RunRecord r = RunDpSgdEval(c, base.prepared, dpc);
    if (!r.ok()) {
      o.Check(false, "dp-eval failed: " + r.failure);
      return o;
    }
    const double v = RtaAtOne(FindRun(r, "dp-mean"));
    dp_sum += v;
    l2_sum += RtaAtOne(FindRun(r, "l2-mean"));
    per_seed += Fmt(" %.3f", v);
  }
  const double dp_rta = dp_sum / 5.0;
  o.Check(std::abs(dp_rta - 0.5) <= 0.1, "dp rta(1) " + Fmt("%.4f", dp_rta));
  if (o.pass) {
    o.detail = "noise std " + Fmt("%.4f", sd) + " vs " + Fmt("%.4f", want) +
               ", dp rta(1) " + Fmt("%.4f", dp_rta) + " (seeds" + per_seed +
               "), l2 rta(1) " + Fmt("%.4f", l2_sum / 5.0);
  }
  return o;
}

Outcome TransferHarness() {
  Outcome o;
  ExperimentConfig c = Blobs(3);
  c.train.epochs = 40;
  const RunRecord original = RunAttackExperiment(c);
  if (!original.ok()) {
    o.Check(false, "run failed: " + original.failure);
    return o;
  }
  const std::uint64_t shadows = ShadowTrainingCount();
  const RunRecord t = RunTransferability(c, original.prepared, 10);
  o.Check(t.ok(), "transfer failed: " + t.failure);
  o.Check(ShadowTrainingCount() == shadows, "transfer trained shadows");
  std::size_t unknown = 0;
  for (const AttackRun& run : t.runs) {
    if (run.model.rfind("unknown-", 0) == 0 && run.model != "unknown-mean") {
      ++unknown;
      o.Check(run.scores.size() == c.k, "missing scores");
    }
  }
  o.Check(unknown == 10, "expected 10 unknown models, got " + std::to_string(unknown));

  const ExperimentSetup setup = BuildSetup(c);
  const ModelParams copy = setup.target;
  const NamedModel models[] = {{"copy", &copy}};
  const RunRecord same = RunTransferability(c, setup, original.prepared, models);
  o.Check(ScoreValues(FindRun(same, "copy")) ==
              ScoreValues(FindRun(original, "target")),
          "exact copy changed scores");
  o.Check(ShadowTrainingCount() == shadows, "transfer trained shadows");
  if (o.pass) o.detail = "10 unknown models, 0 shadows, exact copy bit-exact";
  return o;
}

Outcome IdxParser() {
  Outcome o;
  const auto good = testing::FourImageFixture();
  const IdxFile f = ParseIdx(good);
  o.Check(f.header.dims == std::vector<std::uint32_t>{4, 2, 3}, "dims");
  const auto px = f.Pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    o.Check(px[i] == good[16 + i] / 255.0, "pixel " + std::to_string(i));
  }
  o.Check(SerializeIdx(f) == good, "image round trip");
  const IdxFile labels = ParseIdx(testing::FourLabelFixture());
  o.Check(labels.Labels() == std::vector<int>{3, 0, 9, 1}, "labels");
  o.Check(SerializeIdx(labels) == testing::FourLabelFixture(), "label round trip");

  auto bad_magic = good;
  bad_magic[3] = 0x04;
  auto trailing = good;
  trailing.push_back(0);
  const std::pair<std::vector<std::uint8_t>, std::size_t> malformed[] = {
      {{good.begin(), good.begin() + 2}, 2},
      {bad_magic, 0},
      {{good.begin(), good.begin() + 10}, 10},
      {{good.begin(), good.end() - 1}, good.size() - 1},
      {trailing, good.size()}};
  for (const auto& [bytes, offset] : malformed) {
    try {
      ParseIdx(bytes);
      o.Check(false, "malformed fixture accepted");
    } catch (const ParseError& e) {
      o.Check(e.offset() == offset, "offset " + std::to_string(e.offset()) +
                                        " != " + std::to_string(offset));
    }
  }
  if (o.pass) o.detail = "fixture bit-exact, 5 malformed fixtures positioned";
  return o;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome Determinism() {
  Outcome o;
  ExperimentConfig c = Blobs(4);
  c.attacks = {AttackKind::kAmia, AttackKind::kFLira};
  c.pairs = {{AttackKind::kAmia, IndicatorKind::kLrN},
             {AttackKind::kAmia, IndicatorKind::kLrO},
             {AttackKind::kFLira, IndicatorKind::kLrF}};
  const fs::path root = fs::temp_directory_path() / "mi_audit_acceptance";
  fs::remove_all(root);
  std::vector<fs::path> files;
  for (const char* name : {"a", "b"}) {
    const RunRecord r = RunAttackExperiment(c);
    o.Check(r.ok(), "run failed: " + r.failure);
    files = EmitReport(r, root / name);
  }
  for (const fs::path& f : files) {
    const auto name = f.filename();
    o.Check(ReadAll(root / "a" / name) == ReadAll(root / "b" / name),
            name.string() + " differs");
  }
  fs::remove_all(root);
  if (o.pass) o.detail = std::to_string(files.size()) + " files byte-identical";
  return o;
}

int RunAll() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gradient correctness", GradientCorrectness},
      {"indicator math", IndicatorMath},
      {"ROC/RTA oracle equivalence", RocRtaOracle},
      {"i-FGSM contract", PerturbationContract},
      {"end-to-end separation", EndToEndSeparation},
      {"shadow model accounting", ShadowAccounting},
      {"DP-SGD mechanism", DpMechanism},
      {"transferability harness", TransferHarness},
      {"IDX parser", IdxParser},
      {"determinism", Determinism}};
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", index,
                name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace miaudit

int main() { return miaudit::RunAll(); }
