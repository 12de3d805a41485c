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

#include "miaudit/harness.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "miaudit/error.h"
#include "miaudit/idx.h"
#include "miaudit/parallel.h"
#include "miaudit/rng.h"

namespace miaudit {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::pair<Dataset, Dataset> LoadData(const ExperimentConfig& config) {
  const DatasetConfig& d = config.dataset;
  if (d.source == DataSource::kSynthetic) {
    BlobSpec spec{d.num_classes, d.dims, d.spread};
    const auto centers =
        BlobCenters(spec, DeriveSeed(config.seed, {seed_tag::kData}));
    return {SynthBlobs(centers, d.spread, d.population,
                       DeriveSeed(config.seed, {seed_tag::kData, 2})),
            SynthBlobs(centers, d.spread, d.test,
                       DeriveSeed(config.seed, {seed_tag::kData, 3}))};
  }
  auto load = [&](const std::string& images, const std::string& labels,
                  std::optional<std::size_t> limit) {
    return DatasetFromIdx(ReadIdxFile(ResolveDataPath(images)),
                          ReadIdxFile(ResolveDataPath(labels)), d.num_classes,
                          limit);
  };
  return {load(d.train_images, d.train_labels, d.limit),
          load(d.test_images, d.test_labels, d.test_limit)};
}

std::vector<AttackKind> DistinctAttacks(const ExperimentConfig& config) {
  std::vector<AttackKind> out;
  for (const auto& [a, i] : config.Pairs()) {
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  return out;
}

const PreparedVariables* FindPrepared(std::span<const PreparedVariables> all,
                                      AttackKind attack) {
  for (const auto& p : all) {
    if (p.attack == attack) return &p;
  }
  return nullptr;
}

void CheckPreparedMatches(const PreparedVariables& prepared,
                          const ExperimentSetup& setup) {
  const auto& subjects = setup.subjects.subjects;
  bool ok = prepared.subjects.size() == subjects.size();
  for (std::size_t i = 0; ok && i < subjects.size(); ++i) {
    const SubjectRecord& r = prepared.subjects[i];
    ok = r.x == subjects[i].x && r.y == subjects[i].y &&
         r.population_index == subjects[i].population_index;
  }
  if (!ok) {
    throw Error(ErrorCode::kConfig,
                "prepared variables for " +
                    std::string(AttackName(prepared.attack)) +
                    " do not match the subjects of this configuration");
  }
}

std::vector<ModelParams> TrainUnknownModels(const ExperimentConfig& config,
                                            const ExperimentSetup& setup,
                                            std::size_t n,
                                            const std::optional<DpConfig>& dp) {
  const Dataset train_set = setup.split.TargetTrainingSet();
  std::vector<ModelParams> models(n);
  ParallelFor(
      n,
      [&](std::size_t u) {
        TrainConfig cfg = config.train;
        cfg.seed = DeriveSeed(config.seed, {seed_tag::kUnknownModel, u});
        if (dp) {
          DpSgdConfig dp_cfg;
          dp_cfg.train = cfg;
          dp_cfg.clip_norm = dp->clip_norm;
          dp_cfg.noise_multiplier = dp->noise_multiplier;
          models[u] = TrainDpSgd(config.model, train_set, dp_cfg);
        } else {
          models[u] = Train(config.model, train_set, cfg);
        }
      },
      config.max_threads);
  return models;
}

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string Level(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

json ConfigJson(const ExperimentConfig& config) {
  json doc = json::object();
  std::istringstream in(FormatConfig(config));
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      doc[section] = json::object();
      continue;
    }
    const auto eq = line.find(" = ");
    doc[section][line.substr(0, eq)] = line.substr(eq + 3);
  }
  return doc;
}

}  // namespace

ExperimentSetup BuildSetup(const ExperimentConfig& config) {
  auto [population, test] = LoadData(config);
  ExperimentSetup setup;
  setup.split = MakeSplit(std::move(population), std::move(test), config.seed);
  const Dataset train_set = setup.split.TargetTrainingSet();
  TrainConfig cfg = config.train;
  cfg.seed = DeriveSeed(config.seed, {seed_tag::kTarget});
  setup.target = Train(config.model, train_set, cfg);
  setup.train_accuracy = Accuracy(setup.target, train_set);
  setup.test_accuracy = Accuracy(setup.target, setup.split.test);
  setup.subjects = SampleSubjects(setup.split, config.k, config.seed);
  return setup;
}

std::vector<PreparedVariables> PrepareAll(const ExperimentConfig& config,
                                          const ExperimentSetup& setup) {
  const PrepareOptions options = config.MakePrepareOptions();
  std::vector<PreparedVariables> out;
  for (AttackKind a : DistinctAttacks(config)) {
    out.push_back(Prepare(a, setup.target, setup.split.population,
                          setup.subjects.subjects, options));
  }
  return out;
}

std::vector<AttackRun> ScoreModels(const ExperimentConfig& config,
                                   std::span<const PreparedVariables> prepared,
                                   std::span<const NamedModel> models,
                                   const std::vector<bool>& truth) {
  const auto grid = DefaultRtaGrid();
  std::vector<AttackRun> runs;
  for (const auto& [attack, indicator] : config.Pairs()) {
    const PreparedVariables* prep = FindPrepared(prepared, attack);
    if (prep == nullptr) continue;
    if (prep->subjects.size() != truth.size()) {
      throw Error(ErrorCode::kContract,
                  "prepared subjects and truth differ in length");
    }
    for (const NamedModel& m : models) {
      AttackRun run;
      run.model = m.name;
      run.attack = attack;
      run.indicator = indicator;
      run.scores = ScoreSubjects(*m.params, *prep, indicator, config.z,
                                 config.max_threads);
      std::vector<double> values;
      for (const auto& s : run.scores) values.push_back(s.score);
      run.roc = Roc(values, truth);
      run.rta = ComputeRtaCurve(run.roc, grid);
      run.summary = Summarize(run.roc);
      runs.push_back(std::move(run));
    }
  }
  if (runs.empty()) {
    throw Error(ErrorCode::kConfig,
                "no configured attack has prepared variables");
  }
  return runs;
}

std::vector<AttackRun> AverageRuns(std::span<const AttackRun> runs,
                                   std::string_view label) {
  std::vector<AttackRun> out;
  std::vector<std::size_t> counts;
  for (const AttackRun& r : runs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AttackRun& o) {
      return o.attack == r.attack && o.indicator == r.indicator &&
             o.sweep_value == r.sweep_value;
    });
    if (it == out.end()) {
      AttackRun mean;
      mean.model = std::string(label);
      mean.sweep_value = r.sweep_value;
      mean.attack = r.attack;
      mean.indicator = r.indicator;
      mean.rta.t = r.rta.t;
      mean.rta.values.assign(r.rta.values.size(), 0.0);
      mean.summary = r.summary;
      for (auto& [t, v] : mean.summary.tpr_at) v = 0.0;
      for (auto& [t, v] : mean.summary.rta_at) v = 0.0;
      out.push_back(std::move(mean));
      counts.push_back(0);
      it = out.end() - 1;
    }
    const std::size_t idx = static_cast<std::size_t>(it - out.begin());
    ++counts[idx];
    for (std::size_t j = 0; j < r.rta.values.size(); ++j) {
      it->rta.values[j] += r.rta.values[j];
    }
    for (std::size_t j = 0; j < r.summary.tpr_at.size(); ++j) {
      it->summary.tpr_at[j].second += r.summary.tpr_at[j].second;
    }
    for (std::size_t j = 0; j < r.summary.rta_at.size(); ++j) {
      it->summary.rta_at[j].second += r.summary.rta_at[j].second;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double n = static_cast<double>(counts[i]);
    for (double& v : out[i].rta.values) v /= n;
    for (auto& [t, v] : out[i].summary.tpr_at) v /= n;
    for (auto& [t, v] : out[i].summary.rta_at) v /= n;
  }
  return out;
}

RunRecord RunAttackExperiment(const ExperimentConfig& config) {
  config.Validate();
  RunRecord record;
  record.config = config;
  record.kind = "attack";
  try {
    auto start = Clock::now();
    const ExperimentSetup setup = BuildSetup(config);
    record.timings["setup"] = SecondsSince(start);
    record.target_train_accuracy = setup.train_accuracy;
    record.target_test_accuracy = setup.test_accuracy;
    record.truth = setup.subjects.truth.bits();

    start = Clock::now();
    record.prepared = PrepareAll(config, setup);
    record.timings["prepare"] = SecondsSince(start);

    start = Clock::now();
    const NamedModel target{"target", &setup.target};
    record.runs = ScoreModels(config, record.prepared,
                              std::span<const NamedModel>(&target, 1),
                              record.truth);
    record.timings["score"] = SecondsSince(start);
  } catch (const Error& e) {
    record.failure = e.what();
  }
  return record;
}

RunRecord RunTransferability(const ExperimentConfig& config,
                             const ExperimentSetup& setup,
                             std::vector<PreparedVariables> prepared,
                             std::span<const NamedModel> unknown_models) {
  if (prepared.empty()) {
    throw Error(ErrorCode::kConfig, "transfer needs prepared variables");
  }
  if (unknown_models.empty()) {
    throw Error(ErrorCode::kConfig, "transfer needs at least one unknown model");
  }
  for (const auto& p : prepared) CheckPreparedMatches(p, setup);
  RunRecord record;
  record.config = config;
  record.kind = "transfer";
  record.target_train_accuracy = setup.train_accuracy;
  record.target_test_accuracy = setup.test_accuracy;
  record.truth = setup.subjects.truth.bits();
  record.prepared = std::move(prepared);

  const auto start = Clock::now();
  const NamedModel target{"target", &setup.target};
  record.runs = ScoreModels(config, record.prepared,
                            std::span<const NamedModel>(&target, 1),
                            record.truth);
  const auto unknown =
      ScoreModels(config, record.prepared, unknown_models, record.truth);
  record.runs.insert(record.runs.end(), unknown.begin(), unknown.end());
  const auto mean = AverageRuns(unknown, "unknown-mean");
  record.runs.insert(record.runs.end(), mean.begin(), mean.end());
  record.timings["score"] = SecondsSince(start);
  return record;
}

RunRecord RunTransferability(const ExperimentConfig& config,
                             std::vector<PreparedVariables> prepared,
                             std::size_t n_unknown) {
  config.Validate();
  if (prepared.empty()) {
    throw Error(ErrorCode::kConfig, "transfer needs prepared variables");
  }
  if (n_unknown == 0) {
    throw Error(ErrorCode::kConfig, "n_unknown must be >= 1");
  }
  auto start = Clock::now();
  const ExperimentSetup setup = BuildSetup(config);
  const auto models = TrainUnknownModels(config, setup, n_unknown, std::nullopt);
  const double train_seconds = SecondsSince(start);
  std::vector<NamedModel> named;
  for (std::size_t u = 0; u < models.size(); ++u) {
    named.push_back({"unknown-" + std::to_string(u), &models[u]});
  }
  RunRecord record =
      RunTransferability(config, setup, std::move(prepared), named);
  record.timings["train_unknown"] = train_seconds;
  return record;
}

RunRecord RunDpSgdEval(const ExperimentConfig& config,
                       std::vector<PreparedVariables> prepared,
                       const DpConfig& dp) {
  config.Validate();
  if (prepared.empty()) {
    throw Error(ErrorCode::kConfig, "dp-eval needs prepared variables");
  }
  if (dp.n_unknown == 0) throw Error(ErrorCode::kConfig, "n_unknown must be >= 1");
  if (!(dp.clip_norm > 0.0) || !(dp.noise_multiplier >= 0.0)) {
    throw Error(ErrorCode::kConfig, "invalid dp settings");
  }
  RunRecord record;
  record.config = config;
  record.config.dp = dp;
  record.kind = "dp-eval";
  auto start = Clock::now();
  const ExperimentSetup setup = BuildSetup(config);
  for (const auto& p : prepared) CheckPreparedMatches(p, setup);
  const auto plain =
      TrainUnknownModels(config, setup, dp.n_unknown, std::nullopt);
  const auto private_models = TrainUnknownModels(config, setup, dp.n_unknown, dp);
  record.timings["train_unknown"] = SecondsSince(start);
  record.target_train_accuracy = setup.train_accuracy;
  record.target_test_accuracy = setup.test_accuracy;
  record.truth = setup.subjects.truth.bits();
  record.prepared = std::move(prepared);

  start = Clock::now();
  std::vector<NamedModel> l2_named, dp_named;
  for (std::size_t u = 0; u < dp.n_unknown; ++u) {
    l2_named.push_back({"l2-" + std::to_string(u), &plain[u]});
    dp_named.push_back({"dp-" + std::to_string(u), &private_models[u]});
  }
  const NamedModel target{"target", &setup.target};
  record.runs = ScoreModels(config, record.prepared,
                            std::span<const NamedModel>(&target, 1),
                            record.truth);
  const auto l2_runs = ScoreModels(config, record.prepared, l2_named, record.truth);
  const auto dp_runs = ScoreModels(config, record.prepared, dp_named, record.truth);
  for (const auto* group : {&l2_runs, &dp_runs}) {
    record.runs.insert(record.runs.end(), group->begin(), group->end());
  }
  for (const auto& m : AverageRuns(l2_runs, "l2-mean")) record.runs.push_back(m);
  for (const auto& m : AverageRuns(dp_runs, "dp-mean")) record.runs.push_back(m);
  record.timings["score"] = SecondsSince(start);
  return record;
}

SweepParam ParseSweepParam(std::string_view name) {
  if (name == "epsilon") return SweepParam::kEpsilon;
  if (name == "sigma_noise") return SweepParam::kSigmaNoise;
  if (name == "N" || name == "shadows") return SweepParam::kShadows;
  throw Error(ErrorCode::kConfig, "unknown sweep parameter '" +
                                      std::string(name) +
                                      "' (epsilon, sigma_noise, N)");
}

std::string_view SweepParamName(SweepParam param) {
  switch (param) {
    case SweepParam::kEpsilon:
      return "epsilon";
    case SweepParam::kSigmaNoise:
      return "sigma_noise";
    case SweepParam::kShadows:
      return "N";
  }
  return "unknown";
}

RunRecord RunSweep(const ExperimentConfig& config, SweepParam param,
                   std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kConfig, "a sweep needs at least 2 values");
  }
  std::vector<ExperimentConfig> configs;
  for (double v : values) {
    ExperimentConfig c = config;
    switch (param) {
      case SweepParam::kEpsilon:
        c.epsilon = v;
        break;
      case SweepParam::kSigmaNoise:
        c.sigma_noise = v;
        break;
      case SweepParam::kShadows:
        if (!(v >= 2.0) || v != std::floor(v)) {
          throw Error(ErrorCode::kConfig, "N values must be integers >= 2");
        }
        c.num_rounds = static_cast<std::size_t>(v);
        break;
    }
    c.Validate();
    configs.push_back(std::move(c));
  }

  RunRecord record;
  record.config = config;
  record.kind = "sweep";
  record.sweep_param = std::string(SweepParamName(param));
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunRecord one = RunAttackExperiment(configs[i]);
    if (i == 0) {
      record.target_train_accuracy = one.target_train_accuracy;
      record.target_test_accuracy = one.target_test_accuracy;
      record.truth = one.truth;
    }
    for (AttackRun& r : one.runs) {
      r.sweep_value = values[i];
      record.runs.push_back(std::move(r));
    }
    for (const auto& [stage, secs] : one.timings) {
      record.timings[record.sweep_param + "=" + Level(values[i]) + "/" + stage] =
          secs;
    }
    if (!one.ok() && record.ok()) {
      record.failure = record.sweep_param + "=" + Level(values[i]) + ": " +
                       one.failure;
    }
  }
  return record;
}

std::vector<std::filesystem::path> EmitReport(
    const RunRecord& record, const std::filesystem::path& out_dir) {
  if (record.config.attacks.empty() && record.config.pairs.empty()) {
    throw Error(ErrorCode::kConfig, "attack list is empty; nothing written");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::kIo, "cannot create output directory " +
                                    out_dir.string());
  }
  const bool sweep = !record.sweep_param.empty();
  auto prefix = [&](const AttackRun& r) {
    std::string p;
    if (sweep) p += (r.sweep_value ? Num(*r.sweep_value) : "") + ",";
    p += r.model + "," + std::string(AttackName(r.attack)) + "," +
         std::string(IndicatorName(r.indicator)) + ",";
    return p;
  };
  const std::string head =
      (sweep ? record.sweep_param + "," : std::string()) + "model,attack,indicator,";

  std::string scores = head + "subject_index,score,ground_truth\n";
  std::string roc = head + "tau,fpr,tpr\n";
  std::string rta = head + "t,rta\n";
  json results = json::array();
  for (const AttackRun& r : record.runs) {
    const std::string p = prefix(r);
    for (const IndicatorScore& s : r.scores) {
      const bool member =
          s.subject_index < record.truth.size() && record.truth[s.subject_index];
      scores += p + std::to_string(s.subject_index) + "," + Num(s.score) + "," +
                (member ? "1" : "0") + "\n";
    }
    for (const RocPoint& pt : r.roc.points) {
      roc += p + Num(pt.tau) + "," + Num(pt.fpr) + "," + Num(pt.tpr) + "\n";
    }
    for (std::size_t j = 0; j < r.rta.t.size(); ++j) {
      rta += p + Num(r.rta.t[j]) + "," + Num(r.rta.values[j]) + "\n";
    }
    json row;
    if (sweep && r.sweep_value) row[record.sweep_param] = *r.sweep_value;
    row["model"] = r.model;
    row["attack"] = std::string(AttackName(r.attack));
    row["indicator"] = std::string(IndicatorName(r.indicator));
    for (const auto& [t, v] : r.summary.tpr_at) row["tpr@" + Level(t)] = v;
    for (const auto& [t, v] : r.summary.rta_at) row["rta@" + Level(t)] = v;
    results.push_back(std::move(row));
  }

  json summary;
  summary["kind"] = record.kind;
  if (sweep) summary["sweep_param"] = record.sweep_param;
  summary["seed"] = record.config.seed;
  summary["target_train_accuracy"] = record.target_train_accuracy;
  summary["target_test_accuracy"] = record.target_test_accuracy;
  summary["num_subjects"] = record.truth.size();
  summary["num_members"] =
      std::count(record.truth.begin(), record.truth.end(), true);
  if (record.kind == "dp-eval") {
    const DpConfig& dp = record.config.dp;
    summary["dp"] = json{{"clip_norm", dp.clip_norm},
                         {"noise_multiplier", dp.noise_multiplier},
                         {"n_unknown", dp.n_unknown},
                         {"budget_epsilon", dp.budget_epsilon},
                         {"budget_delta", dp.budget_delta}};
  }
  summary["results"] = std::move(results);
  if (!record.ok()) summary["failure"] = record.failure;

  json config = ConfigJson(record.config);
  std::vector<std::filesystem::path> paths;
  auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = out_dir / name;
    WriteFile(path, text);
    paths.push_back(path);
  };
  emit("config.json", config.dump(2) + "\n");
  emit("scores.csv", scores);
  emit("roc.csv", roc);
  emit("rta.csv", rta);
  emit("summary.json", summary.dump(2) + "\n");
  for (const PreparedVariables& p : record.prepared) {
    emit("prepared_" + std::string(AttackName(p.attack)) + ".json",
         SerializePrepared(p));
  }
  return paths;
}

double ShuffledBaselineRta(std::span<const double> scores,
                           const std::vector<bool>& truth, std::uint64_t seed,
                           std::size_t repeats) {
  if (repeats == 0) throw Error(ErrorCode::kContract, "repeats must be >= 1");
  double sum = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    std::vector<bool> shuffled = truth;
    Rng rng(DeriveSeed(seed, {seed_tag::kShuffledBaseline, r}));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    sum += Rta(Roc(scores, shuffled), 1.0);
  }
  return sum / static_cast<double>(repeats);
}

}  // namespace miaudit
