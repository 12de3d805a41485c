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

// mi-audit: membership-inference audit runner.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "miaudit/config.h"
#include "miaudit/error.h"
#include "miaudit/harness.h"

namespace {

using namespace miaudit;

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory (overrides out_dir)");
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
}

ExperimentConfig Load(const CommonOptions& o) {
  ExperimentConfig c = LoadConfig(o.config);
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.seed) c.seed = *o.seed;
  return c;
}

void PrintRecord(const RunRecord& r) {
  std::printf("target accuracy: train %.4f, test %.4f\n",
              r.target_train_accuracy, r.target_test_accuracy);
  for (const AttackRun& run : r.runs) {
    std::string label = run.model;
    if (run.sweep_value) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s=%g ", r.sweep_param.c_str(),
                    *run.sweep_value);
      label = buf + label;
    }
    double tpr1 = 0.0, rta0 = 0.0, rta1 = 0.0;
    for (const auto& [t, v] : run.summary.tpr_at) {
      if (t == 0.01) tpr1 = v;
    }
    for (const auto& [t, v] : run.summary.rta_at) {
      if (t == 0.0) rta0 = v;
      if (t == 1.0) rta1 = v;
    }
    std::printf("%-24s %-6s %-5s tpr@0.01=%.4f rta@0=%.4f rta@1=%.4f\n",
                label.c_str(), std::string(AttackName(run.attack)).c_str(),
                std::string(IndicatorName(run.indicator)).c_str(), tpr1, rta0,
                rta1);
  }
  for (const auto& [stage, secs] : r.timings) {
    std::printf("time %s: %.2fs\n", stage.c_str(), secs);
  }
}

int Finish(RunRecord& record) {
  record.artifacts = EmitReport(record, record.config.out_dir);
  PrintRecord(record);
  for (const auto& p : record.artifacts) std::printf("wrote %s\n", p.c_str());
  if (!record.ok()) {
    std::fprintf(stderr, "mi-audit: run failed: %s\n", record.failure.c_str());
    return 1;
  }
  return 0;
}

std::vector<PreparedVariables> LoadAll(const std::vector<std::string>& paths) {
  std::vector<PreparedVariables> out;
  for (const auto& p : paths) out.push_back(LoadPrepared(p));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference audit runner"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Train, prepare, score and report");
  AddCommon(run, run_opts);

  CommonOptions sweep_opts;
  std::string sweep_param;
  std::vector<double> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Repeat a run over parameter values");
  AddCommon(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param, "epsilon, sigma_noise or N")
      ->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")
      ->required()
      ->delimiter(',');

  CommonOptions transfer_opts;
  std::vector<std::string> transfer_prepared;
  std::optional<std::size_t> transfer_n;
  auto* transfer =
      app.add_subcommand("transfer", "Score retrained models with saved variables");
  AddCommon(transfer, transfer_opts);
  transfer->add_option("--prepared", transfer_prepared, "prepared_<attack>.json")
      ->required()
      ->check(CLI::ExistingFile);
  transfer->add_option("--n-unknown", transfer_n, "Number of retrained models");

  CommonOptions dp_opts;
  std::vector<std::string> dp_prepared;
  std::optional<double> dp_clip, dp_noise;
  std::optional<std::size_t> dp_n;
  auto* dp = app.add_subcommand("dp-eval", "Score DP-SGD models with saved variables");
  AddCommon(dp, dp_opts);
  dp->add_option("--clip", dp_clip, "Clipping norm C");
  dp->add_option("--noise", dp_noise, "Noise multiplier");
  dp->add_option("--n-unknown", dp_n, "Models per group");
  dp->add_option("--prepared", dp_prepared,
                 "prepared_<attack>.json; prepared fresh when omitted")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      RunRecord record = RunAttackExperiment(Load(run_opts));
      return Finish(record);
    }
    if (sweep->parsed()) {
      RunRecord record = RunSweep(Load(sweep_opts), ParseSweepParam(sweep_param),
                                  sweep_values);
      return Finish(record);
    }
    if (transfer->parsed()) {
      const ExperimentConfig c = Load(transfer_opts);
      RunRecord record = RunTransferability(c, LoadAll(transfer_prepared),
                                            transfer_n.value_or(c.n_unknown));
      return Finish(record);
    }
    if (dp->parsed()) {
      const ExperimentConfig c = Load(dp_opts);
      DpConfig dp_cfg = c.dp;
      if (dp_clip) dp_cfg.clip_norm = *dp_clip;
      if (dp_noise) dp_cfg.noise_multiplier = *dp_noise;
      if (dp_n) dp_cfg.n_unknown = *dp_n;
      std::vector<PreparedVariables> prepared = LoadAll(dp_prepared);
      if (prepared.empty()) {
        c.Validate();
        prepared = PrepareAll(c, BuildSetup(c));
      }
      RunRecord record = RunDpSgdEval(c, std::move(prepared), dp_cfg);
      return Finish(record);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "mi-audit: %s\n", e.what());
    return e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kParse ? 2 : 1;
  }
  return 0;
}
