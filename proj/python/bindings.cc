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

#include <cstdio>
#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "miaudit/attack_prep.h"
#include "miaudit/config.h"
#include "miaudit/error.h"
#include "miaudit/harness.h"
#include "miaudit/indicators.h"
#include "miaudit/metrics.h"

namespace py = pybind11;
using namespace miaudit;

namespace {

std::string Level(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

py::dict SummaryDict(const MetricSummary& s) {
  py::dict d;
  for (const auto& [t, v] : s.tpr_at) d[py::str("tpr@" + Level(t))] = v;
  for (const auto& [t, v] : s.rta_at) d[py::str("rta@" + Level(t))] = v;
  return d;
}

py::dict RecordDict(const RunRecord& r) {
  py::dict d;
  d["kind"] = r.kind;
  d["ok"] = r.ok();
  d["failure"] = r.failure;
  d["target_train_accuracy"] = r.target_train_accuracy;
  d["target_test_accuracy"] = r.target_test_accuracy;
  d["truth"] = r.truth;
  py::list runs;
  for (const AttackRun& run : r.runs) {
    py::dict row;
    row["model"] = run.model;
    row["attack"] = std::string(AttackName(run.attack));
    row["indicator"] = std::string(IndicatorName(run.indicator));
    std::vector<double> scores;
    for (const auto& s : run.scores) scores.push_back(s.score);
    row["scores"] = scores;
    row["rta_t"] = run.rta.t;
    row["rta"] = run.rta.values;
    row["summary"] = SummaryDict(run.summary);
    runs.append(row);
  }
  d["runs"] = runs;
  py::list artifacts;
  for (const auto& p : r.artifacts) artifacts.append(p.string());
  d["artifacts"] = artifacts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Membership-inference audit core";
  static py::exception<Error> error_type(m, "MiAuditError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  py::class_<GaussianStats>(m, "GaussianStats")
      .def(py::init<>())
      .def(py::init([](double mu, double sigma) {
             return GaussianStats{mu, sigma, 0};
           }),
           py::arg("mu"), py::arg("sigma"))
      .def_readwrite("mu", &GaussianStats::mu)
      .def_readwrite("sigma", &GaussianStats::sigma)
      .def_readwrite("n_samples", &GaussianStats::n_samples)
      .def("__repr__", [](const GaussianStats& s) {
        return "GaussianStats(mu=" + std::to_string(s.mu) +
               ", sigma=" + std::to_string(s.sigma) + ")";
      });

  m.def("fit_gaussian",
        [](const std::vector<double>& v) { return FitGaussian(v); });
  m.def("phi", &Phi, py::arg("prob"));
  m.def("normal_cdf", &NormalCdf);
  m.def("lr_offline", &LrOffline, py::arg("phi_obs"), py::arg("nonmember"));
  m.def("lr_online", &LrOnline, py::arg("phi_obs"), py::arg("member"),
        py::arg("nonmember"));
  m.def("select_top_gaps",
        [](const std::vector<double>& gaps, std::size_t z) {
          return SelectTopGaps(gaps, z);
        });
  m.def("decide", [](const std::vector<double>& scores, double tau) {
    return Decide(scores, tau);
  });

  m.def("roc", [](const std::vector<double>& scores,
                  const std::vector<bool>& truth) {
    std::vector<std::tuple<double, double, double>> out;
    for (const RocPoint& p : Roc(scores, truth).points) {
      out.emplace_back(p.tau, p.fpr, p.tpr);
    }
    return out;
  });
  m.def("tpr_at_fpr", [](const std::vector<double>& scores,
                         const std::vector<bool>& truth, double t) {
    return TprAtFpr(Roc(scores, truth), t);
  });
  m.def("rta", [](const std::vector<double>& scores,
                  const std::vector<bool>& truth, double t) {
    return Rta(Roc(scores, truth), t);
  });
  m.def("default_rta_grid", &DefaultRtaGrid);

  m.def("format_config", [](const std::string& text) {
    return FormatConfig(ParseConfig(text));
  });
  m.def(
      "run_experiment",
      [](const std::string& config_text, std::optional<std::string> out_dir) {
        const ExperimentConfig c = ParseConfig(config_text);
        RunRecord record;
        {
          py::gil_scoped_release release;
          record = RunAttackExperiment(c);
          if (out_dir) record.artifacts = EmitReport(record, *out_dir);
        }
        return RecordDict(record);
      },
      py::arg("config_text"), py::arg("out_dir") = std::nullopt);
  m.def(
      "run_transfer",
      [](const std::string& config_text, const std::vector<std::string>& paths,
         std::size_t n_unknown) {
        const ExperimentConfig c = ParseConfig(config_text);
        std::vector<PreparedVariables> prepared;
        for (const auto& p : paths) prepared.push_back(LoadPrepared(p));
        py::gil_scoped_release release;
        RunRecord record = RunTransferability(c, std::move(prepared), n_unknown);
        py::gil_scoped_acquire acquire;
        return RecordDict(record);
      },
      py::arg("config_text"), py::arg("prepared_paths"), py::arg("n_unknown"));
  m.def("shadow_training_count", &ShadowTrainingCount);
}
