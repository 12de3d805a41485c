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

#include "miaudit/config.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "miaudit/error.h"

namespace miaudit {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    const auto item = Trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

std::uint64_t ParseU64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kConfig,
                "expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

double ParseDouble(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kConfig,
                "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

// Shortest text that parses back to the same double.
std::string FormatDouble(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T, typename F>
std::string JoinList(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt(items[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> setters = {
      {"experiment.seed",
       [](ExperimentConfig& c, std::string_view v) { c.seed = ParseU64(v); }},
      {"experiment.out_dir",
       [](ExperimentConfig& c, std::string_view v) { c.out_dir = std::string(v); }},
      {"experiment.threads",
       [](ExperimentConfig& c, std::string_view v) { c.max_threads = ParseU64(v); }},
      {"experiment.attacks",
       [](ExperimentConfig& c, std::string_view v) {
         c.attacks.clear();
         for (const auto& a : SplitList(v)) c.attacks.push_back(ParseAttackKind(a));
       }},
      {"experiment.indicators",
       [](ExperimentConfig& c, std::string_view v) {
         c.indicators.clear();
         for (const auto& a : SplitList(v)) {
           c.indicators.push_back(ParseIndicatorKind(a));
         }
       }},
      {"experiment.pairs",
       [](ExperimentConfig& c, std::string_view v) {
         c.pairs.clear();
         for (const auto& item : SplitList(v)) {
           const auto colon = item.find(':');
           if (colon == std::string::npos) {
             throw Error(ErrorCode::kConfig,
                         "pair '" + item + "' is not attack:indicator");
           }
           c.pairs.emplace_back(
               ParseAttackKind(Trim(std::string_view(item).substr(0, colon))),
               ParseIndicatorKind(Trim(std::string_view(item).substr(colon + 1))));
         }
       }},
      {"experiment.k",
       [](ExperimentConfig& c, std::string_view v) { c.k = ParseU64(v); }},

      {"dataset.source",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "synthetic") {
           c.dataset.source = DataSource::kSynthetic;
         } else if (v == "idx") {
           c.dataset.source = DataSource::kIdx;
         } else {
           throw Error(ErrorCode::kConfig,
                       "dataset source must be synthetic or idx");
         }
       }},
      {"dataset.classes",
       [](ExperimentConfig& c, std::string_view v) {
         c.dataset.num_classes = static_cast<int>(ParseU64(v));
       }},
      {"dataset.dims",
       [](ExperimentConfig& c, std::string_view v) { c.dataset.dims = ParseU64(v); }},
      {"dataset.spread",
       [](ExperimentConfig& c, std::string_view v) {
         c.dataset.spread = ParseDouble(v);
       }},
      {"dataset.population",
       [](ExperimentConfig& c, std::string_view v) {
         c.dataset.population = ParseU64(v);
       }},
      {"dataset.test",
       [](ExperimentConfig& c, std::string_view v) { c.dataset.test = ParseU64(v); }},
      {"dataset.train_images",
       [](ExperimentConfig& c, std::string_view v) { c.dataset.train_images = v; }},
      {"dataset.train_labels",
       [](ExperimentConfig& c, std::string_view v) { c.dataset.train_labels = v; }},
      {"dataset.test_images",
       [](ExperimentConfig& c, std::string_view v) { c.dataset.test_images = v; }},
      {"dataset.test_labels",
       [](ExperimentConfig& c, std::string_view v) { c.dataset.test_labels = v; }},
      {"dataset.limit",
       [](ExperimentConfig& c, std::string_view v) { c.dataset.limit = ParseU64(v); }},
      {"dataset.test_limit",
       [](ExperimentConfig& c, std::string_view v) {
         c.dataset.test_limit = ParseU64(v);
       }},

      {"model.input_shape",
       [](ExperimentConfig& c, std::string_view v) {
         c.model.input_shape.clear();
         for (const auto& d : SplitList(v)) c.model.input_shape.push_back(ParseU64(d));
       }},
      {"model.layers",
       [](ExperimentConfig& c, std::string_view v) {
         c.model.layers = ParseLayers(v);
       }},

      {"train.epochs",
       [](ExperimentConfig& c, std::string_view v) { c.train.epochs = ParseU64(v); }},
      {"train.batch_size",
       [](ExperimentConfig& c, std::string_view v) {
         c.train.batch_size = ParseU64(v);
       }},
      {"train.learning_rate",
       [](ExperimentConfig& c, std::string_view v) {
         c.train.learning_rate = ParseDouble(v);
       }},
      {"train.l2_lambda",
       [](ExperimentConfig& c, std::string_view v) {
         c.train.l2_lambda = ParseDouble(v);
       }},

      {"attack.shadows",
       [](ExperimentConfig& c, std::string_view v) { c.num_rounds = ParseU64(v); }},
      {"attack.epsilon",
       [](ExperimentConfig& c, std::string_view v) { c.epsilon = ParseDouble(v); }},
      {"attack.fgsm_steps",
       [](ExperimentConfig& c, std::string_view v) { c.fgsm_steps = ParseU64(v); }},
      {"attack.noise_count",
       [](ExperimentConfig& c, std::string_view v) { c.noise_count = ParseU64(v); }},
      {"attack.sigma_noise",
       [](ExperimentConfig& c, std::string_view v) {
         c.sigma_noise = ParseDouble(v);
       }},
      {"attack.z",
       [](ExperimentConfig& c, std::string_view v) { c.z = ParseU64(v); }},
      {"attack.max_member_shadows",
       [](ExperimentConfig& c, std::string_view v) {
         c.max_member_shadows = ParseU64(v);
       }},

      {"transfer.n_unknown",
       [](ExperimentConfig& c, std::string_view v) { c.n_unknown = ParseU64(v); }},

      {"dp.clip_norm",
       [](ExperimentConfig& c, std::string_view v) {
         c.dp.clip_norm = ParseDouble(v);
       }},
      {"dp.noise_multiplier",
       [](ExperimentConfig& c, std::string_view v) {
         c.dp.noise_multiplier = ParseDouble(v);
       }},
      {"dp.n_unknown",
       [](ExperimentConfig& c, std::string_view v) {
         c.dp.n_unknown = ParseU64(v);
       }},
      {"dp.budget_epsilon",
       [](ExperimentConfig& c, std::string_view v) {
         c.dp.budget_epsilon = ParseDouble(v);
       }},
      {"dp.budget_delta",
       [](ExperimentConfig& c, std::string_view v) {
         c.dp.budget_delta = ParseDouble(v);
       }},
  };
  return setters;
}

void FillModelDefaults(ExperimentConfig& c) {
  if (c.model.input_shape.empty() && c.dataset.source == DataSource::kSynthetic) {
    c.model.input_shape = {c.dataset.dims};
  }
  if (c.model.layers.empty() && c.dataset.source == DataSource::kSynthetic) {
    const std::size_t hidden = 64;
    const auto m = static_cast<std::size_t>(c.dataset.num_classes);
    c.model.layers = {DenseLayer{c.dataset.dims, hidden}, ReluLayer{},
                      DenseLayer{hidden, m}, SoftmaxOutputLayer{m}};
  }
}

}  // namespace

std::vector<std::pair<AttackKind, IndicatorKind>> ExperimentConfig::Pairs()
    const {
  if (!pairs.empty()) return pairs;
  std::vector<std::pair<AttackKind, IndicatorKind>> out;
  for (AttackKind a : attacks) {
    for (IndicatorKind i : indicators) out.emplace_back(a, i);
  }
  return out;
}

void ExperimentConfig::Validate() const {
  if (attacks.empty() && pairs.empty()) {
    throw Error(ErrorCode::kConfig, "attack list is empty");
  }
  if (pairs.empty() && indicators.empty()) {
    throw Error(ErrorCode::kConfig, "indicator list is empty");
  }
  for (const auto& [a, i] : Pairs()) CheckCompatible(a, i);
  for (const auto& [a, i] : pairs) {
    if (!attacks.empty() &&
        std::find(attacks.begin(), attacks.end(), a) == attacks.end()) {
      throw Error(ErrorCode::kConfig, "pair names attack " +
                                          std::string(AttackName(a)) +
                                          " that is not in the attack list");
    }
  }
  if (num_rounds < 2) throw Error(ErrorCode::kConfig, "shadows (N) must be >= 2");
  if (k == 0) throw Error(ErrorCode::kConfig, "k must be >= 1");
  for (const auto& [a, i] : Pairs()) {
    if (UsesPerturbation(a) && k < 2) {
      throw Error(ErrorCode::kConfig, "paired attacks need k >= 2");
    }
    if (a == AttackKind::kNLira && k * num_rounds > max_member_shadows) {
      throw Error(ErrorCode::kConfig,
                  "n-LiRA would train " + std::to_string(k * num_rounds) +
                      " member shadows, above max_member_shadows");
    }
    if (i == IndicatorKind::kLrO && (z == 0 || z > noise_count)) {
      throw Error(ErrorCode::kConfig, "z must lie in [1, noise_count]");
    }
  }
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::kConfig, "epsilon must be >= 0");
  if (fgsm_steps == 0) throw Error(ErrorCode::kConfig, "fgsm_steps must be >= 1");
  if (noise_count == 0) throw Error(ErrorCode::kConfig, "noise_count must be >= 1");
  if (!(sigma_noise >= 0.0)) {
    throw Error(ErrorCode::kConfig, "sigma_noise must be >= 0");
  }
  if (dataset.source == DataSource::kSynthetic) {
    if (dataset.num_classes < 2) {
      throw Error(ErrorCode::kConfig, "synthetic data needs >= 2 classes");
    }
    if (dataset.dims == 0 || dataset.population < 4 || dataset.test == 0) {
      throw Error(ErrorCode::kConfig, "synthetic dataset sizes are too small");
    }
    if (!(dataset.spread >= 0.0)) {
      throw Error(ErrorCode::kConfig, "spread must be >= 0");
    }
  } else if (dataset.train_images.empty() || dataset.train_labels.empty() ||
             dataset.test_images.empty() || dataset.test_labels.empty()) {
    throw Error(ErrorCode::kConfig, "idx source needs all four file names");
  }
  model.Validate();
  if (dataset.source == DataSource::kSynthetic &&
      (model.InputSize() != dataset.dims ||
       model.NumClasses() != static_cast<std::size_t>(dataset.num_classes))) {
    throw Error(ErrorCode::kConfig, "model shape does not match the dataset");
  }
  if (train.batch_size == 0 || train.epochs == 0 ||
      !(train.learning_rate > 0.0) || !(train.l2_lambda >= 0.0)) {
    throw Error(ErrorCode::kConfig, "invalid train settings");
  }
  if (!(dp.clip_norm > 0.0) || !(dp.noise_multiplier >= 0.0)) {
    throw Error(ErrorCode::kConfig, "invalid dp settings");
  }
}

PrepareOptions ExperimentConfig::MakePrepareOptions() const {
  PrepareOptions o;
  o.num_rounds = num_rounds;
  o.shadow_spec = model;
  o.shadow_train = train;
  o.epsilon = epsilon;
  o.fgsm_steps = fgsm_steps;
  o.noise_count = noise_count;
  o.sigma_noise = sigma_noise;
  o.max_member_shadows = max_member_shadows;
  o.seed = seed;
  o.max_threads = max_threads;
  return o;
}

ExperimentConfig ParseConfig(std::string_view text) {
  ExperimentConfig c;
  std::string section;
  std::set<std::string> seen;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (offset <= text.size()) {
    auto end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    const std::size_t line_start = offset;
    offset = end + 1;
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError(line_start, where + "unterminated section header");
      }
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(line_start, where + "expected key = value");
    }
    if (section.empty()) {
      throw ParseError(line_start, where + "key outside any section");
    }
    const std::string key = section + "." + std::string(Trim(line.substr(0, eq)));
    const auto it = Setters().find(key);
    if (it == Setters().end()) {
      throw ParseError(line_start, where + "unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ParseError(line_start, where + "duplicate key '" + key + "'");
    }
    try {
      it->second(c, Trim(line.substr(eq + 1)));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_start, where + e.what());
    }
  }
  FillModelDefaults(c);
  return c;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return ParseConfig(text);
}

std::string FormatConfig(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[experiment]\n";
  o << "seed = " << c.seed << "\n";
  o << "out_dir = " << c.out_dir.string() << "\n";
  o << "threads = " << c.max_threads << "\n";
  o << "attacks = "
    << JoinList(c.attacks, [](AttackKind a) { return std::string(AttackName(a)); })
    << "\n";
  o << "indicators = "
    << JoinList(c.indicators,
                [](IndicatorKind i) { return std::string(IndicatorName(i)); })
    << "\n";
  if (!c.pairs.empty()) {
    o << "pairs = "
      << JoinList(c.pairs,
                  [](const std::pair<AttackKind, IndicatorKind>& p) {
                    return std::string(AttackName(p.first)) + ":" +
                           std::string(IndicatorName(p.second));
                  })
      << "\n";
  }
  o << "k = " << c.k << "\n\n";

  const DatasetConfig& d = c.dataset;
  o << "[dataset]\n";
  if (d.source == DataSource::kSynthetic) {
    o << "source = synthetic\n";
    o << "classes = " << d.num_classes << "\n";
    o << "dims = " << d.dims << "\n";
    o << "spread = " << FormatDouble(d.spread) << "\n";
    o << "population = " << d.population << "\n";
    o << "test = " << d.test << "\n";
  } else {
    o << "source = idx\n";
    o << "train_images = " << d.train_images << "\n";
    o << "train_labels = " << d.train_labels << "\n";
    o << "test_images = " << d.test_images << "\n";
    o << "test_labels = " << d.test_labels << "\n";
    if (d.limit) o << "limit = " << *d.limit << "\n";
    if (d.test_limit) o << "test_limit = " << *d.test_limit << "\n";
  }
  o << "\n[model]\n";
  o << "input_shape = "
    << JoinList(c.model.input_shape, [](std::size_t v) { return std::to_string(v); })
    << "\n";
  o << "layers = " << c.model.LayersToString() << "\n\n";

  o << "[train]\n";
  o << "epochs = " << c.train.epochs << "\n";
  o << "batch_size = " << c.train.batch_size << "\n";
  o << "learning_rate = " << FormatDouble(c.train.learning_rate) << "\n";
  o << "l2_lambda = " << FormatDouble(c.train.l2_lambda) << "\n\n";

  o << "[attack]\n";
  o << "shadows = " << c.num_rounds << "\n";
  o << "epsilon = " << FormatDouble(c.epsilon) << "\n";
  o << "fgsm_steps = " << c.fgsm_steps << "\n";
  o << "noise_count = " << c.noise_count << "\n";
  o << "sigma_noise = " << FormatDouble(c.sigma_noise) << "\n";
  o << "z = " << c.z << "\n";
  o << "max_member_shadows = " << c.max_member_shadows << "\n\n";

  o << "[transfer]\n";
  o << "n_unknown = " << c.n_unknown << "\n\n";

  o << "[dp]\n";
  o << "clip_norm = " << FormatDouble(c.dp.clip_norm) << "\n";
  o << "noise_multiplier = " << FormatDouble(c.dp.noise_multiplier) << "\n";
  o << "n_unknown = " << c.dp.n_unknown << "\n";
  o << "budget_epsilon = " << FormatDouble(c.dp.budget_epsilon) << "\n";
  o << "budget_delta = " << FormatDouble(c.dp.budget_delta) << "\n";
  return o.str();
}

}  // namespace miaudit
