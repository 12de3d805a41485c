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

#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "json.hpp"
#include "miaudit/attack_prep.h"
#include "miaudit/base64.h"
#include "miaudit/error.h"

namespace miaudit {
namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "mi-audit-prepared";

json StatsToJson(const GaussianStats& s) {
  return json{{"mu", s.mu}, {"sigma", s.sigma}, {"n_samples", s.n_samples}};
}

GaussianStats StatsFromJson(const json& j) {
  GaussianStats s;
  s.mu = j.at("mu").get<double>();
  s.sigma = j.at("sigma").get<double>();
  s.n_samples = j.at("n_samples").get<std::size_t>();
  return s;
}

std::vector<double> Doubles(const json& j) {
  return DecodeDoubles(j.get<std::string>());
}

PreparedVariables FromJson(const json& doc) {
  if (doc.at("format").get<std::string>() != kFormatTag) {
    throw ParseError(0, "not a prepared-variables file");
  }
  const int version = doc.at("version").get<int>();
  if (version != PreparedVariables::kFormatVersion) {
    throw ParseError(0, "unsupported prepared-variables version " +
                            std::to_string(version));
  }
  PreparedVariables p;
  p.attack = ParseAttackKind(doc.at("attack").get<std::string>());
  p.epsilon = doc.at("epsilon").get<double>();
  p.fgsm_steps = doc.at("fgsm_steps").get<std::size_t>();
  p.num_rounds = doc.at("num_rounds").get<std::size_t>();
  p.shadow_models_trained = doc.at("shadow_models_trained").get<std::size_t>();
  p.seed = doc.at("seed").get<std::uint64_t>();
  p.sample_shape = doc.at("sample_shape").get<std::vector<std::size_t>>();
  p.num_classes = doc.at("num_classes").get<int>();

  const json& bank = doc.at("noise_bank");
  p.noise_bank.sigma_noise = bank.at("sigma_noise").get<double>();
  p.noise_bank.seed = bank.at("seed").get<std::uint64_t>();
  for (const json& n : bank.at("noises")) {
    p.noise_bank.noises.push_back(Doubles(n));
  }
  const std::size_t dim = ShapeProduct(p.sample_shape);
  for (const auto& n : p.noise_bank.noises) {
    if (n.size() != dim) throw ParseError(0, "noise vector has wrong length");
  }

  for (const json& s : doc.at("subjects")) {
    SubjectRecord r;
    r.subject_index = s.at("subject_index").get<std::size_t>();
    r.population_index = s.at("population_index").get<std::size_t>();
    r.y = s.at("y").get<int>();
    r.x = Doubles(s.at("x"));
    r.delta_x = Doubles(s.at("delta_x"));
    if (r.x.size() != dim || r.delta_x.size() != dim) {
      throw ParseError(0, "subject tensor has wrong length");
    }
    r.nonmember_stats = StatsFromJson(s.at("nonmember_stats"));
    if (!s.at("member_stats").is_null()) {
      r.member_stats = StatsFromJson(s.at("member_stats"));
    }
    for (const json& l : s.at("noise_phis")) {
      r.noise_phis.push_back(
          NoiseLevelPhis{Doubles(l.at("nonmember")), Doubles(l.at("member"))});
    }
    if (r.noise_phis.size() != p.noise_bank.p()) {
      throw ParseError(0, "subject noise lists do not match the noise bank");
    }
    p.subjects.push_back(std::move(r));
  }
  return p;
}

}  // namespace

std::string SerializePrepared(const PreparedVariables& prepared) {
  json doc;
  doc["format"] = kFormatTag;
  doc["version"] = PreparedVariables::kFormatVersion;
  doc["attack"] = std::string(AttackName(prepared.attack));
  doc["epsilon"] = prepared.epsilon;
  doc["fgsm_steps"] = prepared.fgsm_steps;
  doc["num_rounds"] = prepared.num_rounds;
  doc["shadow_models_trained"] = prepared.shadow_models_trained;
  doc["seed"] = prepared.seed;
  doc["sample_shape"] = prepared.sample_shape;
  doc["num_classes"] = prepared.num_classes;
  json noises = json::array();
  for (const auto& n : prepared.noise_bank.noises) {
    noises.push_back(EncodeDoubles(n));
  }
  doc["noise_bank"] = json{{"sigma_noise", prepared.noise_bank.sigma_noise},
                           {"seed", prepared.noise_bank.seed},
                           {"p", prepared.noise_bank.p()},
                           {"noises", std::move(noises)}};
  json subjects = json::array();
  for (const SubjectRecord& r : prepared.subjects) {
    json s;
    s["subject_index"] = r.subject_index;
    s["population_index"] = r.population_index;
    s["y"] = r.y;
    s["x"] = EncodeDoubles(r.x);
    s["delta_x"] = EncodeDoubles(r.delta_x);
    s["nonmember_stats"] = StatsToJson(r.nonmember_stats);
    s["member_stats"] =
        r.member_stats ? StatsToJson(*r.member_stats) : json(nullptr);
    json levels = json::array();
    for (const NoiseLevelPhis& l : r.noise_phis) {
      levels.push_back(json{{"nonmember", EncodeDoubles(l.nonmember)},
                            {"member", EncodeDoubles(l.member)}});
    }
    s["noise_phis"] = std::move(levels);
    subjects.push_back(std::move(s));
  }
  doc["subjects"] = std::move(subjects);
  return doc.dump(1) + "\n";
}

PreparedVariables DeserializePrepared(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, std::string("malformed prepared JSON: ") +
                                 e.what());
  }
  try {
    return FromJson(doc);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("invalid prepared-variables file: ") +
                            e.what());
  }
}

void SavePrepared(const PreparedVariables& prepared,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << SerializePrepared(prepared);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

PreparedVariables LoadPrepared(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return DeserializePrepared(text);
}

}  // namespace miaudit
