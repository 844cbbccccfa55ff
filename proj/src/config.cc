/* Copyright 2026 The sgg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "config.h"

#include "errors.h"
#include "seed.h"

namespace sgg {
namespace {

Json Without(Json j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) j.erase(k);
  return j;
}

Json ModelSectionJson(const ModelConfig& c) {
  return Json{{"hidden_dim", c.hidden_dim},
              {"fusion_dim", c.fusion_dim},
              {"stacked", c.stacked},
              {"prior_mode", PriorModeName(c.prior_mode)}};
}

void MergeInto(Json& base, const Json& overlay, const std::string& prefix) {
  if (!overlay.is_object()) throw ConfigError("config: '" + prefix + "' must be an object");
  for (const auto& [key, value] : overlay.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
    Json& slot = base[key];
    if (slot.is_object()) {
      MergeInto(slot, value, path);
    } else {
      if (value.is_object() || value.is_null()) {
        throw ConfigError("config: '" + path + "' expects a " + std::string(slot.type_name()));
      }
      slot = value;
    }
  }
}

}  // namespace

Json DefaultConfigJson() {
  const Paths paths;
  return Json{
      {"seed", 1},
      {"threads", 1},
      {"train_fraction", 0.7},
      {"image_id", ""},
      {"gen", Without(GenConfigToJson(GenConfig{}), {"seed"})},
      {"model", ModelSectionJson(ModelConfig{})},
      {"train", Without(TrainConfigToJson(TrainConfig{}), {"seed", "threads"})},
      {"eval", EvalOptionsToJson(EvalOptions{})},
      {"gradcheck", GradcheckConfigToJson(GradcheckConfig{})},
      {"paths",
       {{"corpus", paths.corpus},
        {"weights", paths.weights},
        {"loss_csv", paths.loss_csv},
        {"report", paths.report},
        {"predictions", paths.predictions},
        {"attention_dir", paths.attention_dir}}},
  };
}

Json MergeConfig(Json base, const Json& overlay) {
  if (overlay.is_null()) return base;
  MergeInto(base, overlay, "");
  return base;
}

void ApplyAssignment(Json& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("config: override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json* slot = &config;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!slot->is_object() || !slot->contains(part)) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
    slot = &(*slot)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (slot->is_object()) throw ConfigError("config: '" + key + "' is a section, not a value");
  if (slot->is_string()) {
    *slot = text;
    return;
  }
  try {
    Json value = Json::parse(text);
    if (value.is_object() || value.is_null()) throw ConfigError("");
    *slot = std::move(value);
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse value '" + text + "' for '" + key + "'");
  }
}

Json EffectiveConfig(const Json& overlay, const std::vector<std::string>& assignments) {
  Json cfg = MergeConfig(DefaultConfigJson(), overlay);
  for (const std::string& a : assignments) ApplyAssignment(cfg, a);
  ParseRunConfig(cfg);
  return cfg;
}

RunConfig ParseRunConfig(const Json& j) {
  RunConfig c;
  try {
    c.seed = j.at("seed").get<uint64_t>();
    c.threads = j.at("threads").get<size_t>();
    c.train_fraction = j.at("train_fraction").get<double>();
    c.image_id = j.at("image_id").get<std::string>();
    const Json& p = j.at("paths");
    c.paths.corpus = p.at("corpus").get<std::string>();
    c.paths.weights = p.at("weights").get<std::string>();
    c.paths.loss_csv = p.at("loss_csv").get<std::string>();
    c.paths.report = p.at("report").get<std::string>();
    c.paths.predictions = p.at("predictions").get<std::string>();
    c.paths.attention_dir = p.at("attention_dir").get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.threads == 0) throw ConfigError("config: threads must be positive");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw ConfigError("config: train_fraction must lie in (0, 1)");
  }
  c.gen = GenConfigFromJson(j.at("gen"));
  c.gen.seed = c.seed;
  ValidateGenConfig(c.gen);

  c.model = ModelConfigFromJson(j.at("model"));
  c.model.num_object_classes = c.gen.num_object_classes;
  c.model.num_predicate_classes = c.gen.num_predicate_classes;
  c.model.feature_dim = c.gen.feature_dim;
  c.model.union_dim = c.gen.union_dim;

  c.train = TrainConfigFromJson(j.at("train"));
  c.train.seed = c.seed;
  c.train.threads = c.threads;
  ValidateTrainConfig(c.train);

  c.eval = EvalOptionsFromJson(j.at("eval"));
  c.gradcheck = GradcheckConfigFromJson(j.at("gradcheck"));
  c.gradcheck.seed = c.seed;
  ValidateGradcheckConfig(c.gradcheck);
  c.effective = j;
  return c;
}

uint64_t SplitSeed(const RunConfig& config) { return DeriveSeed(config.seed, SeedTag::kSplit); }

}  // namespace sgg
