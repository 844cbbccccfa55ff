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
#ifndef SGG_CONFIG_H_
#define SGG_CONFIG_H_

// Run configuration: built-in defaults, overlaid by a JSON file, overlaid by
// "section.key=value" assignments. Every key must exist in the defaults.

#include <cstdint>
#include <string>
#include <vector>

#include "eval.h"
#include "gradcheck_suite.h"
#include "json_util.h"
#include "model.h"
#include "synthetic.h"
#include "trainer.h"

namespace sgg {

struct Paths {
  std::string corpus = "corpus";
  std::string weights = "weights.json";
  std::string loss_csv = "loss.csv";
  std::string report = "report";  // writes <report>.json and <report>.txt
  std::string predictions;        // optional predictions JSONL
  std::string attention_dir = "attention";
};

struct RunConfig {
  uint64_t seed = 1;
  size_t threads = 1;
  double train_fraction = 0.7;
  GenConfig gen;
  ModelConfig model;  // class counts and feature widths come from the corpus
  TrainConfig train;
  EvalOptions eval;
  GradcheckConfig gradcheck;
  std::string image_id;
  Paths paths;
  Json effective;
};

Json DefaultConfigJson();

// Recursively overlays `overlay` on `base`; keys absent from `base` are
// rejected with ConfigError.
Json MergeConfig(Json base, const Json& overlay);

// "train.lr=0.01". The value is parsed as JSON when possible, otherwise kept
// as a string.
void ApplyAssignment(Json& config, const std::string& assignment);

// Defaults + overlay (may be null) + assignments.
Json EffectiveConfig(const Json& overlay, const std::vector<std::string>& assignments);

// Validates every section and fills the typed views. `effective` must be a
// full config (see EffectiveConfig).
RunConfig ParseRunConfig(const Json& effective);

// Seed used to split a corpus into train and test parts.
uint64_t SplitSeed(const RunConfig& config);

}  // namespace sgg

#endif  // SGG_CONFIG_H_
