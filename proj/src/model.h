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
#ifndef SGG_MODEL_H_
#define SGG_MODEL_H_

// Full pipeline for one image: DMP refines node features, a linear
// classifier scores object classes, and ARM scores predicates per pair.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "arm.h"
#include "graph.h"
#include "json_util.h"
#include "loss.h"
#include "message_passing.h"

namespace sgg {

struct ModelConfig {
  int num_object_classes = 6;
  int num_predicate_classes = 5;
  size_t feature_dim = 32;
  size_t union_dim = 32;
  size_t hidden_dim = 8;  // d/4 at the default width
  size_t fusion_dim = 64;
  bool stacked = true;
  PriorMode prior_mode = PriorMode::kAdaptive;
};

void ValidateModelConfig(const ModelConfig& config);
Json ModelConfigToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const Json& j, ModelConfig base = {});

struct ModelParams {
  DMPParams dmp;
  Mat obj_cls;  // O x d
  ARMParams arm;

  // "dmp.W_s", ..., "obj_cls", "arm.W_p", ... in a fixed order.
  std::vector<std::pair<std::string, Mat*>> Named();
  std::vector<std::pair<std::string, const Mat*>> Named() const;
};

ModelParams InitModel(const ModelConfig& config, std::mt19937_64& rng);
ModelParams ZerosLike(const ModelParams& p);
// Throws ConfigError when a matrix does not have the shape the config implies.
void CheckShapes(const ModelParams& p, const ModelConfig& config);
double GlobalNorm(const ModelParams& p);
void Scale(ModelParams& p, double s);
// a += s * b
void AddScaled(ModelParams& a, const ModelParams& b, double s);

// An ordered pair with its training label (0 = background).
struct LabeledPair {
  size_t subject = 0;
  size_t object = 0;
  int label = kBackgroundPredicate;
};

struct ImageForward {
  Mat z;           // n x d
  Mat attention;   // n x n
  Mat obj_logits;  // n x O
  DmpCache dmp_cache;
};

ImageForward ForwardNodes(const ModelParams& params, const ModelConfig& config, const Mat& x,
                          const UnionFeatures& u);

// Prior term for the configured mode (softened, raw log, or empty).
Vec PriorTerm(const FrequencyPrior& prior, PriorMode mode, int subject_class, int object_class);

// Predicate distribution of one ordered pair given refined features.
Vec PairDistribution(const ModelParams& params, const ModelConfig& config,
                     const FrequencyPrior& prior, const ImageForward& fwd,
                     const UnionFeatures& u, size_t i, size_t j, int subject_class,
                     int object_class);

struct ImageLoss {
  double obj_loss = 0.0;
  double rel_loss = 0.0;
  double total() const { return obj_loss + rel_loss; }
};

// Mean NPS loss over nodes (ground-truth classes and priorities) plus mean
// cross-entropy over `pairs`. When `grads` is given, d total / d params is
// accumulated into it.
ImageLoss ImageLossAndGrad(const ModelParams& params, const ModelConfig& config,
                           const FrequencyPrior& prior, const SceneGraph& graph, const Mat& x,
                           const UnionFeatures& u, const std::vector<LabeledPair>& pairs,
                           const LossConfig& loss_config, ModelParams* grads);

// Weights file: {"format", "config", "seed", "params": {name: Mat}}.
Json WeightsToJson(const ModelParams& params, const ModelConfig& config, uint64_t seed);
std::pair<ModelParams, ModelConfig> WeightsFromJson(const Json& j);

}  // namespace sgg

#endif  // SGG_MODEL_H_
