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
#ifndef SGG_TRAINER_H_
#define SGG_TRAINER_H_

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "corpus.h"
#include "model.h"

namespace sgg {

struct TrainConfig {
  double lr = 1e-3;
  double momentum = 0.9;
  size_t batch_size = 6;
  size_t epochs = 50;
  double bg_fg_ratio = 3.0;
  double mu = 4.0;
  // Global-norm gradient clip; 0 disables it.
  double clip_norm = 10.0;
  uint64_t seed = 1;
  size_t threads = 1;
};

void ValidateTrainConfig(const TrainConfig& config);
Json TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const Json& j, TrainConfig base = {});

// Every related ordered pair (labelled with its lowest predicate id) plus up
// to floor(ratio * positives) background pairs drawn without replacement.
std::vector<LabeledPair> SamplePairs(const SceneGraph& graph, double ratio, std::mt19937_64& rng);

// Every ordered pair, labelled like SamplePairs but with no sampling.
std::vector<LabeledPair> AllLabeledPairs(const SceneGraph& graph);

// Ordered pairs (i, j), i != j, whose boxes share positive area.
std::vector<std::pair<size_t, size_t>> OverlapFilter(const std::vector<BBox>& boxes);

// One velocity buffer per parameter matrix.
struct OptimizerState {
  ModelParams velocity;
};

OptimizerState InitOptimizer(const ModelParams& params);

// v <- m v - lr g;  p <- p + v
void MomentumStep(ModelParams& params, OptimizerState& state, const ModelParams& grads,
                  double lr, double momentum);

// Rescales `grads` to the given global norm when it is exceeded. Returns the
// norm before clipping.
double ClipGlobalNorm(ModelParams& grads, double max_norm);

struct EpochLoss {
  size_t epoch = 0;  // 1-based
  double obj_loss = 0.0;
  double rel_loss = 0.0;
  double total = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLoss> curve;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

// Trains on every image of `corpus` with priors counted from the same corpus.
// Throws NumericalError naming the epoch if the loss or weights stop being
// finite.
TrainResult Train(const Corpus& corpus, ModelParams params, const ModelConfig& model_config,
                  const TrainConfig& config, const EpochCallback& on_epoch = nullptr);

std::string LossCurveCsv(const std::vector<EpochLoss>& curve);

}  // namespace sgg

#endif  // SGG_TRAINER_H_
