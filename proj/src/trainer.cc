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
#include "trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <thread>

#include "errors.h"
#include "seed.h"

namespace sgg {

void ValidateTrainConfig(const TrainConfig& c) {
  if (!(c.lr >= 0.0) || !std::isfinite(c.lr)) throw ConfigError("train: lr must be >= 0");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) {
    throw ConfigError("train: momentum must lie in [0, 1)");
  }
  if (c.batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (!(c.bg_fg_ratio >= 0.0) || !std::isfinite(c.bg_fg_ratio)) {
    throw ConfigError("train: bg_fg_ratio must be >= 0");
  }
  if (!(c.mu > 0.0) || !std::isfinite(c.mu)) throw ConfigError("train: mu must be > 0");
  if (!(c.clip_norm >= 0.0)) throw ConfigError("train: clip_norm must be >= 0");
  if (c.threads == 0) throw ConfigError("train: threads must be positive");
}

Json TrainConfigToJson(const TrainConfig& c) {
  return Json{{"lr", c.lr},
              {"momentum", c.momentum},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"bg_fg_ratio", c.bg_fg_ratio},
              {"mu", c.mu},
              {"clip_norm", c.clip_norm},
              {"seed", c.seed},
              {"threads", c.threads}};
}

TrainConfig TrainConfigFromJson(const Json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("train: expected a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "lr") {
        c.lr = value.get<double>();
      } else if (key == "momentum") {
        c.momentum = value.get<double>();
      } else if (key == "batch_size") {
        c.batch_size = value.get<size_t>();
      } else if (key == "epochs") {
        c.epochs = value.get<size_t>();
      } else if (key == "bg_fg_ratio") {
        c.bg_fg_ratio = value.get<double>();
      } else if (key == "mu") {
        c.mu = value.get<double>();
      } else if (key == "clip_norm") {
        c.clip_norm = value.get<double>();
      } else if (key == "seed") {
        c.seed = value.get<uint64_t>();
      } else if (key == "threads") {
        c.threads = value.get<size_t>();
      } else {
        throw ConfigError("train: unknown key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return c;
}

std::vector<LabeledPair> SamplePairs(const SceneGraph& graph, double ratio,
                                     std::mt19937_64& rng) {
  const size_t n = graph.nodes.size();
  std::map<std::pair<size_t, size_t>, int> positive;
  for (const Triplet& t : graph.triplets) {
    auto [it, inserted] = positive.emplace(std::make_pair(t.subject, t.object), t.predicate);
    if (!inserted) it->second = std::min(it->second, t.predicate);
  }
  std::vector<LabeledPair> out;
  for (const auto& [pair, label] : positive) out.push_back({pair.first, pair.second, label});

  std::vector<LabeledPair> background;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i != j && !positive.count({i, j})) background.push_back({i, j, kBackgroundPredicate});
    }
  }
  const size_t want = static_cast<size_t>(std::floor(ratio * static_cast<double>(out.size())));
  const size_t take = std::min(want, background.size());
  std::shuffle(background.begin(), background.end(), rng);
  out.insert(out.end(), background.begin(), background.begin() + static_cast<long>(take));
  return out;
}

std::vector<LabeledPair> AllLabeledPairs(const SceneGraph& graph) {
  const size_t n = graph.nodes.size();
  std::map<std::pair<size_t, size_t>, int> labels;
  for (const Triplet& t : graph.triplets) {
    auto [it, inserted] = labels.emplace(std::make_pair(t.subject, t.object), t.predicate);
    if (!inserted) it->second = std::min(it->second, t.predicate);
  }
  std::vector<LabeledPair> out;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      auto it = labels.find({i, j});
      out.push_back({i, j, it == labels.end() ? kBackgroundPredicate : it->second});
    }
  }
  return out;
}

std::vector<std::pair<size_t, size_t>> OverlapFilter(const std::vector<BBox>& boxes) {
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t i = 0; i < boxes.size(); ++i) {
    for (size_t j = 0; j < boxes.size(); ++j) {
      if (i != j && IntersectionArea(boxes[i], boxes[j]) > 0.0) out.emplace_back(i, j);
    }
  }
  return out;
}

OptimizerState InitOptimizer(const ModelParams& params) { return {ZerosLike(params)}; }

void MomentumStep(ModelParams& params, OptimizerState& state, const ModelParams& grads,
                  double lr, double momentum) {
  auto p = params.Named();
  auto v = state.velocity.Named();
  const auto g = grads.Named();
  for (size_t k = 0; k < p.size(); ++k) {
    auto pv = p[k].second->data();
    auto vv = v[k].second->data();
    const auto gv = g[k].second->data();
    for (size_t e = 0; e < pv.size(); ++e) {
      vv[e] = momentum * vv[e] - lr * gv[e];
      pv[e] += vv[e];
    }
  }
}

double ClipGlobalNorm(ModelParams& grads, double max_norm) {
  const double norm = GlobalNorm(grads);
  if (max_norm > 0.0 && norm > max_norm) Scale(grads, max_norm / norm);
  return norm;
}

TrainResult Train(const Corpus& corpus, ModelParams params, const ModelConfig& model_config,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  ValidateTrainConfig(config);
  CheckShapes(params, model_config);
  if (corpus.num_object_classes != model_config.num_object_classes ||
      corpus.num_predicate_classes != model_config.num_predicate_classes ||
      corpus.feature_dim != model_config.feature_dim ||
      corpus.union_dim != model_config.union_dim) {
    throw ConfigError("train: corpus dimensions do not match the model config");
  }
  if (corpus.size() == 0) throw DataError("train: empty corpus");
  const FrequencyPrior prior = BuildFrequencyPrior(
      corpus.graphs, corpus.num_object_classes, corpus.num_predicate_classes);
  const LossConfig loss_config{config.mu};
  OptimizerState state = InitOptimizer(params);
  const size_t n_images = corpus.size();

  TrainResult result;
  std::vector<size_t> order(n_images);
  for (size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(DeriveSeed(config.seed, SeedTag::kShuffle, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochLoss row;
    row.epoch = epoch;
    for (size_t start = 0; start < n_images; start += config.batch_size) {
      const size_t end = std::min(n_images, start + config.batch_size);
      const size_t count = end - start;
      std::vector<ModelParams> grads(count);
      std::vector<ImageLoss> losses(count);
      auto work = [&](size_t slot) {
        const size_t img = order[start + slot];
        std::mt19937_64 pair_rng(
            DeriveSeed(config.seed, SeedTag::kPairs, (epoch - 1) * n_images + img));
        const auto pairs = SamplePairs(corpus.graphs[img], config.bg_fg_ratio, pair_rng);
        grads[slot] = ZerosLike(params);
        losses[slot] = ImageLossAndGrad(params, model_config, prior, corpus.graphs[img],
                                        corpus.features[img].x, corpus.features[img].u, pairs,
                                        loss_config, &grads[slot]);
      };
      const size_t workers = std::min(config.threads, count);
      if (workers <= 1) {
        for (size_t s = 0; s < count; ++s) work(s);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              for (size_t s = w; s < count; s += workers) work(s);
            } catch (...) {
              errors[w] = std::current_exception();
            }
          });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
          if (e) std::rethrow_exception(e);
        }
      }
      // Ordered reduction keeps runs reproducible across thread counts.
      ModelParams total = std::move(grads[0]);
      for (size_t s = 1; s < count; ++s) AddScaled(total, grads[s], 1.0);
      Scale(total, 1.0 / static_cast<double>(count));
      for (const ImageLoss& l : losses) {
        row.obj_loss += l.obj_loss;
        row.rel_loss += l.rel_loss;
      }
      const double norm = ClipGlobalNorm(total, config.clip_norm);
      if (!std::isfinite(norm)) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                             ": non-finite gradient");
      }
      MomentumStep(params, state, total, config.lr, config.momentum);
    }
    row.obj_loss /= static_cast<double>(n_images);
    row.rel_loss /= static_cast<double>(n_images);
    row.total = row.obj_loss + row.rel_loss;
    if (!std::isfinite(row.total)) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                           ": loss is not finite");
    }
    result.curve.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  result.params = std::move(params);
  return result;
}

std::string LossCurveCsv(const std::vector<EpochLoss>& curve) {
  std::string out = "epoch,obj_loss,rel_loss,total\n";
  char buf[128];
  for (const EpochLoss& e : curve) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", e.epoch, e.obj_loss, e.rel_loss,
                  e.total);
    out += buf;
  }
  return out;
}

}  // namespace sgg
