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
#include "model.h"

#include <cmath>

#include "errors.h"

namespace sgg {
namespace {

void RequireShape(const Mat& m, size_t rows, size_t cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError("weights: " + name + " has shape " + m.ShapeString() + " but the config " +
                      "implies " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

constexpr const char* kWeightsFormat = "sgg-weights-v1";

}  // namespace

void ValidateModelConfig(const ModelConfig& c) {
  if (c.num_object_classes < 2) throw ConfigError("model: num_object_classes must be >= 2");
  if (c.num_predicate_classes < 2) throw ConfigError("model: num_predicate_classes must be >= 2");
  if (c.feature_dim == 0 || c.union_dim == 0 || c.hidden_dim == 0 || c.fusion_dim == 0) {
    throw ConfigError("model: all dimensions must be positive");
  }
  if (c.stacked && c.feature_dim % 2 != 0) {
    throw ConfigError("model: stacked message passing needs an even feature_dim");
  }
}

Json ModelConfigToJson(const ModelConfig& c) {
  return Json{{"num_object_classes", c.num_object_classes},
              {"num_predicate_classes", c.num_predicate_classes},
              {"feature_dim", c.feature_dim},
              {"union_dim", c.union_dim},
              {"hidden_dim", c.hidden_dim},
              {"fusion_dim", c.fusion_dim},
              {"stacked", c.stacked},
              {"prior_mode", PriorModeName(c.prior_mode)}};
}

ModelConfig ModelConfigFromJson(const Json& j, ModelConfig c) {
  if (!j.is_object()) throw ConfigError("model: expected a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "num_object_classes") {
        c.num_object_classes = value.get<int>();
      } else if (key == "num_predicate_classes") {
        c.num_predicate_classes = value.get<int>();
      } else if (key == "feature_dim") {
        c.feature_dim = value.get<size_t>();
      } else if (key == "union_dim") {
        c.union_dim = value.get<size_t>();
      } else if (key == "hidden_dim") {
        c.hidden_dim = value.get<size_t>();
      } else if (key == "fusion_dim") {
        c.fusion_dim = value.get<size_t>();
      } else if (key == "stacked") {
        c.stacked = value.get<bool>();
      } else if (key == "prior_mode") {
        c.prior_mode = ParsePriorMode(value.get<std::string>());
      } else {
        throw ConfigError("model: unknown key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return c;
}

std::vector<std::pair<std::string, Mat*>> ModelParams::Named() {
  std::vector<std::pair<std::string, Mat*>> out;
  for (auto& [name, m] : dmp.Named()) out.emplace_back("dmp." + name, m);
  out.emplace_back("obj_cls", &obj_cls);
  for (auto& [name, m] : arm.Named()) out.emplace_back("arm." + name, m);
  return out;
}

std::vector<std::pair<std::string, const Mat*>> ModelParams::Named() const {
  std::vector<std::pair<std::string, const Mat*>> out;
  for (auto& [name, m] : const_cast<ModelParams*>(this)->Named()) out.emplace_back(name, m);
  return out;
}

ModelParams InitModel(const ModelConfig& c, std::mt19937_64& rng) {
  ValidateModelConfig(c);
  ModelParams p;
  p.dmp = InitDMP(c.feature_dim, c.union_dim, c.hidden_dim, c.stacked, rng);
  p.obj_cls = UniformInit(static_cast<size_t>(c.num_object_classes), c.feature_dim, rng);
  p.arm = InitARM(static_cast<size_t>(c.num_predicate_classes), c.feature_dim, c.union_dim,
                  c.fusion_dim, rng);
  return p;
}

ModelParams ZerosLike(const ModelParams& p) {
  ModelParams z = p;
  for (auto& [name, m] : z.Named()) m->Fill(0.0);
  return z;
}

void CheckShapes(const ModelParams& p, const ModelConfig& c) {
  ValidateModelConfig(c);
  const size_t d = c.feature_dim;
  const size_t du = c.union_dim;
  const size_t h = c.hidden_dim;
  const size_t f = c.fusion_dim;
  const size_t o = static_cast<size_t>(c.num_object_classes);
  const size_t r = static_cast<size_t>(c.num_predicate_classes);
  if (p.dmp.stacked != c.stacked) throw ConfigError("weights: stacking disagrees with config");
  RequireShape(p.dmp.w_s, d, d, "dmp.W_s");
  RequireShape(p.dmp.w_o, d, d, "dmp.W_o");
  RequireShape(p.dmp.w_u, d, du, "dmp.W_u");
  RequireShape(p.dmp.w_e, d, 1, "dmp.w_e");
  RequireShape(p.dmp.w_t3, c.stacked ? d / 2 : d, d, "dmp.W_t3");
  RequireShape(p.dmp.w_t2, h, d, "dmp.W_t2");
  RequireShape(p.dmp.w_t1, d, h, "dmp.W_t1");
  RequireShape(p.dmp.ln_gain, h, 1, "dmp.ln_gain");
  RequireShape(p.dmp.ln_bias, h, 1, "dmp.ln_bias");
  RequireShape(p.obj_cls, o, d, "obj_cls");
  RequireShape(p.arm.w_p, r, du, "arm.W_p");
  RequireShape(p.arm.w_r, r, f, "arm.W_r");
  RequireShape(p.arm.w_x1, f, d, "arm.W_x1");
  RequireShape(p.arm.w_y1, f, d, "arm.W_y1");
  RequireShape(p.arm.w_x2, f, f, "arm.W_x2");
  RequireShape(p.arm.w_y2, f, du, "arm.W_y2");
}

double GlobalNorm(const ModelParams& p) {
  double sq = 0.0;
  for (const auto& [name, m] : p.Named()) sq += SquaredNorm(m->data());
  return std::sqrt(sq);
}

void Scale(ModelParams& p, double s) {
  for (auto& [name, m] : p.Named()) *m *= s;
}

void AddScaled(ModelParams& a, const ModelParams& b, double s) {
  auto dst = a.Named();
  const auto src = b.Named();
  for (size_t k = 0; k < dst.size(); ++k) Axpy(s, src[k].second->data(), dst[k].second->data());
}

ImageForward ForwardNodes(const ModelParams& params, const ModelConfig& config, const Mat& x,
                          const UnionFeatures& u) {
  ImageForward out;
  MpOutput mp = config.stacked ? DmpForward(x, u, params.dmp, &out.dmp_cache)
                               : NoStackForward(x, u, params.dmp, &out.dmp_cache);
  out.z = std::move(mp.z);
  out.attention = std::move(mp.attention);
  out.obj_logits = MatMul(out.z, params.obj_cls.Transposed());
  return out;
}

Vec PriorTerm(const FrequencyPrior& prior, PriorMode mode, int subject_class, int object_class) {
  switch (mode) {
    case PriorMode::kAdaptive: {
      const auto s = prior.SoftenedLookup(subject_class, object_class);
      return Vec(s.begin(), s.end());
    }
    case PriorMode::kRawLog: {
      const auto p = prior.Lookup(subject_class, object_class);
      Vec out(p.size());
      for (size_t k = 0; k < p.size(); ++k) out[k] = std::log(p[k]);
      return out;
    }
    case PriorMode::kNone:
      break;
  }
  return {};
}

Vec PairDistribution(const ModelParams& params, const ModelConfig& config,
                     const FrequencyPrior& prior, const ImageForward& fwd,
                     const UnionFeatures& u, size_t i, size_t j, int subject_class,
                     int object_class) {
  RelCache cache;
  const Vec term = PriorTerm(prior, config.prior_mode, subject_class, object_class);
  RelLogits(fwd.z.row(i), fwd.z.row(j), u.At(i, j), term, config.prior_mode, params.arm, &cache);
  return cache.probs;
}

ImageLoss ImageLossAndGrad(const ModelParams& params, const ModelConfig& config,
                           const FrequencyPrior& prior, const SceneGraph& graph, const Mat& x,
                           const UnionFeatures& u, const std::vector<LabeledPair>& pairs,
                           const LossConfig& loss_config, ModelParams* grads) {
  const size_t n = graph.nodes.size();
  if (x.rows() != n) {
    throw DimensionError("image '" + graph.image_id + "': " + std::to_string(x.rows()) +
                         " feature rows for " + std::to_string(n) + " nodes");
  }
  ImageForward fwd = ForwardNodes(params, config, x, u);

  std::vector<int> targets(n);
  for (size_t i = 0; i < n; ++i) targets[i] = graph.nodes[i].class_id;
  const Vec thetas = graph.triplets.empty() ? Vec(n, 0.0) : NodePriority(graph).theta;
  const BatchLoss obj = NpsLossBatch(fwd.obj_logits, targets, thetas, loss_config);

  ImageLoss loss;
  loss.obj_loss = obj.mean;

  const size_t r = static_cast<size_t>(config.num_predicate_classes);
  std::vector<RelCache> caches(pairs.size());
  std::vector<Vec> terms(pairs.size());
  BatchLoss rel;
  if (!pairs.empty()) {
    Mat logits(pairs.size(), r);
    std::vector<int> labels(pairs.size());
    for (size_t k = 0; k < pairs.size(); ++k) {
      const LabeledPair& lp = pairs[k];
      terms[k] = PriorTerm(prior, config.prior_mode, graph.nodes[lp.subject].class_id,
                           graph.nodes[lp.object].class_id);
      const Vec row = RelLogits(fwd.z.row(lp.subject), fwd.z.row(lp.object),
                                u.At(lp.subject, lp.object), terms[k], config.prior_mode,
                                params.arm, &caches[k]);
      std::copy(row.begin(), row.end(), logits.row(k).begin());
      labels[k] = lp.label;
    }
    rel = CrossEntropyBatch(logits, labels);
    loss.rel_loss = rel.mean;
  }
  if (grads == nullptr) return loss;

  // dZ from the classifier.
  Mat dz = MatMul(obj.dlogits, params.obj_cls);
  grads->obj_cls += MatMul(obj.dlogits.Transposed(), fwd.z);
  for (size_t k = 0; k < pairs.size(); ++k) {
    const LabeledPair& lp = pairs[k];
    const RelInputGrads g =
        RelBackward(fwd.z.row(lp.subject), fwd.z.row(lp.object), u.At(lp.subject, lp.object),
                    config.prior_mode, params.arm, caches[k], rel.dlogits.row(k), grads->arm);
    Axpy(1.0, g.dz_i, dz.row(lp.subject));
    Axpy(1.0, g.dz_j, dz.row(lp.object));
  }
  DmpBackward(x, u, params.dmp, fwd.dmp_cache, dz, grads->dmp);
  return loss;
}

Json WeightsToJson(const ModelParams& params, const ModelConfig& config, uint64_t seed) {
  Json mats = Json::object();
  for (const auto& [name, m] : params.Named()) mats[name] = MatToJson(*m);
  return Json{{"format", kWeightsFormat},
              {"config", ModelConfigToJson(config)},
              {"seed", seed},
              {"params", mats}};
}

std::pair<ModelParams, ModelConfig> WeightsFromJson(const Json& j) {
  if (!j.is_object() || j.value("format", "") != kWeightsFormat) {
    throw DataError(std::string("weights: missing or unknown format tag (expected ") +
                    kWeightsFormat + ")");
  }
  const ModelConfig config = ModelConfigFromJson(j.at("config"));
  std::mt19937_64 rng(0);
  ModelParams params = InitModel(config, rng);
  const Json& mats = j.at("params");
  for (auto& [name, m] : params.Named()) {
    if (!mats.contains(name)) throw DataError("weights: missing matrix '" + name + "'");
    *m = MatFromJson(mats.at(name));
  }
  for (const auto& [key, value] : mats.items()) {
    bool known = false;
    for (const auto& [name, m] : params.Named()) known = known || name == key;
    if (!known) throw DataError("weights: unexpected matrix '" + key + "'");
  }
  params.dmp.stacked = config.stacked;
  CheckShapes(params, config);
  return {std::move(params), config};
}

}  // namespace sgg
