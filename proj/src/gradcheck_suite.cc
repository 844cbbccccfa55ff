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
#include "gradcheck_suite.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <memory>
#include <random>

#include "arm.h"
#include "errors.h"
#include "graph.h"
#include "loss.h"
#include "message_passing.h"
#include "model.h"
#include "seed.h"
#include "trainer.h"

namespace sgg {
namespace {

Mat RowOf(std::span<const double> v) { return Mat(1, v.size(), Vec(v.begin(), v.end())); }

Mat Rand(size_t rows, size_t cols, std::mt19937_64& rng) {
  return RandomUniform(rows, cols, -1.0, 1.0, rng);
}

// ---- elementary operations ---------------------------------------------

GradcheckCase MatmulCase(std::mt19937_64& rng) {
  DiffOp op{"matmul", {"a", "b"},
            [](std::span<const Mat> in) { return MatMul(in[0], in[1]); },
            [](std::span<const Mat> in, const Mat& g) {
              MatMulGrad r = MatMulBackward(in[0], in[1], g);
              return std::vector<Mat>{std::move(r.da), std::move(r.db)};
            }};
  return {op, {Rand(3, 4, rng), Rand(4, 2, rng)}};
}

GradcheckCase HadamardCase(std::mt19937_64& rng) {
  DiffOp op{"hadamard", {"a", "b"},
            [](std::span<const Mat> in) { return Hadamard(in[0], in[1]); },
            [](std::span<const Mat> in, const Mat& g) {
              HadamardGrad r = HadamardBackward(in[0], in[1], g);
              return std::vector<Mat>{std::move(r.da), std::move(r.db)};
            }};
  return {op, {Rand(3, 3, rng), Rand(3, 3, rng)}};
}

GradcheckCase SoftmaxCase(std::mt19937_64& rng) {
  static const std::vector<size_t> kMask = {2};
  DiffOp op{"softmax_row", {"v"},
            [](std::span<const Mat> in) { return RowOf(SoftmaxRow(in[0].row(0), kMask)); },
            [](std::span<const Mat> in, const Mat& g) {
              const Vec out = SoftmaxRow(in[0].row(0), kMask);
              return std::vector<Mat>{RowOf(SoftmaxRowBackward(out, g.row(0), kMask))};
            }};
  return {op, {Rand(1, 6, rng)}};
}

GradcheckCase LogSoftmaxCase(std::mt19937_64& rng) {
  DiffOp op{"log_softmax", {"v"},
            [](std::span<const Mat> in) { return RowOf(LogSoftmax(in[0].row(0))); },
            [](std::span<const Mat> in, const Mat& g) {
              const Vec out = LogSoftmax(in[0].row(0));
              return std::vector<Mat>{RowOf(LogSoftmaxBackward(out, g.row(0)))};
            }};
  return {op, {Rand(1, 5, rng)}};
}

GradcheckCase SigmoidCase(std::mt19937_64& rng) {
  DiffOp op{"sigmoid", {"v"},
            [](std::span<const Mat> in) { return RowOf(Sigmoid(in[0].row(0))); },
            [](std::span<const Mat> in, const Mat& g) {
              const Vec out = Sigmoid(in[0].row(0));
              return std::vector<Mat>{RowOf(SigmoidBackward(out, g.row(0)))};
            }};
  return {op, {Rand(1, 5, rng)}};
}

GradcheckCase ReluCase(std::mt19937_64& rng) {
  DiffOp op{"relu", {"v"},
            [](std::span<const Mat> in) { return RowOf(Relu(in[0].row(0))); },
            [](std::span<const Mat> in, const Mat& g) {
              return std::vector<Mat>{RowOf(ReluBackward(in[0].row(0), g.row(0)))};
            }};
  return {op, {Rand(1, 6, rng)}};
}

GradcheckCase LayerNormCase(std::mt19937_64& rng) {
  DiffOp op{"layer_norm", {"v", "gain", "bias"},
            [](std::span<const Mat> in) {
              return RowOf(LayerNorm(in[0].row(0), in[1].row(0), in[2].row(0)));
            },
            [](std::span<const Mat> in, const Mat& g) {
              LayerNormCache cache;
              LayerNorm(in[0].row(0), in[1].row(0), in[2].row(0), kLayerNormEps, &cache);
              LayerNormGrad r = LayerNormBackward(cache, in[1].row(0), g.row(0));
              return std::vector<Mat>{RowOf(r.dv), RowOf(r.dgain), RowOf(r.dbias)};
            }};
  return {op, {Rand(1, 6, rng), Rand(1, 6, rng), Rand(1, 6, rng)}};
}

GradcheckCase KronCase(std::mt19937_64& rng) {
  DiffOp op{"kron_stack2", {"alpha_fwd", "alpha_bwd", "m"},
            [](std::span<const Mat> in) {
              return RowOf(KronStack2(in[0][0], in[1][0], in[2].row(0)));
            },
            [](std::span<const Mat> in, const Mat& g) {
              KronStack2Grad r = KronStack2Backward(in[0][0], in[1][0], in[2].row(0), g.row(0));
              return std::vector<Mat>{Mat(1, 1, r.dalpha_fwd), Mat(1, 1, r.dalpha_bwd),
                                      RowOf(r.dm)};
            }};
  return {op, {Rand(1, 1, rng), Rand(1, 1, rng), Rand(1, 4, rng)}};
}

// ---- message passing ---------------------------------------------------

GradcheckCase GcmpCase(size_t n, size_t d, std::mt19937_64& rng) {
  DiffOp op{"gcmp", {"x", "W_z", "W_v", "w"},
            [](std::span<const Mat> in) {
              return GcmpForward(in[0], GCMPParams{in[1], in[2], in[3]}).z;
            },
            [](std::span<const Mat> in, const Mat& g) {
              const GCMPParams p{in[1], in[2], in[3]};
              GlobalContextCache cache;
              GcmpForward(in[0], p, &cache);
              GCMPParams grads = ZerosLike(p);
              Mat dx = GcmpBackward(in[0], p, cache, g, grads);
              return std::vector<Mat>{std::move(dx), grads.w_z, grads.w_v, grads.w};
            }};
  std::mt19937_64 init(rng());
  GCMPParams p = InitGCMP(d, init);
  return {op, {Rand(n, d, rng), p.w_z, p.w_v, p.w}};
}

GradcheckCase SgcmpCase(size_t n, size_t d, std::mt19937_64& rng) {
  DiffOp op{"sgcmp", {"x", "W_z", "W_v", "w_e"},
            [](std::span<const Mat> in) {
              return SgcmpForward(in[0], SGCMPParams{in[1], in[2], in[3]}).z;
            },
            [](std::span<const Mat> in, const Mat& g) {
              const SGCMPParams p{in[1], in[2], in[3]};
              GlobalContextCache cache;
              SgcmpForward(in[0], p, &cache);
              SGCMPParams grads = ZerosLike(p);
              Mat dx = SgcmpBackward(in[0], p, cache, g, grads);
              return std::vector<Mat>{std::move(dx), grads.w_z, grads.w_v, grads.w_e};
            }};
  std::mt19937_64 init(rng());
  SGCMPParams p = InitSGCMP(d, init);
  return {op, {Rand(n, d, rng), p.w_z, p.w_v, p.w_e}};
}

DMPParams DmpFrom(std::span<const Mat> in, bool stacked) {
  DMPParams p;
  p.w_s = in[2];
  p.w_o = in[3];
  p.w_u = in[4];
  p.w_e = in[5];
  p.w_t3 = in[6];
  p.w_t2 = in[7];
  p.w_t1 = in[8];
  p.ln_gain = in[9];
  p.ln_bias = in[10];
  p.stacked = stacked;
  return p;
}

GradcheckCase DmpCase(const GradcheckConfig& c, bool stacked, std::mt19937_64& rng) {
  const size_t n = c.nodes;
  auto forward = [n, stacked](std::span<const Mat> in) {
    const DMPParams p = DmpFrom(in, stacked);
    const UnionFeatures u = UnionFeatures::FromDense(n, in[1]);
    return stacked ? DmpForward(in[0], u, p).z : NoStackForward(in[0], u, p).z;
  };
  auto backward = [n, stacked](std::span<const Mat> in, const Mat& g) {
    const DMPParams p = DmpFrom(in, stacked);
    const UnionFeatures u = UnionFeatures::FromDense(n, in[1]);
    DmpCache cache;
    if (stacked) {
      DmpForward(in[0], u, p, &cache);
    } else {
      NoStackForward(in[0], u, p, &cache);
    }
    DMPParams grads = ZerosLike(p);
    DmpInputGrads r = DmpBackward(in[0], u, p, cache, g, grads, true);
    return std::vector<Mat>{r.dx,       r.du,       grads.w_s,  grads.w_o,
                            grads.w_u,  grads.w_e,  grads.w_t3, grads.w_t2,
                            grads.w_t1, grads.ln_gain, grads.ln_bias};
  };
  DiffOp op{stacked ? "dmp_forward" : "dmp_no_stack",
            {"x", "U", "W_s", "W_o", "W_u", "w_e", "W_t3", "W_t2", "W_t1", "ln_gain",
             "ln_bias"},
            forward, backward};
  std::mt19937_64 init(rng());
  DMPParams p = InitDMP(c.feature_dim, c.union_dim, c.hidden_dim, stacked, init);
  // Perturb the layer-norm affine terms so they are checked away from 1/0.
  p.ln_gain += Rand(p.ln_gain.rows(), 1, rng);
  p.ln_bias += Rand(p.ln_bias.rows(), 1, rng);
  Mat x = Rand(n, c.feature_dim, rng);
  Mat u = Rand(n * n, c.union_dim, rng);
  for (size_t i = 0; i < n; ++i) {
    for (double& v : u.row(i * n + i)) v = 0.0;
  }
  return {op,
          {x, u, p.w_s, p.w_o, p.w_u, p.w_e, p.w_t3, p.w_t2, p.w_t1, p.ln_gain, p.ln_bias}};
}

// ---- losses --------------------------------------------------------------

GradcheckCase NpsCase(const GradcheckConfig& c, std::mt19937_64& rng) {
  const size_t n = c.nodes;
  std::vector<int> targets(n);
  Vec thetas(n);
  std::uniform_int_distribution<int> cls(0, c.num_object_classes - 1);
  std::uniform_real_distribution<double> theta(0.0, 1.0);
  for (size_t i = 0; i < n; ++i) {
    targets[i] = cls(rng);
    thetas[i] = theta(rng);
  }
  thetas[0] = 0.02;  // capped focusing exponent
  DiffOp op{"nps_loss", {"logits"},
            [targets, thetas](std::span<const Mat> in) {
              return Mat(1, 1, NpsLossBatch(in[0], targets, thetas, LossConfig{}).mean);
            },
            [targets, thetas](std::span<const Mat> in, const Mat& g) {
              BatchLoss l = NpsLossBatch(in[0], targets, thetas, LossConfig{});
              l.dlogits *= g[0];
              return std::vector<Mat>{std::move(l.dlogits)};
            }};
  Mat logits = Rand(n, static_cast<size_t>(c.num_object_classes), rng);
  logits *= 3.0;
  return {op, {logits}};
}

GradcheckCase CrossEntropyCase(const GradcheckConfig& c, std::mt19937_64& rng) {
  const size_t rows = 5;
  std::vector<int> targets(rows);
  std::uniform_int_distribution<int> cls(0, c.num_predicate_classes - 1);
  for (int& t : targets) t = cls(rng);
  DiffOp op{"cross_entropy", {"logits"},
            [targets](std::span<const Mat> in) {
              return Mat(1, 1, CrossEntropyBatch(in[0], targets).mean);
            },
            [targets](std::span<const Mat> in, const Mat& g) {
              BatchLoss l = CrossEntropyBatch(in[0], targets);
              l.dlogits *= g[0];
              return std::vector<Mat>{std::move(l.dlogits)};
            }};
  return {op, {Rand(rows, static_cast<size_t>(c.num_predicate_classes), rng)}};
}

// ---- relationship head ---------------------------------------------------

GradcheckCase FuseCase(const GradcheckConfig& c, std::mt19937_64& rng) {
  DiffOp op{"fuse", {"x", "y", "W_x", "W_y"},
            [](std::span<const Mat> in) {
              return RowOf(Fuse(in[0].row(0), in[1].row(0), in[2], in[3]));
            },
            [](std::span<const Mat> in, const Mat& g) {
              FuseCache cache;
              Fuse(in[0].row(0), in[1].row(0), in[2], in[3], &cache);
              Mat dwx = Mat::ZerosLike(in[2]);
              Mat dwy = Mat::ZerosLike(in[3]);
              FuseGrad r = FuseBackward(in[0].row(0), in[1].row(0), in[2], in[3], cache,
                                        g.row(0), dwx, dwy);
              return std::vector<Mat>{RowOf(r.dx), RowOf(r.dy), dwx, dwy};
            }};
  const size_t f = c.fusion_dim;
  return {op,
          {Rand(1, c.feature_dim, rng), Rand(1, c.union_dim, rng), Rand(f, c.feature_dim, rng),
           Rand(f, c.union_dim, rng)}};
}

GradcheckCase BiasGateCase(const GradcheckConfig& c, std::mt19937_64& rng) {
  DiffOp op{"bias_gate", {"u", "W_p"},
            [](std::span<const Mat> in) { return RowOf(BiasGate(in[0].row(0), in[1])); },
            [](std::span<const Mat> in, const Mat& g) {
              const Vec gate = BiasGate(in[0].row(0), in[1]);
              const Vec dpre = SigmoidBackward(gate, g.row(0));
              Mat dw = Mat::ZerosLike(in[1]);
              AddOuter(dw, dpre, in[0].row(0));
              return std::vector<Mat>{RowOf(MatTVec(in[1], dpre)), dw};
            }};
  return {op, {Rand(1, c.union_dim, rng),
               Rand(static_cast<size_t>(c.num_predicate_classes), c.union_dim, rng)}};
}

ARMParams ArmFrom(std::span<const Mat> in, size_t offset) {
  ARMParams p;
  p.w_p = in[offset];
  p.w_r = in[offset + 1];
  p.w_x1 = in[offset + 2];
  p.w_y1 = in[offset + 3];
  p.w_x2 = in[offset + 4];
  p.w_y2 = in[offset + 5];
  return p;
}

GradcheckCase RelCase(const GradcheckConfig& c, PriorMode mode, std::mt19937_64& rng) {
  const size_t r = static_cast<size_t>(c.num_predicate_classes);
  Vec prior(r);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  double total = 0.0;
  for (double& v : prior) total += (v = unit(rng));
  for (double& v : prior) v /= total;
  Vec term;
  if (mode == PriorMode::kAdaptive) term = SoftenPrior(prior);
  if (mode == PriorMode::kRawLog) {
    for (double v : prior) term.push_back(std::log(v));
  }
  DiffOp op{"rel_logits_" + PriorModeName(mode),
            {"z_i", "z_j", "u", "W_p", "W_r", "W_x1", "W_y1", "W_x2", "W_y2"},
            [term, mode](std::span<const Mat> in) {
              return RowOf(RelLogits(in[0].row(0), in[1].row(0), in[2].row(0), term, mode,
                                     ArmFrom(in, 3)));
            },
            [term, mode](std::span<const Mat> in, const Mat& g) {
              const ARMParams p = ArmFrom(in, 3);
              RelCache cache;
              RelLogits(in[0].row(0), in[1].row(0), in[2].row(0), term, mode, p, &cache);
              ARMParams grads = ZerosLike(p);
              RelInputGrads d = RelBackward(in[0].row(0), in[1].row(0), in[2].row(0), mode, p,
                                            cache, g.row(0), grads);
              return std::vector<Mat>{RowOf(d.dz_i), RowOf(d.dz_j), RowOf(d.du),
                                      grads.w_p,     grads.w_r,     grads.w_x1,
                                      grads.w_y1,    grads.w_x2,    grads.w_y2};
            }};
  std::mt19937_64 init(rng());
  ARMParams p = InitARM(r, c.feature_dim, c.union_dim, c.fusion_dim, init);
  return {op,
          {Rand(1, c.feature_dim, rng), Rand(1, c.feature_dim, rng), Rand(1, c.union_dim, rng),
           p.w_p, p.w_r, p.w_x1, p.w_y1, p.w_x2, p.w_y2}};
}

// ---- full composite --------------------------------------------------------

struct CompositeFixture {
  ModelConfig config;
  SceneGraph graph;
  Mat x;
  UnionFeatures u;
  std::vector<LabeledPair> pairs;
  FrequencyPrior prior{2, 2};
};

ModelParams ParamsFrom(const ModelParams& shape, std::span<const Mat> in) {
  ModelParams p = shape;
  auto named = p.Named();
  for (size_t k = 0; k < named.size(); ++k) *named[k].second = in[k];
  return p;
}

GradcheckCase CompositeCase(const GradcheckConfig& c, size_t fixture, std::mt19937_64& rng) {
  auto fx = std::make_shared<CompositeFixture>();
  fx->config.num_object_classes = c.num_object_classes;
  fx->config.num_predicate_classes = c.num_predicate_classes;
  fx->config.feature_dim = c.feature_dim;
  fx->config.union_dim = c.union_dim;
  fx->config.hidden_dim = c.hidden_dim;
  fx->config.fusion_dim = c.fusion_dim;
  fx->config.stacked = true;
  fx->config.prior_mode = PriorMode::kAdaptive;

  const size_t n = c.nodes;
  std::uniform_int_distribution<int> cls(1, c.num_object_classes - 1);
  std::uniform_int_distribution<int> pred(1, c.num_predicate_classes - 1);
  std::bernoulli_distribution related(0.4);
  fx->graph.image_id = "gradcheck_" + std::to_string(fixture);
  for (size_t i = 0; i < n; ++i) {
    const double x1 = 10.0 * static_cast<double>(i);
    fx->graph.nodes.push_back({cls(rng), BBox{x1, 0.0, x1 + 15.0, 15.0}, std::nullopt});
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i != j && related(rng)) fx->graph.triplets.push_back({i, pred(rng), j, std::nullopt});
    }
  }
  if (fx->graph.triplets.empty()) fx->graph.triplets.push_back({0, 1, 1, std::nullopt});
  // Every ordered pair, labelled, so the check does not depend on sampling.
  fx->pairs = AllLabeledPairs(fx->graph);
  fx->x = Rand(n, c.feature_dim, rng);
  fx->u = UnionFeatures(n, c.union_dim);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) fx->u.SetSymmetric(i, j, Rand(1, c.union_dim, rng).row(0));
  }
  const std::vector<SceneGraph> prior_graphs = {fx->graph};
  fx->prior = BuildFrequencyPrior(prior_graphs, c.num_object_classes, c.num_predicate_classes);

  std::mt19937_64 init(rng());
  ModelParams params = InitModel(fx->config, init);
  params.dmp.ln_gain += Rand(params.dmp.ln_gain.rows(), 1, rng);
  params.dmp.ln_bias += Rand(params.dmp.ln_bias.rows(), 1, rng);

  std::vector<std::string> names;
  std::vector<Mat> inputs;
  for (const auto& [name, m] : params.Named()) {
    names.push_back(name);
    inputs.push_back(*m);
  }
  const std::string fault = c.fault;
  DiffOp op{"image_loss",
            names,
            [fx, params](std::span<const Mat> in) {
              const ModelParams p = ParamsFrom(params, in);
              const ImageLoss l = ImageLossAndGrad(p, fx->config, fx->prior, fx->graph, fx->x,
                                                   fx->u, fx->pairs, LossConfig{}, nullptr);
              return Mat(1, 1, l.total());
            },
            [fx, params, fault](std::span<const Mat> in, const Mat& g) {
              const ModelParams p = ParamsFrom(params, in);
              ModelParams grads = ZerosLike(p);
              ImageLossAndGrad(p, fx->config, fx->prior, fx->graph, fx->x, fx->u, fx->pairs,
                               LossConfig{}, &grads);
              std::vector<Mat> out;
              for (const auto& [name, m] : grads.Named()) {
                Mat gm = *m;
                gm *= name == fault ? -g[0] : g[0];
                out.push_back(std::move(gm));
              }
              return out;
            }};
  return {op, inputs};
}

}  // namespace

void ValidateGradcheckConfig(const GradcheckConfig& c) {
  if (c.fixtures == 0) throw ConfigError("gradcheck: fixtures must be positive");
  if (!(c.tolerance > 0.0)) throw ConfigError("gradcheck: tolerance must be positive");
  if (c.nodes < 2) throw ConfigError("gradcheck: nodes must be >= 2");
  if (c.feature_dim == 0 || c.feature_dim % 2 != 0) {
    throw ConfigError("gradcheck: feature_dim must be positive and even");
  }
  if (c.union_dim == 0 || c.hidden_dim == 0 || c.fusion_dim == 0) {
    throw ConfigError("gradcheck: dimensions must be positive");
  }
  if (c.num_object_classes < 2 || c.num_predicate_classes < 2) {
    throw ConfigError("gradcheck: class counts must be >= 2");
  }
  if (!c.fault.empty()) {
    ModelConfig mc;
    mc.feature_dim = 2;
    mc.union_dim = 1;
    mc.hidden_dim = 1;
    mc.fusion_dim = 1;
    std::mt19937_64 rng(0);
    ModelParams p = InitModel(mc, rng);
    std::string known;
    for (const auto& [name, m] : p.Named()) {
      if (name == c.fault) return;
      known += (known.empty() ? "" : ", ") + name;
    }
    throw ConfigError("gradcheck: unknown fault target '" + c.fault + "' (known: " + known + ")");
  }
}

Json GradcheckConfigToJson(const GradcheckConfig& c) {
  return Json{{"fixtures", c.fixtures},
              {"tolerance", c.tolerance},
              {"feature_dim", c.feature_dim},
              {"union_dim", c.union_dim},
              {"nodes", c.nodes},
              {"hidden_dim", c.hidden_dim},
              {"fusion_dim", c.fusion_dim},
              {"num_object_classes", c.num_object_classes},
              {"num_predicate_classes", c.num_predicate_classes},
              {"fault", c.fault}};
}

GradcheckConfig GradcheckConfigFromJson(const Json& j, GradcheckConfig c) {
  if (!j.is_object()) throw ConfigError("gradcheck: expected a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "fixtures") {
        c.fixtures = value.get<size_t>();
      } else if (key == "tolerance") {
        c.tolerance = value.get<double>();
      } else if (key == "feature_dim") {
        c.feature_dim = value.get<size_t>();
      } else if (key == "union_dim") {
        c.union_dim = value.get<size_t>();
      } else if (key == "nodes") {
        c.nodes = value.get<size_t>();
      } else if (key == "hidden_dim") {
        c.hidden_dim = value.get<size_t>();
      } else if (key == "fusion_dim") {
        c.fusion_dim = value.get<size_t>();
      } else if (key == "num_object_classes") {
        c.num_object_classes = value.get<int>();
      } else if (key == "num_predicate_classes") {
        c.num_predicate_classes = value.get<int>();
      } else if (key == "fault") {
        c.fault = value.get<std::string>();
      } else {
        throw ConfigError("gradcheck: unknown key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("gradcheck: ") + e.what());
  }
  return c;
}

std::vector<GradcheckCase> BuildGradcheckCases(const GradcheckConfig& c, size_t fixture) {
  ValidateGradcheckConfig(c);
  std::mt19937_64 rng(DeriveSeed(c.seed, SeedTag::kGradcheck, fixture));
  std::vector<GradcheckCase> cases;
  cases.push_back(MatmulCase(rng));
  cases.push_back(HadamardCase(rng));
  cases.push_back(SoftmaxCase(rng));
  cases.push_back(LogSoftmaxCase(rng));
  cases.push_back(SigmoidCase(rng));
  cases.push_back(ReluCase(rng));
  cases.push_back(LayerNormCase(rng));
  cases.push_back(KronCase(rng));
  cases.push_back(GcmpCase(c.nodes, c.feature_dim, rng));
  cases.push_back(SgcmpCase(c.nodes, c.feature_dim, rng));
  cases.push_back(DmpCase(c, true, rng));
  cases.push_back(DmpCase(c, false, rng));
  cases.push_back(NpsCase(c, rng));
  cases.push_back(CrossEntropyCase(c, rng));
  cases.push_back(FuseCase(c, rng));
  cases.push_back(BiasGateCase(c, rng));
  cases.push_back(RelCase(c, PriorMode::kAdaptive, rng));
  cases.push_back(RelCase(c, PriorMode::kRawLog, rng));
  cases.push_back(RelCase(c, PriorMode::kNone, rng));
  cases.push_back(CompositeCase(c, fixture, rng));
  return cases;
}

GradcheckResult RunGradcheckSuite(const GradcheckConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  GradcheckResult result;
  GradCheckOptions options;
  options.tolerance = config.tolerance;
  for (size_t f = 0; f < config.fixtures; ++f) {
    for (const GradcheckCase& gc : BuildGradcheckCases(config, f)) {
      options.reduction_seed = DeriveSeed(config.seed, SeedTag::kGradcheck, 1000 + f);
      GradcheckEntry entry{f, FiniteDiffCheck(gc.op, gc.inputs, options)};
      result.all_passed = result.all_passed && entry.report.passed;
      result.max_rel_error = std::max(result.max_rel_error, entry.report.max_rel_error);
      result.entries_checked += entry.report.entries_checked;
      result.kinks_skipped += entry.report.kinks_skipped;
      result.entries.push_back(std::move(entry));
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Json GradcheckResultToJson(const GradcheckResult& r) {
  Json entries = Json::array();
  for (const GradcheckEntry& e : r.entries) {
    Json inputs = Json::array();
    for (const InputCheck& in : e.report.inputs) {
      inputs.push_back(Json{{"name", in.name},
                            {"max_rel_error", in.max_rel_error},
                            {"entries", in.entries},
                            {"kinks", in.kinks}});
    }
    entries.push_back(Json{{"fixture", e.fixture},
                           {"op", e.report.op_name},
                           {"passed", e.report.passed},
                           {"max_rel_error", e.report.max_rel_error},
                           {"entries_checked", e.report.entries_checked},
                           {"kinks_skipped", e.report.kinks_skipped},
                           {"worst_input", e.report.worst_input},
                           {"worst_index", e.report.worst_index},
                           {"inputs", inputs}});
  }
  return Json{{"all_passed", r.all_passed},
              {"max_rel_error", r.max_rel_error},
              {"entries_checked", r.entries_checked},
              {"kinks_skipped", r.kinks_skipped},
              {"seconds", r.seconds},
              {"checks", entries}};
}

std::string GradcheckResultText(const GradcheckResult& r) {
  struct Summary {
    double worst = 0.0;
    size_t fixtures = 0;
    size_t failed = 0;
    size_t kinks = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Summary> by_op;
  for (const GradcheckEntry& e : r.entries) {
    if (!by_op.count(e.report.op_name)) order.push_back(e.report.op_name);
    Summary& s = by_op[e.report.op_name];
    s.worst = std::max(s.worst, e.report.max_rel_error);
    ++s.fixtures;
    s.kinks += e.report.kinks_skipped;
    if (!e.report.passed) ++s.failed;
  }
  std::string out;
  char buf[256];
  for (const std::string& name : order) {
    const Summary& s = by_op[name];
    std::snprintf(buf, sizeof(buf), "%-4s %-20s max_rel_err %.3e  fixtures %zu  kinks %zu\n",
                  s.failed == 0 ? "ok" : "FAIL", name.c_str(), s.worst, s.fixtures, s.kinks);
    out += buf;
  }
  for (const GradcheckEntry& e : r.entries) {
    if (e.report.passed) continue;
    std::snprintf(buf, sizeof(buf),
                  "FAIL %s fixture %zu: input '%s' entry %zu analytic %.6e numeric %.6e "
                  "(rel err %.3e)\n",
                  e.report.op_name.c_str(), e.fixture, e.report.worst_input.c_str(),
                  e.report.worst_index, e.report.worst_analytic, e.report.worst_numeric,
                  e.report.max_rel_error);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%s: %zu entries checked, %zu kinks skipped, %.2f s\n",
                r.all_passed ? "all checks passed" : "gradient check FAILED", r.entries_checked,
                r.kinks_skipped, r.seconds);
  out += buf;
  return out;
}

}  // namespace sgg
