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
#include "arm.h"

#include <algorithm>
#include <cmath>

#include "errors.h"

namespace sgg {
namespace {

void RequireShape(const Mat& m, size_t rows, size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(name) + " has shape " + m.ShapeString() + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

std::vector<std::pair<std::string, Mat*>> ARMParams::Named() {
  return {{"W_p", &w_p},   {"W_r", &w_r},   {"W_x1", &w_x1},
          {"W_y1", &w_y1}, {"W_x2", &w_x2}, {"W_y2", &w_y2}};
}

std::vector<std::pair<std::string, const Mat*>> ARMParams::Named() const {
  return {{"W_p", &w_p},   {"W_r", &w_r},   {"W_x1", &w_x1},
          {"W_y1", &w_y1}, {"W_x2", &w_x2}, {"W_y2", &w_y2}};
}

ARMParams InitARM(size_t num_predicates, size_t d, size_t d_u, size_t f, std::mt19937_64& rng) {
  ARMParams p;
  p.w_p = UniformInit(num_predicates, d_u, rng);
  p.w_r = UniformInit(num_predicates, f, rng);
  p.w_x1 = UniformInit(f, d, rng);
  p.w_y1 = UniformInit(f, d, rng);
  p.w_x2 = UniformInit(f, f, rng);
  p.w_y2 = UniformInit(f, d_u, rng);
  return p;
}

ARMParams ZerosLike(const ARMParams& p) {
  ARMParams z = p;
  for (auto& [name, m] : z.Named()) m->Fill(0.0);
  return z;
}

void ValidateShapes(const ARMParams& p, size_t d, size_t d_u) {
  const size_t r = p.w_r.rows();
  const size_t f = p.w_r.cols();
  RequireShape(p.w_p, r, d_u, "W_p");
  RequireShape(p.w_x1, f, d, "W_x1");
  RequireShape(p.w_y1, f, d, "W_y1");
  RequireShape(p.w_x2, f, f, "W_x2");
  RequireShape(p.w_y2, f, d_u, "W_y2");
}

PriorMode ParsePriorMode(const std::string& name) {
  if (name == "adaptive") return PriorMode::kAdaptive;
  if (name == "raw") return PriorMode::kRawLog;
  if (name == "none") return PriorMode::kNone;
  throw ConfigError("unknown prior mode '" + name + "' (expected adaptive, raw or none)");
}

std::string PriorModeName(PriorMode mode) {
  switch (mode) {
    case PriorMode::kAdaptive:
      return "adaptive";
    case PriorMode::kRawLog:
      return "raw";
    case PriorMode::kNone:
      return "none";
  }
  return "adaptive";
}

Vec SoftenPrior(std::span<const double> prior) { return LogSoftmax(prior); }

Vec BiasGate(std::span<const double> u, const Mat& w_p) { return Sigmoid(MatVec(w_p, u)); }

Vec Fuse(std::span<const double> x, std::span<const double> y, const Mat& w_x, const Mat& w_y,
         FuseCache* cache) {
  if (w_x.rows() != w_y.rows()) {
    throw DimensionError("fuse: projections disagree on output width (" + w_x.ShapeString() +
                         " vs " + w_y.ShapeString() + ")");
  }
  Vec px = MatVec(w_x, x);
  Vec py = MatVec(w_y, y);
  Vec out(px.size());
  for (size_t k = 0; k < out.size(); ++k) {
    const double sum = px[k] + py[k];
    const double diff = px[k] - py[k];
    out[k] = (sum > 0.0 ? sum : 0.0) - diff * diff;
  }
  if (cache != nullptr) {
    cache->px = std::move(px);
    cache->py = std::move(py);
  }
  return out;
}

FuseGrad FuseBackward(std::span<const double> x, std::span<const double> y, const Mat& w_x,
                      const Mat& w_y, const FuseCache& cache, std::span<const double> upstream,
                      Mat& dw_x, Mat& dw_y) {
  const size_t f = cache.px.size();
  Vec dpx(f);
  Vec dpy(f);
  for (size_t k = 0; k < f; ++k) {
    const double relu_grad = cache.px[k] + cache.py[k] > 0.0 ? upstream[k] : 0.0;
    const double sq_grad = 2.0 * upstream[k] * (cache.px[k] - cache.py[k]);
    dpx[k] = relu_grad - sq_grad;
    dpy[k] = relu_grad + sq_grad;
  }
  AddOuter(dw_x, dpx, x);
  AddOuter(dw_y, dpy, y);
  return {MatTVec(w_x, dpx), MatTVec(w_y, dpy)};
}

Vec RelLogits(std::span<const double> z_i, std::span<const double> z_j,
              std::span<const double> u_ij, std::span<const double> prior_term, PriorMode mode,
              const ARMParams& params, RelCache* cache) {
  RelCache local;
  RelCache& c = cache != nullptr ? *cache : local;
  c.fused1 = Fuse(z_i, z_j, params.w_x1, params.w_y1, &c.stage1);
  c.fused2 = Fuse(c.fused1, u_ij, params.w_x2, params.w_y2, &c.stage2);
  Vec logits = MatVec(params.w_r, c.fused2);
  const size_t r = logits.size();
  c.gate.clear();
  c.prior_term.clear();
  if (mode != PriorMode::kNone) {
    if (prior_term.size() != r) {
      throw DimensionError("relationship scores: prior of length " +
                           std::to_string(prior_term.size()) + " for " + std::to_string(r) +
                           " predicates");
    }
    c.prior_term.assign(prior_term.begin(), prior_term.end());
  }
  if (mode == PriorMode::kAdaptive) {
    c.gate = BiasGate(u_ij, params.w_p);
    for (size_t k = 0; k < r; ++k) logits[k] += c.gate[k] * prior_term[k];
  } else if (mode == PriorMode::kRawLog) {
    for (size_t k = 0; k < r; ++k) logits[k] += prior_term[k];
  }
  c.probs = SoftmaxRow(logits);
  return logits;
}

Vec RelScores(std::span<const double> z_i, std::span<const double> z_j,
              std::span<const double> u_ij, std::span<const double> prior,
              const ARMParams& params, PriorMode mode) {
  Vec term;
  if (mode == PriorMode::kAdaptive) {
    term = SoftenPrior(prior);
  } else if (mode == PriorMode::kRawLog) {
    term.resize(prior.size());
    for (size_t k = 0; k < prior.size(); ++k) term[k] = std::log(std::max(prior[k], 1e-300));
  }
  RelCache cache;
  RelLogits(z_i, z_j, u_ij, term, mode, params, &cache);
  return cache.probs;
}

RelInputGrads RelBackward(std::span<const double> z_i, std::span<const double> z_j,
                          std::span<const double> u_ij, PriorMode mode,
                          const ARMParams& params, const RelCache& c,
                          std::span<const double> dlogits, ARMParams& grads) {
  RelInputGrads out;
  out.du.assign(u_ij.size(), 0.0);
  if (mode == PriorMode::kAdaptive) {
    Vec dgate(dlogits.size());
    for (size_t k = 0; k < dlogits.size(); ++k) dgate[k] = dlogits[k] * c.prior_term[k];
    const Vec dpre = SigmoidBackward(c.gate, dgate);
    AddOuter(grads.w_p, dpre, u_ij);
    out.du = MatTVec(params.w_p, dpre);
  }
  AddOuter(grads.w_r, dlogits, c.fused2);
  const Vec dfused2 = MatTVec(params.w_r, dlogits);
  const FuseGrad g2 = FuseBackward(c.fused1, u_ij, params.w_x2, params.w_y2, c.stage2, dfused2,
                                   grads.w_x2, grads.w_y2);
  Axpy(1.0, g2.dy, out.du);
  const FuseGrad g1 =
      FuseBackward(z_i, z_j, params.w_x1, params.w_y1, c.stage1, g2.dx, grads.w_x1, grads.w_y1);
  out.dz_i = g1.dx;
  out.dz_j = g1.dy;
  return out;
}

int PredictRelationship(std::span<const double> distribution, bool exclude_background) {
  const size_t start = exclude_background ? 1 : 0;
  if (distribution.size() <= start) {
    throw DimensionError("predict: distribution has no eligible predicate");
  }
  size_t best = start;
  for (size_t k = start + 1; k < distribution.size(); ++k) {
    if (distribution[k] > distribution[best]) best = k;
  }
  return static_cast<int>(best);
}

}  // namespace sgg
