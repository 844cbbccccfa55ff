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
#ifndef SGG_ARM_H_
#define SGG_ARM_H_

// Adaptive reasoning over predicate priors. For an ordered pair (i, j):
//
//   p_ij = softmax(W_r ((z_i * z_j) * u_ij) + sigmoid(W_p u_ij) ⊙ log_softmax(prior))
//
// where x * y = ReLU(W_x x + W_y y) - (W_x x - W_y y)^2 and the two fusion
// stages have independent weights.

#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "linalg.h"

namespace sgg {

struct ARMParams {
  Mat w_p;   // R x d_u
  Mat w_r;   // R x f
  Mat w_x1;  // f x d
  Mat w_y1;  // f x d
  Mat w_x2;  // f x f
  Mat w_y2;  // f x d_u

  size_t num_predicates() const { return w_r.rows(); }
  size_t fusion_dim() const { return w_r.cols(); }

  std::vector<std::pair<std::string, Mat*>> Named();
  std::vector<std::pair<std::string, const Mat*>> Named() const;
};

ARMParams InitARM(size_t num_predicates, size_t d, size_t d_u, size_t f, std::mt19937_64& rng);
ARMParams ZerosLike(const ARMParams& p);
void ValidateShapes(const ARMParams& p, size_t d, size_t d_u);

// How the frequency prior enters the logits.
enum class PriorMode {
  kAdaptive,  // sigmoid gate times softened prior
  kRawLog,    // log of the prior, ungated (frequency-baseline bias)
  kNone,
};

PriorMode ParsePriorMode(const std::string& name);
std::string PriorModeName(PriorMode mode);

// log_softmax of a prior probability vector.
Vec SoftenPrior(std::span<const double> prior);

// sigmoid(W_p u).
Vec BiasGate(std::span<const double> u, const Mat& w_p);

struct FuseCache {
  Vec px;  // W_x x
  Vec py;  // W_y y
};
Vec Fuse(std::span<const double> x, std::span<const double> y, const Mat& w_x, const Mat& w_y,
         FuseCache* cache = nullptr);
struct FuseGrad {
  Vec dx;
  Vec dy;
};
// Accumulates into dw_x / dw_y.
FuseGrad FuseBackward(std::span<const double> x, std::span<const double> y, const Mat& w_x,
                      const Mat& w_y, const FuseCache& cache, std::span<const double> upstream,
                      Mat& dw_x, Mat& dw_y);

struct RelCache {
  FuseCache stage1;
  Vec fused1;
  FuseCache stage2;
  Vec fused2;
  Vec gate;       // empty unless adaptive
  Vec prior_term; // softened prior (adaptive) or log prior (raw)
  Vec probs;
};

// Logits before the final softmax. `prior_term` is the softened prior for
// kAdaptive, log(prior) for kRawLog and ignored for kNone.
Vec RelLogits(std::span<const double> z_i, std::span<const double> z_j,
              std::span<const double> u_ij, std::span<const double> prior_term,
              PriorMode mode, const ARMParams& params, RelCache* cache = nullptr);

// Predicate distribution for a pair from the raw prior probability vector.
Vec RelScores(std::span<const double> z_i, std::span<const double> z_j,
              std::span<const double> u_ij, std::span<const double> prior,
              const ARMParams& params, PriorMode mode = PriorMode::kAdaptive);

struct RelInputGrads {
  Vec dz_i;
  Vec dz_j;
  Vec du;
};
// Backward from d loss / d logits. Accumulates parameter gradients.
RelInputGrads RelBackward(std::span<const double> z_i, std::span<const double> z_j,
                          std::span<const double> u_ij, PriorMode mode,
                          const ARMParams& params, const RelCache& cache,
                          std::span<const double> dlogits, ARMParams& grads);

// argmax with ties to the lowest index; optionally skipping background (0).
int PredictRelationship(std::span<const double> distribution, bool exclude_background);

}  // namespace sgg

#endif  // SGG_ARM_H_
