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
#ifndef SGG_LOSS_H_
#define SGG_LOSS_H_

// Node-priority-sensitive object loss. A node's focusing exponent is derived
// from its share of the graph's triplets:
//
//   gamma(theta) = min(2, -(1 - theta)^mu * ln(theta))
//   loss(p)      = -(1 - p)^gamma * ln(p)
//
// theta comes from ground truth, so gamma is a per-node constant for the
// gradient.

#include <span>
#include <vector>

#include "linalg.h"

namespace sgg {

inline constexpr double kGammaCap = 2.0;
inline constexpr double kProbabilityFloor = 1e-12;

struct LossConfig {
  double mu = 4.0;
};

// theta in [0, 1]; theta == 0 returns the cap. Throws DomainError otherwise.
double GammaMap(double theta, double mu);

// p in (0, 1]. Throws DomainError for p <= 0 or p > 1.
double NpsLoss(double p, double theta, const LossConfig& config);
double FocalLoss(double p, double gamma);

// d loss / d p for -(1-p)^gamma ln p, p already clamped.
double FocalLossDerivative(double p, double gamma);

struct BatchLoss {
  double mean = 0.0;
  Mat dlogits;  // same shape as the logits, includes the 1/N of the mean
};

// Mean NPS loss over rows of `logits` (one row per node, softmax inside).
// The probability of the target class is clamped to >= 1e-12.
BatchLoss NpsLossBatch(const Mat& logits, std::span<const int> targets,
                       std::span<const double> thetas, const LossConfig& config);

// Mean softmax cross-entropy over rows.
BatchLoss CrossEntropyBatch(const Mat& logits, std::span<const int> targets);

}  // namespace sgg

#endif  // SGG_LOSS_H_
