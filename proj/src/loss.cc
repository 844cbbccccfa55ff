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
#include "loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.h"

namespace sgg {
namespace {

void CheckProbability(double p) {
  if (!(p > 0.0) || p > 1.0) {
    throw DomainError("loss: probability " + std::to_string(p) + " outside (0, 1]");
  }
}

void CheckBatch(const Mat& logits, std::span<const int> targets) {
  if (logits.rows() != targets.size()) {
    throw DimensionError("loss: " + std::to_string(logits.rows()) + " rows but " +
                         std::to_string(targets.size()) + " targets");
  }
  for (int t : targets) {
    if (t < 0 || static_cast<size_t>(t) >= logits.cols()) {
      throw RangeError("loss: target class " + std::to_string(t) + " outside [0, " +
                       std::to_string(logits.cols()) + ")");
    }
  }
}

}  // namespace

double GammaMap(double theta, double mu) {
  if (!(mu > 0.0)) throw DomainError("gamma map: mu must be positive");
  if (!(theta >= 0.0) || theta > 1.0) {
    throw DomainError("gamma map: theta " + std::to_string(theta) + " outside [0, 1]");
  }
  if (theta == 0.0) return kGammaCap;
  const double raw = -std::pow(1.0 - theta, mu) * std::log(theta);
  // -0.0 at theta == 1 would print oddly; the value is exactly zero there.
  return std::min(kGammaCap, raw + 0.0);
}

double FocalLoss(double p, double gamma) {
  CheckProbability(p);
  if (gamma < 0.0) throw DomainError("focal loss: negative gamma");
  if (p == 1.0) return 0.0;
  return -std::pow(1.0 - p, gamma) * std::log(p);
}

double NpsLoss(double p, double theta, const LossConfig& config) {
  return FocalLoss(p, GammaMap(theta, config.mu));
}

double FocalLossDerivative(double p, double gamma) {
  const double q = 1.0 - p;
  // d/dp [-(q^gamma) ln p] = gamma q^(gamma-1) ln p - q^gamma / p
  const double first = (gamma > 0.0 && q > 0.0) ? gamma * std::pow(q, gamma - 1.0) * std::log(p)
                                                 : 0.0;
  return first - std::pow(q, gamma) / p;
}

BatchLoss NpsLossBatch(const Mat& logits, std::span<const int> targets,
                       std::span<const double> thetas, const LossConfig& config) {
  CheckBatch(logits, targets);
  if (thetas.size() != targets.size()) {
    throw DimensionError("nps loss: " + std::to_string(thetas.size()) + " priorities for " +
                         std::to_string(targets.size()) + " nodes");
  }
  const size_t n = logits.rows();
  BatchLoss out{0.0, Mat::ZerosLike(logits)};
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec probs = SoftmaxRow(logits.row(i));
    const size_t t = static_cast<size_t>(targets[i]);
    const double p = std::clamp(probs[t], kProbabilityFloor, 1.0);
    const double gamma = GammaMap(thetas[i], config.mu);
    out.mean += FocalLoss(p, gamma) * scale;
    // softmax backward of a loss that only reads p_t:
    // dL/dlogit_k = dL/dp_t * p_t * (delta_tk - p_k)
    const double dp = FocalLossDerivative(p, gamma);
    auto row = out.dlogits.row(i);
    for (size_t k = 0; k < probs.size(); ++k) {
      const double delta = k == t ? 1.0 : 0.0;
      row[k] = scale * dp * probs[t] * (delta - probs[k]);
    }
  }
  return out;
}

BatchLoss CrossEntropyBatch(const Mat& logits, std::span<const int> targets) {
  CheckBatch(logits, targets);
  const size_t n = logits.rows();
  BatchLoss out{0.0, Mat::ZerosLike(logits)};
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec logp = LogSoftmax(logits.row(i));
    const size_t t = static_cast<size_t>(targets[i]);
    out.mean -= logp[t] * scale;
    auto row = out.dlogits.row(i);
    for (size_t k = 0; k < logp.size(); ++k) {
      row[k] = scale * (std::exp(logp[k]) - (k == t ? 1.0 : 0.0));
    }
  }
  return out;
}

}  // namespace sgg
