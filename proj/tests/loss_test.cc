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

#include <cmath>
#include <random>

#include "errors.h"
#include "gtest/gtest.h"

namespace sgg {
namespace {

TEST(GammaMapTest, Examples) {
  EXPECT_EQ(GammaMap(1.0, 4.0), 0.0);
  // 0.5^4 * ln 2 to 20 digits.
  EXPECT_NEAR(GammaMap(0.5, 4.0), 0.043321698784996581838, 1e-15);
  EXPECT_EQ(GammaMap(0.01, 4.0), 2.0);
  EXPECT_GT(std::pow(0.99, 4.0) * std::log(100.0), 2.0);
  EXPECT_EQ(GammaMap(0.0, 4.0), 2.0);
}

TEST(GammaMapTest, DomainErrors) {
  EXPECT_THROW(GammaMap(-0.1, 4.0), DomainError);
  EXPECT_THROW(GammaMap(1.1, 4.0), DomainError);
  EXPECT_THROW(GammaMap(0.5, 0.0), DomainError);
}

TEST(GammaMapTest, GridProperties) {
  const int kPoints = 1000;
  for (double mu : {3.0, 4.0, 5.0}) {
    double prev = GammaMap(1e-9, mu);
    EXPECT_EQ(prev, 2.0) << "cap inactive at mu " << mu;
    for (int k = 1; k <= kPoints; ++k) {
      const double theta = static_cast<double>(k) / kPoints;
      const double g = GammaMap(theta, mu);
      EXPECT_GE(g, 0.0);
      EXPECT_LE(g, 2.0);
      EXPECT_LE(g, prev + 1e-12) << "theta " << theta;
      prev = g;
      if (theta < 1.0 && mu < 5.0) {
        EXPECT_GE(GammaMap(theta, mu) + 1e-12, GammaMap(theta, mu + 1.0));
      }
    }
  }
}

TEST(NpsLossTest, Examples) {
  const LossConfig config;
  for (double p : {0.01, 0.3, 0.9}) EXPECT_EQ(NpsLoss(p, 1.0, config), -std::log(p));
  EXPECT_EQ(NpsLoss(1.0, 0.3, config), 0.0);
  EXPECT_NEAR(NpsLoss(0.5, 0.01, config), 0.25 * std::log(2.0), 1e-15);
  EXPECT_THROW(NpsLoss(0.0, 0.5, config), DomainError);
  EXPECT_THROW(NpsLoss(1.5, 0.5, config), DomainError);
}

TEST(FocalLossTest, Examples) {
  EXPECT_EQ(FocalLoss(0.3, 0.0), -std::log(0.3));
  EXPECT_EQ(FocalLoss(1.0, 2.0), 0.0);
  EXPECT_NEAR(FocalLoss(0.5, 2.0), 0.17328679513998632, 1e-15);
  EXPECT_THROW(FocalLoss(-0.1, 2.0), DomainError);
}

TEST(NpsLossTest, MonotoneAndBoundedByFocal) {
  const LossConfig config;
  for (double theta : {0.0, 0.05, 0.2, 0.5, 0.9, 1.0}) {
    double prev = 1e300;
    for (int k = 1; k <= 200; ++k) {
      const double p = k / 200.0;
      const double l = NpsLoss(p, theta, config);
      EXPECT_LE(l, prev);
      EXPECT_GE(l, 0.0);
      EXPECT_LE(l, -std::log(p) + 1e-15);
      EXPECT_GE(l + 1e-15, FocalLoss(p, 2.0));
      prev = l;
    }
  }
}

TEST(FocalLossTest, DerivativeMatchesDifferenceQuotient) {
  for (double gamma : {0.0, 0.5, 2.0}) {
    for (double p : {0.1, 0.4, 0.8}) {
      const double h = 1e-6;
      const double num = (FocalLoss(p + h, gamma) - FocalLoss(p - h, gamma)) / (2 * h);
      EXPECT_NEAR(FocalLossDerivative(p, gamma), num, 1e-7);
    }
  }
}

TEST(NpsLossBatchTest, ReducesToCrossEntropyAtThetaOne) {
  std::mt19937_64 rng(1);
  const Mat logits = RandomUniform(5, 4, -2, 2, rng);
  const std::vector<int> targets = {0, 3, 1, 2, 2};
  const std::vector<double> ones(5, 1.0);
  const BatchLoss a = NpsLossBatch(logits, targets, ones, LossConfig{});
  const BatchLoss b = CrossEntropyBatch(logits, targets);
  EXPECT_NEAR(a.mean, b.mean, 1e-14);
  EXPECT_LT(MaxAbsDiff(a.dlogits, b.dlogits), 1e-14);
}

TEST(NpsLossBatchTest, SingleSampleMatchesScalar) {
  const Mat logits = Mat::FromRows({{0.2, -1.0, 0.7}});
  const std::vector<int> t = {1};
  const std::vector<double> th = {0.25};
  const double e0 = std::exp(0.2), e1 = std::exp(-1.0), e2 = std::exp(0.7);
  const double p = e1 / (e0 + e1 + e2);
  EXPECT_NEAR(NpsLossBatch(logits, t, th, LossConfig{}).mean, NpsLoss(p, 0.25, LossConfig{}),
              1e-14);
}

TEST(NpsLossBatchTest, LengthMismatch) {
  const Mat logits(3, 4);
  const std::vector<int> t = {0, 1};
  const std::vector<double> th = {0.5, 0.5, 0.5};
  EXPECT_THROW(NpsLossBatch(logits, t, th, LossConfig{}), DimensionError);
}

TEST(NpsLossBatchTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  const std::vector<int> targets = {0, 3, 1, 2, 2, 1};
  const std::vector<double> thetas = {0.0, 0.2, 0.5, 1.0, 0.01, 0.75};
  for (double mu : {3.0, 4.0, 5.0}) {
    const LossConfig config{mu};
    DiffOp op{"nps", {"logits"},
              [&](std::span<const Mat> in) {
                return Mat(1, 1, NpsLossBatch(in[0], targets, thetas, config).mean);
              },
              [&](std::span<const Mat> in, const Mat& g) {
                return std::vector<Mat>{g[0] * NpsLossBatch(in[0], targets, thetas, config).dlogits};
              }};
    GradCheckOptions opts;
    opts.tolerance = 1e-6;
    const GradCheckReport r = FiniteDiffCheck(op, {RandomUniform(6, 4, -2, 2, rng)}, opts);
    EXPECT_TRUE(r.passed) << r.max_rel_error;
  }
}

}  // namespace
}  // namespace sgg
