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
#include "linalg.h"

#include <cmath>
#include <numeric>
#include <random>

#include "errors.h"
#include "gtest/gtest.h"
#include "json_util.h"

namespace sgg {
namespace {

TEST(MatTest, RejectsBadExtents) {
  EXPECT_THROW(Mat(0, 3), DimensionError);
  EXPECT_THROW(Mat(2, 2, Vec{1.0, 2.0, 3.0}), DimensionError);
  EXPECT_THROW(Mat::FromRows({{1.0, 2.0}, {3.0}}), DimensionError);
}

TEST(MatTest, JsonRoundTrip) {
  const Mat m = Mat::FromRows({{1.5, -2.0, 3.0}, {0.0, 1e-300, 7.25}});
  EXPECT_EQ(MatFromJson(MatToJson(m)), m);
  EXPECT_THROW(MatFromJson(Json{{"rows", 2}, {"cols", 2}, {"data", {1.0}}}), DimensionError);
  EXPECT_THROW(MatFromJson(Json{{"rows", 2}}), DataError);
}

TEST(MatMulTest, IdentityIsNeutral) {
  std::mt19937_64 rng(3);
  const Mat m = RandomUniform(3, 4, -1.0, 1.0, rng);
  EXPECT_EQ(MatMul(Mat::Identity(3), m), m);
}

TEST(MatMulTest, HandExample) {
  const Mat a = Mat::FromRows({{1, 2}, {3, 4}});
  const Mat b = Mat::FromRows({{1}, {1}});
  EXPECT_EQ(MatMul(a, b), Mat::FromRows({{3}, {7}}));
}

TEST(MatMulTest, ShapeMismatchNamesBothShapes) {
  try {
    MatMul(Mat(2, 3), Mat(2, 2));
    FAIL() << "expected a dimension error";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("2x2"), std::string::npos) << msg;
  }
}

TEST(MatMulTest, BackwardIsLinearInUpstream) {
  std::mt19937_64 rng(5);
  const Mat a = RandomUniform(2, 3, -1, 1, rng);
  const Mat b = RandomUniform(3, 4, -1, 1, rng);
  const Mat g1 = RandomUniform(2, 4, -1, 1, rng);
  const Mat g2 = RandomUniform(2, 4, -1, 1, rng);
  const MatMulGrad sum = MatMulBackward(a, b, g1 + 2.0 * g2);
  const MatMulGrad r1 = MatMulBackward(a, b, g1);
  const MatMulGrad r2 = MatMulBackward(a, b, g2);
  EXPECT_LT(MaxAbsDiff(sum.da, r1.da + 2.0 * r2.da), 1e-14);
  EXPECT_LT(MaxAbsDiff(sum.db, r1.db + 2.0 * r2.db), 1e-14);
}

TEST(HadamardTest, Cases) {
  const Mat a = Mat::FromRows({{1, 2}});
  EXPECT_EQ(Hadamard(a, Mat(1, 2, 1.0)), a);
  EXPECT_EQ(Hadamard(a, Mat::FromRows({{3, 4}})), Mat::FromRows({{3, 8}}));
  EXPECT_EQ(Hadamard(a, Mat(1, 2, 0.0)), Mat(1, 2, 0.0));
  EXPECT_THROW(Hadamard(a, Mat(2, 1)), DimensionError);
}

TEST(SoftmaxTest, Symmetric) {
  const Vec p = SoftmaxRow(Vec{0.0, 0.0});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(SoftmaxTest, LargeInputsDoNotOverflow) {
  const Vec p = SoftmaxRow(Vec{1000.0, 0.0});
  EXPECT_TRUE(std::isfinite(p[0]) && std::isfinite(p[1]));
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
}

TEST(SoftmaxTest, MaskedEntryExcluded) {
  const double a = 0.3, b = 5.0, c = -1.2;
  const std::vector<size_t> mask = {1};
  const Vec p = SoftmaxRow(Vec{a, b, c}, mask);
  const double za = std::exp(a), zc = std::exp(c);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(p[0], za / (za + zc), 1e-15);
  EXPECT_NEAR(p[2], zc / (za + zc), 1e-15);
}

TEST(SoftmaxTest, AllMaskedIsAnError) {
  const std::vector<size_t> mask = {0, 1};
  EXPECT_THROW(SoftmaxRow(Vec{1.0, 2.0}, mask), DomainError);
}

TEST(SoftmaxTest, SumsToOneAndShiftInvariant) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const std::vector<size_t> mask = {2};
  for (int trial = 0; trial < 50; ++trial) {
    Vec v(7);
    for (double& x : v) x = u(rng);
    const Vec p = SoftmaxRow(v, mask);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    Vec shifted = v;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i != 2) shifted[i] += 3.7;
    }
    EXPECT_LT(MaxAbsDiff(p, SoftmaxRow(shifted, mask)), 1e-12);
  }
}

TEST(LogSoftmaxTest, UniformVector) {
  const Vec out = LogSoftmax(Vec(5, 0.7));
  for (double x : out) EXPECT_NEAR(x, -std::log(5.0), 1e-15);
}

TEST(LogSoftmaxTest, ClosedForm) {
  const Vec out = LogSoftmax(Vec{0.0, std::log(3.0)});
  EXPECT_NEAR(out[0], -std::log(4.0), 1e-15);
  EXPECT_NEAR(out[1], std::log(3.0) - std::log(4.0), 1e-15);
}

TEST(LogSoftmaxTest, MatchesLogOfSoftmax) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec v(6);
    for (double& x : v) x = u(rng);
    const Vec ls = LogSoftmax(v);
    const Vec p = SoftmaxRow(v);
    double total = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
      EXPECT_NEAR(ls[i], std::log(p[i]), 1e-12);
      total += std::exp(ls[i]);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(ActivationTest, SigmoidAndRelu) {
  EXPECT_DOUBLE_EQ(Sigmoid(Vec{0.0})[0], 0.5);
  EXPECT_EQ(Relu(Vec{-1.0, 2.0}), (Vec{0.0, 2.0}));
  for (double x : {-30.0, -2.5, -0.1, 0.0, 0.4, 3.0, 30.0}) {
    EXPECT_NEAR(SigmoidScalar(x) + SigmoidScalar(-x), 1.0, 1e-15);
  }
  // Subgradient 0 at the kink.
  EXPECT_EQ(ReluBackward(Vec{0.0}, Vec{1.0})[0], 0.0);
}

TEST(LayerNormTest, ConstantVectorMapsToZero) {
  const Vec out = LayerNorm(Vec(4, 2.5), Vec(4, 1.0), Vec(4, 0.0));
  for (double x : out) EXPECT_EQ(x, 0.0);
}

TEST(LayerNormTest, TwoPointClosedForm) {
  const Vec out = LayerNorm(Vec{1.0, 3.0}, Vec(2, 1.0), Vec(2, 0.0), 1e-14);
  EXPECT_NEAR(out[0], -1.0, 1e-12);
  EXPECT_NEAR(out[1], 1.0, 1e-12);
}

TEST(LayerNormTest, ZeroMeanUnitVarianceAndShiftInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    Vec v(9);
    for (double& x : v) x = u(rng);
    const Vec out = LayerNorm(v, Vec(9, 1.0), Vec(9, 0.0));
    const double mean = std::accumulate(out.begin(), out.end(), 0.0) / 9.0;
    double var = 0.0;
    for (double x : out) var += (x - mean) * (x - mean) / 9.0;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-3);
    Vec shifted = v;
    for (double& x : shifted) x += 11.0;
    EXPECT_LT(MaxAbsDiff(out, LayerNorm(shifted, Vec(9, 1.0), Vec(9, 0.0))), 1e-12);
  }
}

TEST(KronStack2Test, Cases) {
  const Vec m = {1.0, -2.0, 0.5};
  EXPECT_EQ(KronStack2(1.0, 0.0, m), (Vec{1.0, -2.0, 0.5, 0.0, 0.0, 0.0}));
  EXPECT_EQ(KronStack2(0.3, 0.3, m), (Vec{0.3, -0.6, 0.15, 0.3, -0.6, 0.15}));
  EXPECT_EQ(KronStack2(2.0, 3.0, Vec{1.0, 1.0}), (Vec{2.0, 2.0, 3.0, 3.0}));
}

TEST(KronStack2Test, NormIdentity) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = u(rng), b = u(rng);
    Vec m(5);
    for (double& x : m) x = u(rng);
    EXPECT_NEAR(SquaredNorm(KronStack2(a, b, m)), (a * a + b * b) * SquaredNorm(m), 1e-12);
  }
}

DiffOp Square() {
  return {"square", {"x"},
          [](std::span<const Mat> in) { return Mat(1, 1, in[0][0] * in[0][0]); },
          [](std::span<const Mat> in, const Mat& g) {
            return std::vector<Mat>{Mat(1, 1, 2.0 * in[0][0] * g[0])};
          }};
}

TEST(FiniteDiffTest, SquareAtOne) {
  const GradCheckReport r = FiniteDiffCheck(Square(), {Mat(1, 1, 1.0)});
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_rel_error, 1e-8);
  EXPECT_EQ(r.entries_checked, 1u);
}

TEST(FiniteDiffTest, MatmulSumComposite) {
  DiffOp op{"matmul_sum", {"a", "b"},
            [](std::span<const Mat> in) {
              const Mat p = MatMul(in[0], in[1]);
              double s = 0.0;
              for (double x : p.data()) s += x;
              return Mat(1, 1, s);
            },
            [](std::span<const Mat> in, const Mat& g) {
              const Mat ones(in[0].rows(), in[1].cols(), g[0]);
              MatMulGrad r = MatMulBackward(in[0], in[1], ones);
              return std::vector<Mat>{r.da, r.db};
            }};
  std::mt19937_64 rng(23);
  const GradCheckReport r =
      FiniteDiffCheck(op, {RandomUniform(3, 4, -1, 1, rng), RandomUniform(4, 2, -1, 1, rng)});
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(FiniteDiffTest, ReluKinkIsFlaggedNotFailed) {
  DiffOp op{"relu", {"v"},
            [](std::span<const Mat> in) {
              return Mat(1, in[0].cols(), Relu(in[0].row(0)));
            },
            [](std::span<const Mat> in, const Mat& g) {
              return std::vector<Mat>{Mat(1, in[0].cols(), ReluBackward(in[0].row(0), g.row(0)))};
            }};
  const GradCheckReport r = FiniteDiffCheck(op, {Mat::FromRows({{0.0, 0.5, -0.5}})});
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.kinks_skipped, 1u);
  EXPECT_EQ(r.entries_checked, 2u);
}

TEST(FiniteDiffTest, WrongBackwardFails) {
  DiffOp op = Square();
  op.backward = [](std::span<const Mat> in, const Mat& g) {
    return std::vector<Mat>{Mat(1, 1, -2.0 * in[0][0] * g[0])};
  };
  const GradCheckReport r = FiniteDiffCheck(op, {Mat(1, 1, 1.5)});
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst_input, "x");
}

TEST(FiniteDiffTest, NonFiniteForwardAborts) {
  DiffOp op{"log", {"x"},
            [](std::span<const Mat> in) { return Mat(1, 1, std::log(in[0][0])); },
            [](std::span<const Mat> in, const Mat& g) {
              return std::vector<Mat>{Mat(1, 1, g[0] / in[0][0])};
            }};
  EXPECT_THROW(FiniteDiffCheck(op, {Mat(1, 1, -1.0)}), NumericalError);
}

}  // namespace
}  // namespace sgg
