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
#include "message_passing.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "errors.h"
#include "gtest/gtest.h"
#include "mp_oracle.h"

namespace sgg {
namespace {

using test::AggregateOracle;
using test::CoefficientOracle;
using test::DmpOracle;
using test::GlobalContextOracle;
using test::Grid;
using test::MaxDiff;
using test::SoftmaxOffDiagonal;


// ---- fixtures ---------------------------------------------------------------

UnionFeatures RandomUnion(size_t n, size_t du, std::mt19937_64& rng) {
  UnionFeatures u(n, du);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) u.SetSymmetric(i, j, RandomUniform(1, du, -1, 1, rng).data());
  }
  return u;
}

DMPParams RandomDmp(size_t d, size_t du, size_t h, bool stacked, std::mt19937_64& rng) {
  DMPParams p = InitDMP(d, du, h, stacked, rng);
  // Non-trivial layer norm affine parameters so the oracle exercises them.
  p.ln_gain = RandomUniform(h, 1, 0.5, 1.5, rng);
  p.ln_bias = RandomUniform(h, 1, -0.3, 0.3, rng);
  return p;
}

void ExpectRowsNormalized(const Mat& a) {
  for (size_t i = 0; i < a.rows(); ++i) {
    EXPECT_EQ(a(i, i), 0.0);
    double s = 0.0;
    for (size_t j = 0; j < a.cols(); ++j) {
      EXPECT_GE(a(i, j), 0.0);
      EXPECT_LE(a(i, j), 1.0);
      s += a(i, j);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

// ---- GCMP / S-GCMP ----------------------------------------------------------

TEST(GcmpTest, MatchesOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat x = RandomUniform(3, 6, -1, 1, rng);
    const GCMPParams p = InitGCMP(6, rng);
    Grid a;
    const Vec w(p.w.values().begin(), p.w.values().end());
    const Grid z = GlobalContextOracle(x, p.w_z, p.w_v, Vec(w.begin(), w.begin() + 6),
                                       Vec(w.begin() + 6, w.end()), &a);
    const MpOutput out = GcmpForward(x, p);
    EXPECT_LT(MaxDiff(out.z, z), 1e-12);
    EXPECT_LT(MaxDiff(out.attention, a), 1e-12);
    ExpectRowsNormalized(out.attention);
  }
}

TEST(GcmpTest, SingleNodeAndResidualIdentity) {
  std::mt19937_64 rng(2);
  const Mat x1 = RandomUniform(1, 4, -1, 1, rng);
  GCMPParams p = InitGCMP(4, rng);
  EXPECT_EQ(GcmpForward(x1, p).z, x1);
  const Mat x = RandomUniform(5, 4, -1, 1, rng);
  p.w_z.Fill(0.0);
  EXPECT_EQ(GcmpForward(x, p).z, x);
  SGCMPParams s = InitSGCMP(4, rng);
  EXPECT_EQ(SgcmpForward(x1, s).z, x1);
  s.w_z.Fill(0.0);
  EXPECT_EQ(SgcmpForward(x, s).z, x);
}

TEST(SgcmpTest, EqualsGcmpWithZeroSelfWeights) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 2 + trial % 5, d = 4 + 2 * (trial % 3);
    const Mat x = RandomUniform(n, d, -1, 1, rng);
    const SGCMPParams s = InitSGCMP(d, rng);
    GCMPParams g{s.w_z, s.w_v, Mat(2 * d, 1)};
    for (size_t k = 0; k < d; ++k) g.w[d + k] = s.w_e[k];
    const MpOutput a = SgcmpForward(x, s);
    const MpOutput b = GcmpForward(x, g);
    EXPECT_LT(MaxAbsDiff(a.z, b.z), 1e-12);
    EXPECT_LT(MaxAbsDiff(a.attention, b.attention), 1e-12);
  }
}

TEST(SgcmpTest, ScoresIdenticalAcrossRows) {
  std::mt19937_64 rng(4);
  const Mat x = RandomUniform(5, 6, -1, 1, rng);
  const SGCMPParams s = InitSGCMP(6, rng);
  const Mat scores = SgcmpScores(x, s);
  for (size_t i = 1; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) EXPECT_EQ(scores(i, j), scores(0, j));
  }
  // Rows of the attention differ only through the masked diagonal entry.
  const Mat a = SgcmpForward(x, s).attention;
  for (size_t i = 0; i < 5; ++i) {
    for (size_t k = 0; k < 5; ++k) {
      for (size_t j = 0; j < 5; ++j) {
        if (j == i || j == k || i == k) continue;
        const size_t l = (j + 1) % 5 == i || (j + 1) % 5 == k ? (j + 2) % 5 : (j + 1) % 5;
        if (l == i || l == k || l == j) continue;
        EXPECT_NEAR(a(i, j) / a(i, l), a(k, j) / a(k, l), 1e-12);
      }
    }
  }
}

// ---- DMP --------------------------------------------------------------------

TEST(DmpTest, CoefficientsMatchScalarOracle) {
  std::mt19937_64 rng(5);
  for (size_t n : {2u, 3u}) {
    const Mat x = RandomUniform(n, 8, -1, 1, rng);
    const UnionFeatures u = RandomUnion(n, 6, rng);
    const DMPParams p = RandomDmp(8, 6, 4, true, rng);
    const Mat e = DmpCoefficients(x, u, p);
    const Grid want = CoefficientOracle(x, u, p);
    EXPECT_LT(MaxDiff(e, want), 1e-10);
  }
}

TEST(DmpTest, DirectionSensitivityAndSymmetryCollapse) {
  std::mt19937_64 rng(6);
  const Mat x = RandomUniform(4, 8, -1, 1, rng);
  const UnionFeatures u = RandomUnion(4, 6, rng);
  DMPParams p = RandomDmp(8, 6, 4, true, rng);
  const Mat e = DmpCoefficients(x, u, p);
  EXPECT_GT(std::abs(e(0, 1) - e(1, 0)), 1e-6);
  p.w_o = p.w_s;
  const Mat sym = DmpCoefficients(x, u, p);
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 4; ++j) EXPECT_EQ(sym(i, j), sym(j, i));
  }
}

TEST(DmpTest, HadamardZeroAbsorbs) {
  std::mt19937_64 rng(7);
  Mat x = RandomUniform(3, 8, -1, 1, rng);
  for (size_t k = 0; k < 8; ++k) x(1, k) = 0.0;
  const UnionFeatures u = RandomUnion(3, 6, rng);
  const DMPParams p = RandomDmp(8, 6, 4, true, rng);
  const Mat e = DmpCoefficients(x, u, p);
  for (size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(e(1, j), 0.0);
    EXPECT_EQ(e(j, 1), 0.0);
  }
}

TEST(DmpTest, MissingUnionFeatureNamesPair) {
  std::mt19937_64 rng(8);
  const Mat x = RandomUniform(3, 8, -1, 1, rng);
  UnionFeatures u(3, 6);
  u.SetSymmetric(0, 1, Vec(6, 0.5));
  u.SetSymmetric(0, 2, Vec(6, 0.5));
  const DMPParams p = RandomDmp(8, 6, 4, true, rng);
  try {
    DmpCoefficients(x, u, p);
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('1'), std::string::npos) << msg;
    EXPECT_NE(msg.find('2'), std::string::npos) << msg;
  }
}

TEST(DmpTest, NormalizeCases) {
  const Mat a = DmpNormalize(Mat(4, 4, 2.5));
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 4; ++j) EXPECT_NEAR(a(i, j), i == j ? 0.0 : 1.0 / 3.0, 1e-15);
  }
  const Mat e = Mat::FromRows({{0, 1, 2}, {0.5, 0, -0.5}, {3, 3, 0}});
  const Mat h = DmpNormalize(e);
  const double e1 = std::exp(1.0), e2 = std::exp(2.0);
  EXPECT_NEAR(h(0, 1), e1 / (e1 + e2), 1e-15);
  EXPECT_NEAR(h(0, 2), e2 / (e1 + e2), 1e-15);
  EXPECT_NEAR(h(1, 0), std::exp(0.5) / (std::exp(0.5) + std::exp(-0.5)), 1e-15);
  EXPECT_NEAR(h(2, 0), 0.5, 1e-15);
  ExpectRowsNormalized(h);
  EXPECT_THROW(DmpNormalize(Mat(1, 1)), DomainError);
}

TEST(DmpTest, AggregateMatchesOracle) {
  std::mt19937_64 rng(9);
  const Mat x = RandomUniform(3, 8, -1, 1, rng);
  const UnionFeatures u = RandomUnion(3, 6, rng);
  const DMPParams p = RandomDmp(8, 6, 4, true, rng);
  const Mat a = DmpNormalize(DmpCoefficients(x, u, p));
  Grid ag(3, std::vector<double>(3));
  for (size_t i = 0; i < 3; ++i) for (size_t j = 0; j < 3; ++j) ag[i][j] = a(i, j);
  const Mat agg = DmpAggregate(a, x, p);
  EXPECT_EQ(agg.cols(), 8u);
  EXPECT_LT(MaxDiff(agg, AggregateOracle(ag, x, p)), 1e-10);
}

TEST(DmpTest, AggregateWidthAtFullSize) {
  std::mt19937_64 rng(10);
  const DMPParams p = InitDMP(512, 4, 128, true, rng);
  EXPECT_EQ(p.w_t3.rows(), 256u);
  const Mat x = RandomUniform(2, 512, -1, 1, rng);
  EXPECT_EQ(DmpAggregate(Mat::FromRows({{0, 1}, {1, 0}}), x, p).cols(), 512u);
}

TEST(DmpTest, SingleNeighborSelector) {
  std::mt19937_64 rng(11);
  const Mat x = RandomUniform(2, 8, -1, 1, rng);
  const DMPParams p = RandomDmp(8, 6, 4, true, rng);
  const Mat agg = DmpAggregate(Mat::FromRows({{0, 1}, {1, 0}}), x, p);
  const Vec m = MatVec(p.w_t3, x.row(1));
  for (size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(agg(0, k), m[k], 1e-15);
    EXPECT_NEAR(agg(0, 4 + k), m[k], 1e-15);
  }
}

TEST(DmpTest, ForwardMatchesOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat x = RandomUniform(3, 16, -1, 1, rng);
    const UnionFeatures u = RandomUnion(3, 8, rng);
    const DMPParams p = RandomDmp(16, 8, 8, true, rng);
    const MpOutput out = DmpForward(x, u, p);
    EXPECT_LT(MaxDiff(out.z, DmpOracle(x, u, p)), 1e-10);
    EXPECT_TRUE(out.z.AllFinite());
    ExpectRowsNormalized(out.attention);
  }
}

TEST(DmpTest, ResidualIdentityAndSingleNode) {
  std::mt19937_64 rng(13);
  const Mat x = RandomUniform(4, 8, -1, 1, rng);
  const UnionFeatures u = RandomUnion(4, 6, rng);
  DMPParams p = RandomDmp(8, 6, 4, true, rng);
  DMPParams q = RandomDmp(8, 6, 4, false, rng);
  const Mat x1 = RandomUniform(1, 8, -1, 1, rng);
  EXPECT_EQ(DmpForward(x1, UnionFeatures(1, 6), p).z, x1);
  EXPECT_EQ(NoStackForward(x1, UnionFeatures(1, 6), q).z, x1);
  p.w_t1.Fill(0.0);
  q.w_t1.Fill(0.0);
  EXPECT_EQ(DmpForward(x, u, p).z, x);
  EXPECT_EQ(NoStackForward(x, u, q).z, x);
}

TEST(DmpTest, NoStackMatchesStackedWhenAttentionSymmetric) {
  // With two nodes every row has a single neighbor, so alpha_ij = alpha_ji = 1.
  std::mt19937_64 rng(14);
  const Mat x = RandomUniform(2, 8, -1, 1, rng);
  const UnionFeatures u = RandomUnion(2, 6, rng);
  const DMPParams p = RandomDmp(8, 6, 4, true, rng);
  DMPParams q = p;
  q.stacked = false;
  q.w_t3 = Mat(8, 8);
  for (size_t r = 0; r < 4; ++r) {
    for (size_t c = 0; c < 8; ++c) q.w_t3(r, c) = q.w_t3(r + 4, c) = p.w_t3(r, c);
  }
  const MpOutput a = DmpForward(x, u, p);
  const MpOutput b = NoStackForward(x, u, q);
  EXPECT_EQ(b.z.cols(), 8u);
  EXPECT_LT(MaxAbsDiff(a.z, b.z), 1e-12);
}

TEST(DmpTest, PermutationEquivariance) {
  std::mt19937_64 rng(15);
  const size_t n = 5;
  const Mat x = RandomUniform(n, 8, -1, 1, rng);
  const UnionFeatures u = RandomUnion(n, 6, rng);
  const DMPParams p = RandomDmp(8, 6, 4, true, rng);
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Mat px(n, 8);
  UnionFeatures pu(n, 6);
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < 8; ++k) px(perm[i], k) = x(i, k);
    for (size_t j = i + 1; j < n; ++j) pu.SetSymmetric(perm[i], perm[j], u.At(i, j));
  }
  const MpOutput a = DmpForward(x, u, p);
  const MpOutput b = DmpForward(px, pu, p);
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < 8; ++k) EXPECT_NEAR(a.z(i, k), b.z(perm[i], k), 1e-12);
    for (size_t j = 0; j < n; ++j) {
      EXPECT_NEAR(a.attention(i, j), b.attention(perm[i], perm[j]), 1e-12);
    }
  }
}

TEST(DmpTest, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(16);
  const Mat x = RandomUniform(4, 16, -1, 1, rng);
  const UnionFeatures u = RandomUnion(4, 8, rng);
  const DMPParams p = RandomDmp(16, 8, 4, true, rng);
  DiffOp op{"dmp_x", {"x"},
            [&](std::span<const Mat> in) { return DmpForward(in[0], u, p).z; },
            [&](std::span<const Mat> in, const Mat& g) {
              DmpCache cache;
              DmpForward(in[0], u, p, &cache);
              DMPParams grads = ZerosLike(p);
              return std::vector<Mat>{DmpBackward(in[0], u, p, cache, g, grads).dx};
            }};
  const GradCheckReport r = FiniteDiffCheck(op, {x});
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  EXPECT_LE(r.max_rel_error, 1e-5);
}

TEST(UnionFeaturesTest, SymmetricStorageAndErrors) {
  UnionFeatures u(3, 2);
  u.SetSymmetric(0, 2, Vec{1.0, 2.0});
  EXPECT_TRUE(u.Has(2, 0));
  EXPECT_FALSE(u.Has(0, 1));
  EXPECT_EQ(u.At(2, 0)[1], 2.0);
  EXPECT_THROW(u.At(0, 1), DataError);
}

TEST(AttentionExportTest, TwoByTwoText) {
  EXPECT_EQ(AttentionCsv(Mat::FromRows({{0, 1}, {1, 0}})), "0,1\n1,0\n");
  EXPECT_EQ(AttentionCsv(Mat::FromRows({{0, 0.123456789}})), "0,0.123457\n");
}

TEST(AttentionExportTest, RoundTrip) {
  std::mt19937_64 rng(17);
  const Mat x = RandomUniform(4, 8, -1, 1, rng);
  const UnionFeatures u = RandomUnion(4, 6, rng);
  const Mat a = DmpForward(x, u, RandomDmp(8, 6, 4, true, rng)).attention;
  const std::string path =
      (std::filesystem::temp_directory_path() / "sgg_attention_test.csv").string();
  ExportAttention(a, path);
  const Mat back = ReadAttentionCsv(path);
  EXPECT_LT(MaxAbsDiff(a, back), 1e-6);
  for (size_t i = 0; i < 4; ++i) EXPECT_EQ(back(i, i), 0.0);
  std::filesystem::remove(path);
  EXPECT_THROW(ExportAttention(a, "/nonexistent-dir/a.csv"), IoError);
}

}  // namespace
}  // namespace sgg
