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
#include "synthetic.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "errors.h"
#include "gtest/gtest.h"

namespace sgg {
namespace {

// Canonical JSON of everything a corpus carries, for equality checks.
Json CorpusToJsonForTest(const Corpus& c) {
  Json j{{"O", c.num_object_classes}, {"R", c.num_predicate_classes}, {"meta", c.meta}};
  for (size_t k = 0; k < c.size(); ++k) {
    j["graphs"].push_back(GraphToJson(c.graphs[k]));
    j["x"].push_back(MatToJson(c.features[k].x));
    j["u"].push_back(MatToJson(c.features[k].u.dense()));
    j["codes"].push_back(c.features[k].spatial_codes);
  }
  if (c.rules) j["rules"] = c.rules->predicates;
  return j;
}

GenConfig Small(uint64_t seed) {
  GenConfig g;
  g.num_images = 40;
  g.feature_dim = 8;
  g.union_dim = 8;
  g.seed = seed;
  return g;
}

TEST(GenCorpusTest, DeterministicInSeed) {
  const Corpus a = GenCorpus(Small(3));
  const Corpus b = GenCorpus(Small(3));
  EXPECT_EQ(CorpusToJsonForTest(a), CorpusToJsonForTest(b));
  const Corpus c = GenCorpus(Small(4));
  EXPECT_NE(CorpusToJsonForTest(a), CorpusToJsonForTest(c));
}

TEST(GenCorpusTest, NoiseFreeFeaturesAreClassEmbeddings) {
  const Corpus c = GenCorpus(Small(5));
  // Every node of the same class carries the identical feature row.
  std::vector<std::optional<Vec>> embedding(c.num_object_classes);
  for (size_t k = 0; k < c.size(); ++k) {
    const SceneGraph& g = c.graphs[k];
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      const auto row = c.features[k].x.row(i);
      auto& e = embedding[g.nodes[i].class_id];
      if (!e) {
        e = Vec(row.begin(), row.end());
      } else {
        EXPECT_EQ(*e, Vec(row.begin(), row.end()));
      }
    }
  }
  GenConfig noisy = Small(5);
  noisy.noise_sigma = 0.1;
  const Corpus n = GenCorpus(noisy);
  EXPECT_GT(MaxAbsDiff(n.features[0].x, c.features[0].x), 0.0);
}

TEST(GenCorpusTest, StructuralInvariants) {
  const Corpus c = GenCorpus(Small(6));
  EXPECT_NO_THROW(ValidateCorpus(c));
  EXPECT_NO_THROW(CheckRuleConsistency(c));
  EXPECT_EQ(c.size(), 40u);
  for (size_t k = 0; k < c.size(); ++k) {
    const SceneGraph& g = c.graphs[k];
    EXPECT_GE(g.triplets.size(), 1u);
    EXPECT_GE(g.nodes.size(), 3u);
    EXPECT_LE(g.nodes.size(), 6u);
    for (const Node& n : g.nodes) {
      EXPECT_GE(n.class_id, 1);
      EXPECT_TRUE(n.bbox.Valid());
    }
    // Union features and spatial codes are symmetric.
    const size_t n = g.nodes.size();
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        EXPECT_EQ(c.features[k].spatial_codes[i * n + j], c.features[k].spatial_codes[j * n + i]);
        const auto a = c.features[k].u.At(i, j), b = c.features[k].u.At(j, i);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
      }
    }
  }
}

TEST(GenCorpusTest, TamperedTripletFailsRuleCheck) {
  Corpus c = GenCorpus(Small(7));
  Triplet& t = c.graphs[0].triplets[0];
  t.predicate = t.predicate % (c.num_predicate_classes - 1) + 1;
  EXPECT_THROW(CheckRuleConsistency(c), DataError);
}

TEST(GenCorpusTest, InfeasibleConfigs) {
  GenConfig g = Small(1);
  g.min_nodes = g.max_nodes = 1;
  EXPECT_THROW(GenCorpus(g), ConfigError);
  g = Small(1);
  g.num_object_classes = 1;
  EXPECT_THROW(GenCorpus(g), ConfigError);
  g = Small(1);
  g.noise_sigma = -1.0;
  EXPECT_THROW(GenCorpus(g), ConfigError);
  EXPECT_THROW(GenConfigFromJson(Json{{"bogus", 1}}), ConfigError);
}

TEST(SpatialCodeTest, SymmetricAndInRange) {
  EXPECT_EQ(SpatialCode({0, 0, 10, 10}, {5, 5, 15, 15}), 0);
  EXPECT_EQ(SpatialCode({0, 0, 10, 10}, {0, 50, 10, 60}), 4 + 2);
  for (double dx : {0.0, 20.0, 45.0, 80.0}) {
    for (double dy : {0.0, 20.0, 45.0, 80.0}) {
      const BBox a{0, 0, 10, 10}, b{dx, dy, dx + 10, dy + 10};
      const int code = SpatialCode(a, b);
      EXPECT_EQ(code, SpatialCode(b, a));
      EXPECT_GE(code, 0);
      EXPECT_LT(code, kNumSpatialCodes);
    }
  }
}

TEST(PlantedSharesTest, PowerLaw) {
  const Vec flat = PlantedPredicateShares(5, 0.0);
  EXPECT_EQ(flat[0], 0.0);
  for (int r = 1; r < 5; ++r) EXPECT_NEAR(flat[r], 0.25, 1e-15);
  const Vec tail = PlantedPredicateShares(5, 1.5);
  const double z = 1.0 + std::pow(2.0, -1.5) + std::pow(3.0, -1.5) + std::pow(4.0, -1.5);
  for (int r = 1; r < 5; ++r) EXPECT_NEAR(tail[r], std::pow(r, -1.5) / z, 1e-15);
}

// Uniform predicate marginals at tail exponent 0. Two-node images give
// independent pairs; larger images share node classes across pairs, which
// makes the counts overdispersed relative to a multinomial.
TEST(GenCorpusTest, UniformPredicatesPassChiSquare) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    GenConfig g;
    g.min_nodes = g.max_nodes = 2;
    g.num_images = 1000;
    g.feature_dim = g.union_dim = 4;
    g.seed = seed;
    const std::vector<long> h = PredicateHistogram(GenCorpus(g));
    const long total = std::accumulate(h.begin() + 1, h.end(), 0L);
    const double expected = static_cast<double>(total) / 4.0;
    double stat = 0.0;
    for (int r = 1; r < 5; ++r) stat += std::pow(h[r] - expected, 2.0) / expected;
    const boost::math::chi_squared dist(3.0);
    const double p = boost::math::cdf(boost::math::complement(dist, stat));
    EXPECT_GT(p, 0.01) << "seed " << seed << " chi2 " << stat;
  }
}

std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (size_t i = 0; i < idx.size();) {
    size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

double Spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = Ranks(a), rb = Ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(GenCorpusTest, TrainPriorRecoversPlantedSkew) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    GenConfig g;
    g.num_images = 200;
    g.tail_exponent = 1.5;
    g.feature_dim = g.union_dim = 4;
    g.num_predicate_classes = 8;
    g.seed = seed;
    const Corpus c = GenCorpus(g);
    const Corpus train = Split(c, 0.7, seed).first;
    const FrequencyPrior prior =
        BuildFrequencyPrior(train.graphs, c.num_object_classes, c.num_predicate_classes);
    const Vec planted = PlantedPredicateShares(g.num_predicate_classes, g.tail_exponent);
    std::vector<double> want, got;
    for (int r = 1; r < g.num_predicate_classes; ++r) {
      long n = 0;
      for (int s = 0; s < c.num_object_classes; ++s) {
        for (int o = 0; o < c.num_object_classes; ++o) n += prior.count(s, o, r);
      }
      want.push_back(planted[r]);
      got.push_back(static_cast<double>(n));
    }
    EXPECT_GE(Spearman(want, got), 0.9) << "seed " << seed;
  }
}

TEST(SplitTest, Properties) {
  GenConfig g = Small(2);
  g.num_images = 10;
  const Corpus c = GenCorpus(g);
  const auto [train, test] = Split(c, 0.7, 9);
  EXPECT_EQ(train.size(), 7u);
  EXPECT_EQ(test.size(), 3u);
  std::set<std::string> ids;
  for (const auto& gr : train.graphs) ids.insert(gr.image_id);
  for (const auto& gr : test.graphs) EXPECT_TRUE(ids.insert(gr.image_id).second);
  EXPECT_EQ(ids.size(), 10u);
  const auto again = Split(c, 0.7, 9);
  for (size_t k = 0; k < 7; ++k) EXPECT_EQ(again.first.graphs[k].image_id, train.graphs[k].image_id);
  EXPECT_THROW(Split(c, 1.0, 9), ConfigError);
  EXPECT_THROW(Split(c, 0.0, 9), ConfigError);
}

TEST(CorpusIoTest, RoundTrip) {
  const Corpus c = GenCorpus(Small(11));
  const auto dir = std::filesystem::temp_directory_path() / "sgg_corpus_io_test";
  std::filesystem::remove_all(dir);
  WriteCorpus(c, dir.string());
  const Corpus back = ReadCorpus(dir.string());
  EXPECT_EQ(CorpusToJsonForTest(c), CorpusToJsonForTest(back));
  EXPECT_NO_THROW(CheckRuleConsistency(back));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(ReadCorpus(dir.string()), IoError);
}

}  // namespace
}  // namespace sgg
