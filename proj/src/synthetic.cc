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
#include <cstdio>
#include <random>
#include <set>
#include <tuple>

#include "errors.h"
#include "seed.h"

namespace sgg {
namespace {

constexpr int kMaxImageAttempts = 1000;

// Largest-remainder apportionment of `total` slots; ties go to the lower index.
std::vector<long> Apportion(const Vec& shares, long total) {
  std::vector<long> out(shares.size(), 0);
  std::vector<std::pair<double, size_t>> remainders;
  long assigned = 0;
  for (size_t k = 0; k < shares.size(); ++k) {
    const double exact = shares[k] * static_cast<double>(total);
    out[k] = static_cast<long>(std::floor(exact));
    assigned += out[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t k = 0; assigned < total && k < remainders.size(); ++k, ++assigned) {
    ++out[remainders[k].second];
  }
  return out;
}

RuleTable PlantRules(const GenConfig& c, std::mt19937_64& rng, std::vector<long>* quota) {
  const int o = c.num_object_classes;
  const long cells = static_cast<long>(o - 1) * (o - 1);
  const long fg_classes = c.num_predicate_classes - 1;
  const long groups = std::max<long>(
      1, std::lround(c.rel_density * static_cast<double>(cells) / static_cast<double>(fg_classes)));
  const long per_code = std::min(cells, fg_classes * groups);
  *quota = Apportion(PlantedPredicateShares(c.num_predicate_classes, c.tail_exponent),
                     per_code * kNumSpatialCodes);

  // Deal each predicate's slots round-robin over the codes so every code sees
  // nearly the same predicate mix.
  std::vector<std::vector<int>> dealt(kNumSpatialCodes);
  int cursor = 0;
  for (int r = 1; r < c.num_predicate_classes; ++r) {
    for (long k = 0; k < (*quota)[static_cast<size_t>(r)]; ++k) {
      while (static_cast<long>(dealt[static_cast<size_t>(cursor)].size()) == per_code) {
        cursor = (cursor + 1) % kNumSpatialCodes;
      }
      dealt[static_cast<size_t>(cursor)].push_back(r);
      cursor = (cursor + 1) % kNumSpatialCodes;
    }
  }

  RuleTable rules;
  rules.num_object_classes = o;
  rules.num_codes = kNumSpatialCodes;
  rules.predicates.assign(static_cast<size_t>(o) * o * kNumSpatialCodes, kBackgroundPredicate);
  std::vector<std::pair<int, int>> class_pairs;
  for (int s = 1; s < o; ++s) {
    for (int t = 1; t < o; ++t) class_pairs.emplace_back(s, t);
  }
  for (int code = 0; code < kNumSpatialCodes; ++code) {
    std::shuffle(class_pairs.begin(), class_pairs.end(), rng);
    const auto& preds = dealt[static_cast<size_t>(code)];
    for (size_t k = 0; k < preds.size(); ++k) {
      const auto [s, t] = class_pairs[k];
      rules.predicates[(static_cast<size_t>(s) * o + t) * kNumSpatialCodes + code] = preds[k];
    }
  }
  return rules;
}

Mat GaussianMat(size_t rows, size_t cols, double sigma, std::mt19937_64& rng) {
  Mat m(rows, cols);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

BBox RandomBox(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> side(10.0, 40.0);
  const double w = side(rng);
  const double h = side(rng);
  const double x1 = std::uniform_real_distribution<double>(0.0, kCanvasSize - w)(rng);
  const double y1 = std::uniform_real_distribution<double>(0.0, kCanvasSize - h)(rng);
  return {x1, y1, x1 + w, y1 + h};
}

struct Generator {
  const GenConfig& config;
  const RuleTable& rules;
  Mat embeddings;   // O x d
  Mat mixer;        // d_u x d
  Mat code_embed;   // 8 x d_u

  // Returns false when the sampled layout has no foreground pair.
  bool TryImage(std::mt19937_64& rng, SceneGraph& g, ImageFeatures& f) const {
    const size_t n = std::uniform_int_distribution<size_t>(config.min_nodes,
                                                           config.max_nodes)(rng);
    std::uniform_int_distribution<int> cls(1, config.num_object_classes - 1);
    g.nodes.assign(n, Node{});
    for (Node& node : g.nodes) {
      node.class_id = cls(rng);
      node.bbox = RandomBox(rng);
    }
    g.triplets.clear();
    f.spatial_codes.assign(n * n, -1);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const int code = SpatialCode(g.nodes[i].bbox, g.nodes[j].bbox);
        f.spatial_codes[i * n + j] = code;
        const int p = rules.At(g.nodes[i].class_id, g.nodes[j].class_id, code);
        if (p != kBackgroundPredicate) g.triplets.push_back({i, p, j, std::nullopt});
      }
    }
    if (g.triplets.empty()) return false;

    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = config.noise_sigma;
    f.x = Mat(n, config.feature_dim);
    for (size_t i = 0; i < n; ++i) {
      const auto e = embeddings.row(static_cast<size_t>(g.nodes[i].class_id));
      for (size_t k = 0; k < config.feature_dim; ++k) {
        f.x(i, k) = e[k] + (sigma > 0.0 ? sigma * noise(rng) : 0.0);
      }
    }
    f.u = UnionFeatures(n, config.union_dim);
    Vec sum(config.feature_dim);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        const auto ei = embeddings.row(static_cast<size_t>(g.nodes[i].class_id));
        const auto ej = embeddings.row(static_cast<size_t>(g.nodes[j].class_id));
        for (size_t k = 0; k < sum.size(); ++k) sum[k] = ei[k] + ej[k];
        Vec u = MatVec(mixer, sum);
        const auto code = code_embed.row(static_cast<size_t>(f.spatial_codes[i * n + j]));
        for (size_t k = 0; k < u.size(); ++k) {
          u[k] += code[k] + (sigma > 0.0 ? sigma * noise(rng) : 0.0);
        }
        f.u.SetSymmetric(i, j, u);
      }
    }
    return true;
  }
};

}  // namespace

void ValidateGenConfig(const GenConfig& c) {
  if (c.num_object_classes < 2) throw ConfigError("gen: num_object_classes must be >= 2");
  if (c.num_predicate_classes < 2) throw ConfigError("gen: num_predicate_classes must be >= 2");
  if (c.feature_dim == 0 || c.union_dim == 0) {
    throw ConfigError("gen: feature_dim and union_dim must be positive");
  }
  if (c.num_images == 0) throw ConfigError("gen: num_images must be positive");
  if (c.min_nodes < 2) {
    throw ConfigError("gen: min_nodes must be >= 2 (an image needs a pair to hold a triplet)");
  }
  if (c.max_nodes < c.min_nodes) throw ConfigError("gen: max_nodes must be >= min_nodes");
  if (!(c.noise_sigma >= 0.0) || !std::isfinite(c.noise_sigma)) {
    throw ConfigError("gen: noise_sigma must be finite and >= 0");
  }
  if (!std::isfinite(c.tail_exponent) || c.tail_exponent < 0.0) {
    throw ConfigError("gen: tail_exponent must be finite and >= 0");
  }
  if (!(c.rel_density > 0.0 && c.rel_density <= 1.0)) {
    throw ConfigError("gen: rel_density must lie in (0, 1]");
  }
}

Json GenConfigToJson(const GenConfig& c) {
  return Json{{"num_object_classes", c.num_object_classes},
              {"num_predicate_classes", c.num_predicate_classes},
              {"feature_dim", c.feature_dim},
              {"union_dim", c.union_dim},
              {"num_images", c.num_images},
              {"min_nodes", c.min_nodes},
              {"max_nodes", c.max_nodes},
              {"noise_sigma", c.noise_sigma},
              {"tail_exponent", c.tail_exponent},
              {"rel_density", c.rel_density},
              {"seed", c.seed}};
}

GenConfig GenConfigFromJson(const Json& j, GenConfig c) {
  if (!j.is_object()) throw ConfigError("gen: expected a JSON object");
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
      } else if (key == "num_images") {
        c.num_images = value.get<size_t>();
      } else if (key == "min_nodes") {
        c.min_nodes = value.get<size_t>();
      } else if (key == "max_nodes") {
        c.max_nodes = value.get<size_t>();
      } else if (key == "noise_sigma") {
        c.noise_sigma = value.get<double>();
      } else if (key == "tail_exponent") {
        c.tail_exponent = value.get<double>();
      } else if (key == "rel_density") {
        c.rel_density = value.get<double>();
      } else if (key == "seed") {
        c.seed = value.get<uint64_t>();
      } else {
        throw ConfigError("gen: unknown key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("gen: ") + e.what());
  }
  return c;
}

int SpatialCode(const BBox& a, const BBox& b) {
  const double dx = std::abs((a.x1 + a.x2) - (b.x1 + b.x2)) / 2.0;
  const double dy = std::abs((a.y1 + a.y2) - (b.y1 + b.y2)) / 2.0;
  const int orientation = dx >= dy ? 0 : 1;
  int bin;
  if (IntersectionArea(a, b) > 0.0) {
    bin = 0;
  } else {
    const double dist = std::hypot(dx, dy);
    bin = dist < 35.0 ? 1 : (dist < 60.0 ? 2 : 3);
  }
  return orientation * 4 + bin;
}

Vec PlantedPredicateShares(int num_predicate_classes, double tail_exponent) {
  Vec shares(static_cast<size_t>(num_predicate_classes), 0.0);
  double total = 0.0;
  for (int r = 1; r < num_predicate_classes; ++r) {
    shares[static_cast<size_t>(r)] = std::pow(static_cast<double>(r), -tail_exponent);
    total += shares[static_cast<size_t>(r)];
  }
  for (double& s : shares) s /= total;
  return shares;
}

Corpus GenCorpus(const GenConfig& config) {
  ValidateGenConfig(config);
  std::mt19937_64 rule_rng(DeriveSeed(config.seed, SeedTag::kRules));
  std::vector<long> quota;
  const RuleTable rules = PlantRules(config, rule_rng, &quota);

  std::mt19937_64 embed_rng(DeriveSeed(config.seed, SeedTag::kEmbeddings));
  Generator gen{config, rules, {}, {}, {}};
  gen.embeddings = GaussianMat(static_cast<size_t>(config.num_object_classes),
                               config.feature_dim, 1.0, embed_rng);
  gen.mixer = GaussianMat(config.union_dim, config.feature_dim,
                          1.0 / std::sqrt(2.0 * static_cast<double>(config.feature_dim)),
                          embed_rng);
  gen.code_embed = GaussianMat(kNumSpatialCodes, config.union_dim, 1.0, embed_rng);

  Corpus corpus;
  corpus.num_object_classes = config.num_object_classes;
  corpus.num_predicate_classes = config.num_predicate_classes;
  corpus.feature_dim = config.feature_dim;
  corpus.union_dim = config.union_dim;
  corpus.vocab = DefaultVocab(config.num_object_classes, config.num_predicate_classes);
  corpus.graphs.resize(config.num_images);
  corpus.features.resize(config.num_images);
  for (size_t k = 0; k < config.num_images; ++k) {
    std::mt19937_64 rng(DeriveSeed(config.seed, SeedTag::kImages, k));
    SceneGraph& g = corpus.graphs[k];
    char id[32];
    std::snprintf(id, sizeof(id), "img_%05zu", k);
    g.image_id = id;
    int attempt = 0;
    while (!gen.TryImage(rng, g, corpus.features[k])) {
      if (++attempt >= kMaxImageAttempts) {
        throw ConfigError("gen: no image layout with a foreground pair after " +
                          std::to_string(kMaxImageAttempts) +
                          " attempts; raise rel_density or the node count");
      }
    }
  }
  corpus.rules = rules;
  corpus.meta = Json{{"generator", GenConfigToJson(config)},
                     {"planted_shares", PlantedPredicateShares(config.num_predicate_classes,
                                                               config.tail_exponent)},
                     {"rule_quota", quota}};
  CheckRuleConsistency(corpus);
  return corpus;
}

void CheckRuleConsistency(const Corpus& corpus) {
  if (!corpus.rules) throw DataError("corpus carries no rule table");
  for (size_t k = 0; k < corpus.size(); ++k) {
    const SceneGraph& g = corpus.graphs[k];
    const auto& codes = corpus.features[k].spatial_codes;
    const size_t n = g.nodes.size();
    if (codes.size() != n * n) {
      throw DataError("image '" + g.image_id + "' has no spatial codes");
    }
    std::set<std::tuple<size_t, int, size_t>> expected;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const int code = codes[i * n + j];
        if (code != SpatialCode(g.nodes[i].bbox, g.nodes[j].bbox)) {
          throw DataError("image '" + g.image_id + "': spatial code of pair (" +
                          std::to_string(i) + ", " + std::to_string(j) +
                          ") disagrees with its boxes");
        }
        const int p = corpus.rules->At(g.nodes[i].class_id, g.nodes[j].class_id, code);
        if (p != kBackgroundPredicate) expected.emplace(i, p, j);
      }
    }
    std::set<std::tuple<size_t, int, size_t>> actual;
    for (const Triplet& t : g.triplets) actual.emplace(t.subject, t.predicate, t.object);
    if (actual != expected || actual.size() != g.triplets.size()) {
      throw DataError("image '" + g.image_id + "': triplets disagree with the rule table");
    }
  }
}

}  // namespace sgg
