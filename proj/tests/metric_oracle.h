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
#ifndef SGG_TESTS_METRIC_ORACLE_H_
#define SGG_TESTS_METRIC_ORACLE_H_

// Exhaustive reference matchers for the recall metrics, plus a generator of
// small random instances. Ground-truth nodes sit in separate grid cells and
// predicted boxes are jittered copies, so every prediction can match at most
// one ground-truth triplet; on such instances greedy and maximum matching
// coincide and the brute-force matcher is an exact oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "graph.h"

namespace sgg::test {

struct MetricInstance {
  std::vector<SceneGraph> gts;
  std::vector<SceneGraph> preds;
  int num_predicate_classes = 3;
};

inline BBox CellBox(size_t cell) {
  const double x = 100.0 * static_cast<double>(cell);
  return {x, 0.0, x + 10.0, 10.0};
}

// <= max_nodes nodes, predicates 1..R-1, <= max_preds predictions per image.
inline MetricInstance RandomMetricInstance(std::mt19937_64& rng, size_t max_nodes = 4,
                                           int max_predicate_classes = 3,
                                           size_t max_preds = 8, size_t max_images = 3) {
  auto uniform = [&rng](size_t lo, size_t hi) {
    return std::uniform_int_distribution<size_t>(lo, hi)(rng);
  };
  MetricInstance inst;
  inst.num_predicate_classes = static_cast<int>(uniform(2, max_predicate_classes));
  const int r = inst.num_predicate_classes;
  const size_t images = uniform(1, max_images);
  for (size_t img = 0; img < images; ++img) {
    SceneGraph gt;
    gt.image_id = "img" + std::to_string(img);
    const size_t n = uniform(2, max_nodes);
    for (size_t i = 0; i < n; ++i) {
      gt.nodes.push_back({static_cast<int>(uniform(1, 2)), CellBox(i), std::nullopt});
    }
    for (size_t s = 0; s < n; ++s) {
      for (size_t o = 0; o < n; ++o) {
        for (int p = 1; p < r; ++p) {
          if (s != o && uniform(0, 4) == 0) gt.triplets.push_back({s, p, o, std::nullopt});
        }
      }
    }
    SceneGraph pred;
    pred.image_id = gt.image_id;
    for (size_t i = 0; i < n; ++i) {
      Node node = gt.nodes[i];
      // Small jitter keeps IoU >= 0.5; a large one drops it below.
      const double shift = uniform(0, 3) == 0 ? 6.0 : 1.0;
      node.bbox.x1 += shift;
      node.bbox.x2 += shift;
      if (uniform(0, 5) == 0) node.class_id = 3 - node.class_id;
      pred.nodes.push_back(node);
    }
    const size_t np = uniform(0, max_preds);
    for (size_t k = 0; k < np; ++k) {
      const size_t s = uniform(0, n - 1);
      size_t o = uniform(0, n - 2);
      if (o >= s) ++o;
      const int p = static_cast<int>(uniform(1, static_cast<size_t>(r - 1)));
      const double conf = 0.2 * static_cast<double>(uniform(1, 4));
      pred.triplets.push_back({s, p, o, conf});
    }
    inst.gts.push_back(std::move(gt));
    inst.preds.push_back(std::move(pred));
  }
  return inst;
}

inline bool OracleMatch(const SceneGraph& pg, const Triplet& p, const SceneGraph& gg,
                        const Triplet& g, double thresh) {
  if (p.predicate != g.predicate) return false;
  const Node& ps = pg.nodes[p.subject];
  const Node& po = pg.nodes[p.object];
  const Node& gs = gg.nodes[g.subject];
  const Node& go = gg.nodes[g.object];
  if (ps.class_id != gs.class_id || po.class_id != go.class_id) return false;
  auto iou = [](const BBox& a, const BBox& b) {
    const double w = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double h = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = w * h;
    const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
    return inter / uni;
  };
  return iou(ps.bbox, gs.bbox) >= thresh && iou(po.bbox, go.bbox) >= thresh;
}

// True when prediction u outranks prediction t (higher confidence, or equal
// confidence and earlier position).
inline bool Outranks(const SceneGraph& pg, size_t u, size_t t) {
  const double cu = *pg.triplets[u].confidence;
  const double ct = *pg.triplets[t].confidence;
  return cu > ct || (cu == ct && u < t);
}

// Indices of the predictions that survive the per-pair limit and land in the
// global top k, found by counting outranking rivals.
inline std::vector<size_t> OracleTopK(const SceneGraph& pg, size_t k, size_t limit) {
  const size_t m = pg.triplets.size();
  std::vector<bool> kept(m, true);
  if (limit > 0) {
    for (size_t t = 0; t < m; ++t) {
      size_t rivals = 0;
      for (size_t u = 0; u < m; ++u) {
        if (u != t && pg.triplets[u].subject == pg.triplets[t].subject &&
            pg.triplets[u].object == pg.triplets[t].object && Outranks(pg, u, t)) {
          ++rivals;
        }
      }
      kept[t] = rivals < limit;
    }
  }
  std::vector<size_t> top;
  for (size_t t = 0; t < m; ++t) {
    if (!kept[t]) continue;
    size_t rank = 0;
    for (size_t u = 0; u < m; ++u) {
      if (u != t && kept[u] && Outranks(pg, u, t)) ++rank;
    }
    if (rank < k) top.push_back(t);
  }
  return top;
}

// Size of a maximum one-to-one matching between `top` and ground truth,
// by enumerating every assignment.
inline size_t OracleMaxMatching(const SceneGraph& pg, const std::vector<size_t>& top,
                                const SceneGraph& gg, double thresh) {
  std::vector<bool> used(top.size(), false);
  std::function<size_t(size_t)> best = [&](size_t g) -> size_t {
    if (g == gg.triplets.size()) return 0;
    size_t result = best(g + 1);
    for (size_t k = 0; k < top.size(); ++k) {
      if (used[k] || !OracleMatch(pg, pg.triplets[top[k]], gg, gg.triplets[g], thresh)) continue;
      used[k] = true;
      result = std::max(result, 1 + best(g + 1));
      used[k] = false;
    }
    return result;
  };
  return best(0);
}

// Per-ground-truth flags: hit by some prediction in `top`.
inline std::vector<bool> OracleHits(const SceneGraph& pg, const std::vector<size_t>& top,
                                    const SceneGraph& gg, double thresh) {
  std::vector<bool> hit(gg.triplets.size(), false);
  for (size_t g = 0; g < gg.triplets.size(); ++g) {
    for (size_t t : top) hit[g] = hit[g] || OracleMatch(pg, pg.triplets[t], gg, gg.triplets[g], thresh);
  }
  return hit;
}

inline double OracleRecall(const MetricInstance& inst, size_t k, size_t limit,
                           double thresh = 0.5) {
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < inst.gts.size(); ++i) {
    const SceneGraph& gg = inst.gts[i];
    if (gg.triplets.empty()) continue;
    const auto top = OracleTopK(inst.preds[i], k, limit);
    sum += static_cast<double>(OracleMaxMatching(inst.preds[i], top, gg, thresh)) /
           static_cast<double>(gg.triplets.size());
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

// Per-class recall averaged over images containing the class, then over
// classes; NaN entries mark absent classes.
inline std::pair<double, std::vector<double>> OracleMeanRecall(const MetricInstance& inst,
                                                               size_t k, size_t limit,
                                                               double thresh = 0.5) {
  const int r = inst.num_predicate_classes;
  std::vector<double> sum(r, 0.0);
  std::vector<size_t> images(r, 0);
  for (size_t i = 0; i < inst.gts.size(); ++i) {
    const SceneGraph& gg = inst.gts[i];
    const auto hits = OracleHits(inst.preds[i], OracleTopK(inst.preds[i], k, limit), gg, thresh);
    for (int c = 1; c < r; ++c) {
      size_t total = 0, matched = 0;
      for (size_t g = 0; g < gg.triplets.size(); ++g) {
        if (gg.triplets[g].predicate != c) continue;
        ++total;
        matched += hits[g] ? 1 : 0;
      }
      if (total == 0) continue;
      sum[c] += static_cast<double>(matched) / static_cast<double>(total);
      ++images[c];
    }
  }
  std::vector<double> per_class(r, std::nan(""));
  double mean = 0.0;
  size_t present = 0;
  for (int c = 1; c < r; ++c) {
    if (images[c] == 0) continue;
    per_class[c] = sum[c] / static_cast<double>(images[c]);
    mean += per_class[c];
    ++present;
  }
  return {present == 0 ? 0.0 : mean / static_cast<double>(present), per_class};
}

}  // namespace sgg::test

#endif  // SGG_TESTS_METRIC_ORACLE_H_
