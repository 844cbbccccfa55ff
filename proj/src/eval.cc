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
#include "eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "errors.h"
#include "trainer.h"

namespace sgg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double Confidence(const Triplet& t, const std::string& image_id) {
  if (!t.confidence) throw DataError("prediction for '" + image_id + "' lacks a confidence");
  return *t.confidence;
}

// Prediction graph for each ground-truth graph; empty graphs where missing.
std::vector<SceneGraph> Align(const std::vector<SceneGraph>& preds,
                              const std::vector<SceneGraph>& gts) {
  std::unordered_map<std::string, size_t> by_id;
  for (size_t k = 0; k < gts.size(); ++k) by_id.emplace(gts[k].image_id, k);
  std::vector<SceneGraph> out(gts.size());
  for (size_t k = 0; k < gts.size(); ++k) out[k].image_id = gts[k].image_id;
  for (const SceneGraph& p : preds) {
    auto it = by_id.find(p.image_id);
    if (it == by_id.end()) {
      throw DataError("prediction for unknown image '" + p.image_id + "'");
    }
    out[it->second] = p;
  }
  return out;
}

bool PairMatch(const Triplet& pred, const SceneGraph& pg, const Triplet& gt,
               const SceneGraph& gg, double thr, MatchKind kind) {
  if (pred.predicate != gt.predicate) return false;
  const Node& ps = pg.nodes.at(pred.subject);
  const Node& po = pg.nodes.at(pred.object);
  const Node& gs = gg.nodes.at(gt.subject);
  const Node& go = gg.nodes.at(gt.object);
  if (ps.class_id != gs.class_id || po.class_id != go.class_id) return false;
  if (kind == MatchKind::kRelationship) {
    return Iou(ps.bbox, gs.bbox) >= thr && Iou(po.bbox, go.bbox) >= thr;
  }
  return Iou(UnionBox(ps.bbox, po.bbox), UnionBox(gs.bbox, go.bbox)) >= thr;
}

std::string Percent(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string Pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

Json NullableArray(const Vec& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(std::isnan(x) ? Json(nullptr) : Json(x));
  return out;
}

}  // namespace

EvalMode ParseEvalMode(const std::string& name) {
  if (name == "predcls") return EvalMode::kPredCls;
  if (name == "sgcls") return EvalMode::kSgCls;
  if (name == "sgdet") return EvalMode::kSgDet;
  throw ConfigError("unknown eval mode '" + name + "' (expected predcls, sgcls or sgdet)");
}

std::string EvalModeName(EvalMode mode) {
  switch (mode) {
    case EvalMode::kPredCls:
      return "predcls";
    case EvalMode::kSgCls:
      return "sgcls";
    case EvalMode::kSgDet:
      return "sgdet";
  }
  return "predcls";
}

void ValidateEvalOptions(const EvalOptions& o, int num_predicate_classes) {
  if (o.ks.empty()) throw ConfigError("eval: at least one K is required");
  for (size_t k : o.ks) {
    if (k == 0) throw ConfigError("eval: K must be positive");
  }
  if (o.k_per_pair > static_cast<size_t>(num_predicate_classes)) {
    throw RangeError("eval: k_per_pair " + std::to_string(o.k_per_pair) +
                     " out of range [1, " + std::to_string(num_predicate_classes) + "]");
  }
  if (!(o.iou_threshold > 0.0 && o.iou_threshold <= 1.0)) {
    throw ConfigError("eval: iou_threshold must lie in (0, 1]");
  }
}

Json EvalOptionsToJson(const EvalOptions& o) {
  return Json{{"mode", EvalModeName(o.mode)},
              {"ks", o.ks},
              {"graph_constraint", o.graph_constraint},
              {"k_per_pair", o.k_per_pair},
              {"iou_threshold", o.iou_threshold}};
}

EvalOptions EvalOptionsFromJson(const Json& j, EvalOptions o) {
  if (!j.is_object()) throw ConfigError("eval: expected a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "mode") {
        o.mode = ParseEvalMode(value.get<std::string>());
      } else if (key == "ks") {
        o.ks = value.get<std::vector<size_t>>();
      } else if (key == "graph_constraint") {
        o.graph_constraint = value.get<bool>();
      } else if (key == "k_per_pair") {
        o.k_per_pair = value.get<size_t>();
      } else if (key == "iou_threshold") {
        o.iou_threshold = value.get<double>();
      } else {
        throw ConfigError("eval: unknown key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("eval: ") + e.what());
  }
  return o;
}

size_t PerPairLimit(const EvalOptions& o) {
  if (o.k_per_pair > 0) return o.k_per_pair;
  return o.graph_constraint ? 1 : 0;
}

bool MatchTriplet(const Triplet& pred, const SceneGraph& pred_graph, const Triplet& gt,
                  const SceneGraph& gt_graph, double iou_threshold) {
  return PairMatch(pred, pred_graph, gt, gt_graph, iou_threshold, MatchKind::kRelationship);
}

bool MatchPhrase(const Triplet& pred, const SceneGraph& pred_graph, const Triplet& gt,
                 const SceneGraph& gt_graph, double iou_threshold) {
  return PairMatch(pred, pred_graph, gt, gt_graph, iou_threshold, MatchKind::kPhrase);
}

std::vector<size_t> RankedPool(const SceneGraph& graph, size_t limit) {
  std::vector<size_t> order(graph.triplets.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> conf(order.size());
  for (size_t k = 0; k < order.size(); ++k) conf[k] = Confidence(graph.triplets[k], graph.image_id);
  std::stable_sort(order.begin(), order.end(),
                   [&conf](size_t a, size_t b) { return conf[a] > conf[b]; });
  if (limit == 0) return order;
  std::map<std::pair<size_t, size_t>, size_t> used;
  std::vector<size_t> out;
  for (size_t idx : order) {
    const Triplet& t = graph.triplets[idx];
    size_t& n = used[{t.subject, t.object}];
    if (n < limit) {
      ++n;
      out.push_back(idx);
    }
  }
  return out;
}

std::vector<bool> MatchTopK(const SceneGraph& pred, const std::vector<size_t>& pool, size_t k,
                            const SceneGraph& gt, double iou_threshold) {
  std::vector<bool> matched(gt.triplets.size(), false);
  const size_t top = std::min(k, pool.size());
  for (size_t p = 0; p < top; ++p) {
    const Triplet& t = pred.triplets[pool[p]];
    for (size_t g = 0; g < gt.triplets.size(); ++g) {
      if (!matched[g] && MatchTriplet(t, pred, gt.triplets[g], gt, iou_threshold)) {
        matched[g] = true;
        break;
      }
    }
  }
  return matched;
}

double ImageRecall(const SceneGraph& pred, const SceneGraph& gt, size_t k, size_t limit,
                   double iou_threshold) {
  if (gt.triplets.empty()) {
    throw DomainError("recall of image '" + gt.image_id + "' without ground-truth triplets");
  }
  const auto matched = MatchTopK(pred, RankedPool(pred, limit), k, gt, iou_threshold);
  const auto hits = std::count(matched.begin(), matched.end(), true);
  return static_cast<double>(hits) / static_cast<double>(gt.triplets.size());
}

namespace {

double MeanImageRecall(const std::vector<SceneGraph>& preds, const std::vector<SceneGraph>& gts,
                       size_t k, size_t limit, double iou_threshold) {
  const auto aligned = Align(preds, gts);
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < gts.size(); ++i) {
    if (gts[i].triplets.empty()) continue;
    sum += ImageRecall(aligned[i], gts[i], k, limit, iou_threshold);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

double RecallAtK(const std::vector<SceneGraph>& preds, const std::vector<SceneGraph>& gts,
                 size_t k, bool graph_constraint, double iou_threshold) {
  return MeanImageRecall(preds, gts, k, graph_constraint ? 1 : 0, iou_threshold);
}

double RecallTopKPerPair(const std::vector<SceneGraph>& preds,
                         const std::vector<SceneGraph>& gts, size_t k, size_t k_per_pair,
                         int num_predicate_classes, double iou_threshold) {
  if (k_per_pair < 1 || k_per_pair > static_cast<size_t>(num_predicate_classes)) {
    throw RangeError("k_per_pair " + std::to_string(k_per_pair) + " out of range [1, " +
                     std::to_string(num_predicate_classes) + "]");
  }
  return MeanImageRecall(preds, gts, k, k_per_pair, iou_threshold);
}

MeanRecall MeanRecallAtK(const std::vector<SceneGraph>& preds,
                         const std::vector<SceneGraph>& gts, size_t k, size_t limit,
                         int num_predicate_classes, double iou_threshold) {
  const size_t r = static_cast<size_t>(num_predicate_classes);
  const auto aligned = Align(preds, gts);
  Vec sum(r, 0.0);
  std::vector<size_t> images(r, 0);
  for (size_t i = 0; i < gts.size(); ++i) {
    const SceneGraph& gt = gts[i];
    if (gt.triplets.empty()) continue;
    const auto matched = MatchTopK(aligned[i], RankedPool(aligned[i], limit), k, gt,
                                   iou_threshold);
    std::vector<long> hit(r, 0);
    std::vector<long> total(r, 0);
    for (size_t g = 0; g < gt.triplets.size(); ++g) {
      const size_t c = static_cast<size_t>(gt.triplets[g].predicate);
      if (c >= r) throw RangeError("predicate id out of range in '" + gt.image_id + "'");
      ++total[c];
      if (matched[g]) ++hit[c];
    }
    for (size_t c = 0; c < r; ++c) {
      if (total[c] == 0) continue;
      sum[c] += static_cast<double>(hit[c]) / static_cast<double>(total[c]);
      ++images[c];
    }
  }
  MeanRecall out;
  out.per_class.assign(r, kNaN);
  double acc = 0.0;
  size_t present = 0;
  for (size_t c = 0; c < r; ++c) {
    if (images[c] == 0) continue;
    out.per_class[c] = sum[c] / static_cast<double>(images[c]);
    acc += out.per_class[c];
    ++present;
  }
  out.mean = present == 0 ? 0.0 : acc / static_cast<double>(present);
  return out;
}

double AveragePrecision(const std::vector<bool>& hits, size_t npos) {
  if (npos == 0) return 0.0;
  const size_t n = hits.size();
  Vec precision(n);
  Vec recall(n);
  size_t tp = 0;
  for (size_t k = 0; k < n; ++k) {
    if (hits[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(npos);
  }
  // Precision envelope from the right, then sum over recall steps.
  for (size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t k = 0; k < n; ++k) {
    if (recall[k] > prev_recall) {
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
  }
  return ap;
}

PredicateAp ApPerPredicate(const std::vector<SceneGraph>& preds,
                           const std::vector<SceneGraph>& gts, MatchKind kind, size_t limit,
                           int num_predicate_classes, double iou_threshold) {
  const size_t r = static_cast<size_t>(num_predicate_classes);
  const auto aligned = Align(preds, gts);
  PredicateAp out;
  out.ap.assign(r, kNaN);
  out.gt_counts.assign(r, 0);
  for (const SceneGraph& g : gts) {
    for (const Triplet& t : g.triplets) ++out.gt_counts.at(static_cast<size_t>(t.predicate));
  }
  struct Entry {
    double conf;
    size_t image;
    size_t triplet;
  };
  std::vector<std::vector<Entry>> by_class(r);
  for (size_t i = 0; i < aligned.size(); ++i) {
    for (size_t idx : RankedPool(aligned[i], limit)) {
      const Triplet& t = aligned[i].triplets[idx];
      if (t.predicate < 0 || static_cast<size_t>(t.predicate) >= r) {
        throw RangeError("predicted predicate out of range in '" + aligned[i].image_id + "'");
      }
      by_class[static_cast<size_t>(t.predicate)].push_back({*t.confidence, i, idx});
    }
  }
  for (size_t c = 1; c < r; ++c) {
    if (out.gt_counts[c] == 0) continue;
    auto& entries = by_class[c];
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.conf > b.conf; });
    std::vector<std::vector<bool>> used(gts.size());
    for (size_t i = 0; i < gts.size(); ++i) used[i].assign(gts[i].triplets.size(), false);
    std::vector<bool> hits;
    hits.reserve(entries.size());
    for (const Entry& e : entries) {
      const SceneGraph& gt = gts[e.image];
      const Triplet& t = aligned[e.image].triplets[e.triplet];
      bool hit = false;
      for (size_t g = 0; g < gt.triplets.size() && !hit; ++g) {
        if (!used[e.image][g] &&
            PairMatch(t, aligned[e.image], gt.triplets[g], gt, iou_threshold, kind)) {
          used[e.image][g] = true;
          hit = true;
        }
      }
      hits.push_back(hit);
    }
    out.ap[c] = AveragePrecision(hits, static_cast<size_t>(out.gt_counts[c]));
  }
  return out;
}

double WeightedMap(const Vec& ap, const std::vector<long>& counts) {
  if (ap.size() != counts.size()) {
    throw DimensionError("wmAP: " + std::to_string(ap.size()) + " APs for " +
                         std::to_string(counts.size()) + " counts");
  }
  double total = 0.0;
  for (long c : counts) {
    if (c < 0) throw DomainError("wmAP: negative count");
    total += static_cast<double>(c);
  }
  if (total == 0.0) throw DomainError("wmAP: undefined when every class count is zero");
  double acc = 0.0;
  for (size_t k = 0; k < ap.size(); ++k) {
    if (counts[k] > 0) acc += static_cast<double>(counts[k]) / total * ap[k];
  }
  return acc;
}

double ScoreWtd(double r50, double wmap_rel, double wmap_phr) {
  return 0.2 * r50 + 0.4 * wmap_rel + 0.4 * wmap_phr;
}

MetricReport ComputeMetrics(const std::vector<SceneGraph>& preds,
                            const std::vector<SceneGraph>& gts, int num_predicate_classes,
                            const EvalOptions& options,
                            const std::vector<std::string>& predicate_names) {
  ValidateEvalOptions(options, num_predicate_classes);
  MetricReport rep;
  rep.options = options;
  rep.predicate_names = predicate_names;
  const size_t limit = PerPairLimit(options);
  if (options.k_per_pair > 0) {
    rep.convention = "top-" + std::to_string(options.k_per_pair) + " predicates per pair";
  } else if (options.graph_constraint) {
    rep.convention = "graph constraint (one predicate per pair)";
  } else {
    rep.convention = "no graph constraint (all predicates per pair)";
  }
  rep.images = gts.size();
  for (const SceneGraph& g : gts) {
    if (!g.triplets.empty()) ++rep.images_with_gt;
    rep.gt_triplets += g.triplets.size();
  }
  for (size_t k : options.ks) {
    rep.recall[k] = MeanImageRecall(preds, gts, k, limit, options.iou_threshold);
    MeanRecall mr =
        MeanRecallAtK(preds, gts, k, limit, num_predicate_classes, options.iou_threshold);
    rep.mean_recall[k] = mr.mean;
    rep.per_predicate_recall[k] = std::move(mr.per_class);
  }
  rep.r50 = rep.recall.count(50) ? rep.recall[50]
                                 : MeanImageRecall(preds, gts, 50, limit, options.iou_threshold);
  PredicateAp rel = ApPerPredicate(preds, gts, MatchKind::kRelationship, limit,
                                   num_predicate_classes, options.iou_threshold);
  PredicateAp phr = ApPerPredicate(preds, gts, MatchKind::kPhrase, limit, num_predicate_classes,
                                   options.iou_threshold);
  rep.ap_rel = rel.ap;
  rep.ap_phr = phr.ap;
  rep.gt_counts = rel.gt_counts;
  if (rep.gt_triplets > 0) {
    rep.wmap_rel = WeightedMap(rel.ap, rel.gt_counts);
    rep.wmap_phr = WeightedMap(phr.ap, phr.gt_counts);
  }
  rep.score_wtd = ScoreWtd(100.0 * rep.r50, 100.0 * rep.wmap_rel, 100.0 * rep.wmap_phr);
  return rep;
}

Json MetricReportToJson(const MetricReport& rep) {
  Json recall = Json::object();
  Json mean_recall = Json::object();
  Json per_pred = Json::object();
  for (const auto& [k, v] : rep.recall) recall[std::to_string(k)] = v;
  for (const auto& [k, v] : rep.mean_recall) mean_recall[std::to_string(k)] = v;
  for (const auto& [k, v] : rep.per_predicate_recall) per_pred[std::to_string(k)] = NullableArray(v);
  return Json{{"options", EvalOptionsToJson(rep.options)},
              {"convention", rep.convention},
              {"images", rep.images},
              {"images_with_gt", rep.images_with_gt},
              {"gt_triplets", rep.gt_triplets},
              {"recall", recall},
              {"mean_recall", mean_recall},
              {"per_predicate_recall", per_pred},
              {"ap_rel", NullableArray(rep.ap_rel)},
              {"ap_phr", NullableArray(rep.ap_phr)},
              {"gt_counts", rep.gt_counts},
              {"wmap_rel", rep.wmap_rel},
              {"wmap_phr", rep.wmap_phr},
              {"r50", rep.r50},
              {"score_wtd", rep.score_wtd},
              {"predicate_names", rep.predicate_names}};
}

std::string MetricReportText(const MetricReport& rep) {
  std::string out;
  out += "mode: " + EvalModeName(rep.options.mode) + "\n";
  out += "convention: " + rep.convention + "\n";
  out += "images: " + std::to_string(rep.images) + " (" + std::to_string(rep.images_with_gt) +
         " with relationships), gt triplets: " + std::to_string(rep.gt_triplets) + "\n\n";
  out += Pad("K", 6) + Pad("R@K", 10) + Pad("mR@K", 10) + "\n";
  for (const auto& [k, v] : rep.recall) {
    out += Pad(std::to_string(k), 6) + Pad(Percent(v), 10) +
           Pad(Percent(rep.mean_recall.at(k)), 10) + "\n";
  }
  out += "\n";
  std::string header = Pad("predicate", 16) + Pad("gt", 8);
  for (const auto& [k, v] : rep.per_predicate_recall) header += Pad("R@" + std::to_string(k), 9);
  header += Pad("AP_rel", 9) + Pad("AP_phr", 9);
  out += header + "\n";
  for (size_t c = 1; c < rep.gt_counts.size(); ++c) {
    std::string name = c < rep.predicate_names.size() ? rep.predicate_names[c]
                                                      : std::to_string(c);
    if (name.size() > 15) name = name.substr(0, 15);
    std::string line = Pad(name, 16) + Pad(std::to_string(rep.gt_counts[c]), 8);
    for (const auto& [k, v] : rep.per_predicate_recall) line += Pad(Percent(v[c]), 9);
    line += Pad(Percent(rep.ap_rel[c]), 9) + Pad(Percent(rep.ap_phr[c]), 9);
    out += line + "\n";
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "\nwmAP_rel %.2f  wmAP_phr %.2f  R@50 %.2f  score_wtd %.2f\n",
                100.0 * rep.wmap_rel, 100.0 * rep.wmap_phr, 100.0 * rep.r50, rep.score_wtd);
  out += buf;
  return out;
}

std::vector<SceneGraph> MakePredictions(const ModelParams& params, const ModelConfig& config,
                                        const FrequencyPrior& prior, const Corpus& corpus,
                                        EvalMode mode) {
  CheckShapes(params, config);
  std::vector<SceneGraph> out;
  out.reserve(corpus.size());
  const size_t r = static_cast<size_t>(config.num_predicate_classes);
  for (size_t k = 0; k < corpus.size(); ++k) {
    const SceneGraph& gt = corpus.graphs[k];
    const ImageFeatures& f = corpus.features[k];
    const ImageForward fwd = ForwardNodes(params, config, f.x, f.u);
    const size_t n = gt.nodes.size();
    SceneGraph pred;
    pred.image_id = gt.image_id;
    pred.nodes.resize(n);
    Vec node_score(n, 1.0);
    for (size_t i = 0; i < n; ++i) {
      pred.nodes[i].bbox = gt.nodes[i].bbox;
      if (mode == EvalMode::kPredCls) {
        pred.nodes[i].class_id = gt.nodes[i].class_id;
      } else {
        Vec probs = SoftmaxRow(fwd.obj_logits.row(i));
        const int cls = PredictRelationship(probs, true);
        pred.nodes[i].class_id = cls;
        node_score[i] = probs[static_cast<size_t>(cls)];
        pred.nodes[i].scores = std::move(probs);
      }
    }
    std::vector<std::pair<size_t, size_t>> candidates;
    if (mode == EvalMode::kSgDet) {
      std::vector<BBox> boxes;
      for (const Node& node : pred.nodes) boxes.push_back(node.bbox);
      candidates = OverlapFilter(boxes);
    } else {
      for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
          if (i != j) candidates.emplace_back(i, j);
        }
      }
    }
    for (const auto& [i, j] : candidates) {
      const Vec dist = PairDistribution(params, config, prior, fwd, f.u, i, j,
                                        pred.nodes[i].class_id, pred.nodes[j].class_id);
      for (size_t p = 1; p < r; ++p) {
        pred.triplets.push_back(
            {i, static_cast<int>(p), j, node_score[i] * dist[p] * node_score[j]});
      }
    }
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace sgg
