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
#ifndef SGG_EVAL_H_
#define SGG_EVAL_H_

// Scene-graph metrics. Predicted triplets carry a confidence; each image's
// predictions are first limited per ordered pair, then sorted by confidence
// (stable), and matched greedily against ground truth: a prediction claims
// the first still-unmatched ground-truth triplet it matches.

#include <map>
#include <string>
#include <vector>

#include "corpus.h"
#include "graph.h"
#include "json_util.h"
#include "model.h"

namespace sgg {

enum class EvalMode { kPredCls, kSgCls, kSgDet };

EvalMode ParseEvalMode(const std::string& name);
std::string EvalModeName(EvalMode mode);

enum class MatchKind { kRelationship, kPhrase };

struct EvalOptions {
  EvalMode mode = EvalMode::kPredCls;
  std::vector<size_t> ks = {20, 50, 100};
  bool graph_constraint = true;
  // > 0 keeps this many predicates per ordered pair and overrides
  // graph_constraint.
  size_t k_per_pair = 0;
  double iou_threshold = 0.5;
};

void ValidateEvalOptions(const EvalOptions& options, int num_predicate_classes);
Json EvalOptionsToJson(const EvalOptions& options);
EvalOptions EvalOptionsFromJson(const Json& j, EvalOptions base = {});

// Predicates kept per ordered pair: k_per_pair, else 1 under the graph
// constraint, else 0 (no limit).
size_t PerPairLimit(const EvalOptions& options);

// Subject/object classes and predicate equal, and both boxes overlap their
// ground-truth counterparts at IoU >= threshold.
bool MatchTriplet(const Triplet& pred, const SceneGraph& pred_graph, const Triplet& gt,
                  const SceneGraph& gt_graph, double iou_threshold);

// Like MatchTriplet but compares the union boxes of the two pairs.
bool MatchPhrase(const Triplet& pred, const SceneGraph& pred_graph, const Triplet& gt,
                 const SceneGraph& gt_graph, double iou_threshold);

// Indices of `graph.triplets` after keeping the `limit` most confident
// predicates of each ordered pair (0 = all), sorted by descending confidence.
// Ties keep their input order.
std::vector<size_t> RankedPool(const SceneGraph& graph, size_t limit);

// Per-GT flags: matched by the first `k` entries of `pool`.
std::vector<bool> MatchTopK(const SceneGraph& pred, const std::vector<size_t>& pool, size_t k,
                            const SceneGraph& gt, double iou_threshold);

// Recall of one image; requires at least one ground-truth triplet.
double ImageRecall(const SceneGraph& pred, const SceneGraph& gt, size_t k, size_t limit,
                   double iou_threshold);

// Predictions are paired with ground truth by image id; missing predictions
// count as empty. Images without ground-truth triplets are skipped.
double RecallAtK(const std::vector<SceneGraph>& preds, const std::vector<SceneGraph>& gts,
                 size_t k, bool graph_constraint, double iou_threshold = 0.5);

double RecallTopKPerPair(const std::vector<SceneGraph>& preds,
                         const std::vector<SceneGraph>& gts, size_t k, size_t k_per_pair,
                         int num_predicate_classes, double iou_threshold = 0.5);

struct MeanRecall {
  double mean = 0.0;
  // Per predicate class; NaN for classes without ground truth.
  Vec per_class;
};

// Per image and class c, matched_c / gt_c; averaged over the images that
// contain c, then over the classes present.
MeanRecall MeanRecallAtK(const std::vector<SceneGraph>& preds,
                         const std::vector<SceneGraph>& gts, size_t k, size_t limit,
                         int num_predicate_classes, double iou_threshold = 0.5);

// All-point interpolated area under the precision/recall curve of a ranked
// list of hits. npos == 0 gives 0.
double AveragePrecision(const std::vector<bool>& hits, size_t npos);

struct PredicateAp {
  Vec ap;                   // per predicate class; NaN where no ground truth
  std::vector<long> gt_counts;
};

PredicateAp ApPerPredicate(const std::vector<SceneGraph>& preds,
                           const std::vector<SceneGraph>& gts, MatchKind kind, size_t limit,
                           int num_predicate_classes, double iou_threshold = 0.5);

// sum_c (n_c / sum n) AP_c over classes with n_c > 0. Throws DomainError when
// every count is zero.
double WeightedMap(const Vec& ap, const std::vector<long>& counts);

// 0.2 R@50 + 0.4 wmAP_rel + 0.4 wmAP_phr, all on the same scale.
double ScoreWtd(double r50, double wmap_rel, double wmap_phr);

struct MetricReport {
  EvalOptions options;
  std::string convention;
  size_t images = 0;
  size_t images_with_gt = 0;
  size_t gt_triplets = 0;
  std::map<size_t, double> recall;
  std::map<size_t, double> mean_recall;
  std::map<size_t, Vec> per_predicate_recall;
  Vec ap_rel;
  Vec ap_phr;
  std::vector<long> gt_counts;
  double wmap_rel = 0.0;
  double wmap_phr = 0.0;
  double r50 = 0.0;
  double score_wtd = 0.0;  // percent scale
  std::vector<std::string> predicate_names;
};

MetricReport ComputeMetrics(const std::vector<SceneGraph>& preds,
                            const std::vector<SceneGraph>& gts, int num_predicate_classes,
                            const EvalOptions& options,
                            const std::vector<std::string>& predicate_names = {});

Json MetricReportToJson(const MetricReport& report);
std::string MetricReportText(const MetricReport& report);

// Scores every candidate pair of every image. predcls uses ground-truth
// classes with score 1; sgcls and sgdet take the classifier's best
// foreground class; sgdet keeps only pairs with overlapping boxes. Each pair
// emits all foreground predicates with confidence s_i * p(r) * s_j.
std::vector<SceneGraph> MakePredictions(const ModelParams& params, const ModelConfig& config,
                                        const FrequencyPrior& prior, const Corpus& corpus,
                                        EvalMode mode);

}  // namespace sgg

#endif  // SGG_EVAL_H_
