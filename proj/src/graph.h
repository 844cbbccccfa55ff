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
#ifndef SGG_GRAPH_H_
#define SGG_GRAPH_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linalg.h"

namespace sgg {

// Predicate id reserved for "no relationship".
inline constexpr int kBackgroundPredicate = 0;

struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool Valid() const { return x1 < x2 && y1 < y2; }
  double Area() const { return (x2 - x1) * (y2 - y1); }
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Node {
  int class_id = 0;
  BBox bbox;
  // Class distribution of a predicted node; absent for ground truth.
  std::optional<Vec> scores;
};

struct Triplet {
  size_t subject = 0;
  int predicate = 0;
  size_t object = 0;
  std::optional<double> confidence;
};

struct SceneGraph {
  std::string image_id;
  std::vector<Node> nodes;
  std::vector<Triplet> triplets;
};

// Throws DataError/RangeError when the graph violates its invariants.
// Ground-truth graphs are additionally checked for duplicate triplets.
void ValidateGraph(const SceneGraph& graph, int num_object_classes,
                   int num_predicate_classes, bool ground_truth);

// Number of triplets with `node` as subject or object.
size_t CountTriplets(const SceneGraph& graph, size_t node);

struct PriorityVector {
  Vec theta;
  size_t triplet_total = 0;
};

// theta_i = t_i / |T|. Nodes in no triplet get theta = 0.
PriorityVector NodePriority(const SceneGraph& graph);

// Predicate statistics per ordered (subject class, object class) pair.
class FrequencyPrior {
 public:
  // Additive smoothing applied to every cell before normalization.
  static constexpr double kDefaultSmoothing = 1e-3;

  FrequencyPrior(int num_object_classes, int num_predicate_classes,
                 double smoothing = kDefaultSmoothing);

  int num_object_classes() const { return num_objects_; }
  int num_predicate_classes() const { return num_predicates_; }
  double smoothing() const { return smoothing_; }

  void Add(int subject_class, int object_class, int predicate);
  // Renormalizes probabilities and the softened cache from the counts.
  void Finalize();

  long count(int s, int o, int r) const { return counts_[Index(s, o, r)]; }
  std::span<const double> Lookup(int subject_class, int object_class) const;
  // log_softmax(Lookup(s, o)), cached at Finalize time.
  std::span<const double> SoftenedLookup(int subject_class, int object_class) const;

  const std::vector<long>& counts() const { return counts_; }

 private:
  size_t Index(int s, int o, int r) const;
  void CheckClasses(int s, int o) const;

  int num_objects_;
  int num_predicates_;
  double smoothing_;
  std::vector<long> counts_;
  std::vector<double> probabilities_;
  std::vector<double> softened_;
};

// Counts every non-background ground-truth triplet of the corpus.
FrequencyPrior BuildFrequencyPrior(std::span<const SceneGraph> corpus, int num_object_classes,
                                   int num_predicate_classes,
                                   double smoothing = FrequencyPrior::kDefaultSmoothing);

// Copy of the probability vector p(s -> o).
Vec PriorLookup(const FrequencyPrior& prior, int subject_class, int object_class);

double Iou(const BBox& a, const BBox& b);
double IntersectionArea(const BBox& a, const BBox& b);
BBox UnionBox(const BBox& a, const BBox& b);

}  // namespace sgg

#endif  // SGG_GRAPH_H_
