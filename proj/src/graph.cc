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
#include "graph.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "errors.h"

namespace sgg {

void ValidateGraph(const SceneGraph& graph, int num_object_classes, int num_predicate_classes,
                   bool ground_truth) {
  const std::string where = "graph '" + graph.image_id + "'";
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    const Node& node = graph.nodes[i];
    if (node.class_id < 0 || node.class_id >= num_object_classes) {
      throw RangeError(where + ": node " + std::to_string(i) + " class " +
                       std::to_string(node.class_id) + " outside [0, " +
                       std::to_string(num_object_classes) + ")");
    }
    if (!node.bbox.Valid()) {
      throw DataError(where + ": node " + std::to_string(i) + " has a degenerate box");
    }
    if (node.scores) {
      if (node.scores->size() != static_cast<size_t>(num_object_classes)) {
        throw DataError(where + ": node " + std::to_string(i) + " score vector length " +
                        std::to_string(node.scores->size()));
      }
      double total = 0.0;
      for (double s : *node.scores) total += s;
      if (std::abs(total - 1.0) > 1e-9) {
        throw DataError(where + ": node " + std::to_string(i) +
                        " scores are not a probability vector");
      }
    }
  }
  std::set<std::tuple<size_t, int, size_t>> seen;
  for (const Triplet& t : graph.triplets) {
    if (t.subject >= graph.nodes.size() || t.object >= graph.nodes.size()) {
      throw RangeError(where + ": triplet node index out of range");
    }
    if (t.subject == t.object) {
      throw DataError(where + ": triplet with subject == object (" +
                      std::to_string(t.subject) + ")");
    }
    if (t.predicate < 0 || t.predicate >= num_predicate_classes) {
      throw RangeError(where + ": predicate " + std::to_string(t.predicate) + " outside [0, " +
                       std::to_string(num_predicate_classes) + ")");
    }
    if (ground_truth && !seen.emplace(t.subject, t.predicate, t.object).second) {
      throw DataError(where + ": duplicate ground-truth triplet (" +
                      std::to_string(t.subject) + ", " + std::to_string(t.predicate) + ", " +
                      std::to_string(t.object) + ")");
    }
  }
}

size_t CountTriplets(const SceneGraph& graph, size_t node) {
  if (node >= graph.nodes.size()) {
    throw RangeError("count_triplets: node " + std::to_string(node) + " out of range for " +
                     std::to_string(graph.nodes.size()) + " nodes");
  }
  return static_cast<size_t>(std::count_if(
      graph.triplets.begin(), graph.triplets.end(),
      [node](const Triplet& t) { return t.subject == node || t.object == node; }));
}

PriorityVector NodePriority(const SceneGraph& graph) {
  if (graph.triplets.empty()) {
    throw DataError("node_priority: graph '" + graph.image_id +
                    "' has no triplets, priority is undefined");
  }
  PriorityVector p;
  p.triplet_total = graph.triplets.size();
  std::vector<size_t> counts(graph.nodes.size(), 0);
  for (const Triplet& t : graph.triplets) {
    if (t.subject >= counts.size() || t.object >= counts.size()) {
      throw RangeError("node_priority: triplet node index out of range");
    }
    ++counts[t.subject];
    ++counts[t.object];
  }
  p.theta.resize(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    p.theta[i] = static_cast<double>(counts[i]) / static_cast<double>(p.triplet_total);
  }
  return p;
}

FrequencyPrior::FrequencyPrior(int num_object_classes, int num_predicate_classes,
                               double smoothing)
    : num_objects_(num_object_classes),
      num_predicates_(num_predicate_classes),
      smoothing_(smoothing) {
  if (num_object_classes <= 0 || num_predicate_classes <= 0) {
    throw ConfigError("frequency prior: class counts must be positive");
  }
  if (!(smoothing > 0.0)) throw ConfigError("frequency prior: smoothing must be positive");
  const size_t cells = static_cast<size_t>(num_objects_) * num_objects_ * num_predicates_;
  counts_.assign(cells, 0);
  probabilities_.assign(cells, 0.0);
  softened_.assign(cells, 0.0);
  Finalize();
}

size_t FrequencyPrior::Index(int s, int o, int r) const {
  return (static_cast<size_t>(s) * num_objects_ + o) * num_predicates_ + r;
}

void FrequencyPrior::CheckClasses(int s, int o) const {
  if (s < 0 || s >= num_objects_ || o < 0 || o >= num_objects_) {
    throw RangeError("frequency prior: class pair (" + std::to_string(s) + ", " +
                     std::to_string(o) + ") outside [0, " + std::to_string(num_objects_) + ")");
  }
}

void FrequencyPrior::Add(int subject_class, int object_class, int predicate) {
  CheckClasses(subject_class, object_class);
  if (predicate < 0 || predicate >= num_predicates_) {
    throw RangeError("frequency prior: predicate " + std::to_string(predicate) +
                     " out of range");
  }
  ++counts_[Index(subject_class, object_class, predicate)];
}

void FrequencyPrior::Finalize() {
  const size_t r = static_cast<size_t>(num_predicates_);
  for (size_t base = 0; base < counts_.size(); base += r) {
    double total = 0.0;
    for (size_t k = 0; k < r; ++k) total += static_cast<double>(counts_[base + k]) + smoothing_;
    for (size_t k = 0; k < r; ++k) {
      probabilities_[base + k] = (static_cast<double>(counts_[base + k]) + smoothing_) / total;
    }
    const Vec soft = LogSoftmax(std::span<const double>(probabilities_).subspan(base, r));
    std::copy(soft.begin(), soft.end(), softened_.begin() + static_cast<long>(base));
  }
}

std::span<const double> FrequencyPrior::Lookup(int subject_class, int object_class) const {
  CheckClasses(subject_class, object_class);
  return std::span<const double>(probabilities_)
      .subspan(Index(subject_class, object_class, 0), static_cast<size_t>(num_predicates_));
}

std::span<const double> FrequencyPrior::SoftenedLookup(int subject_class,
                                                       int object_class) const {
  CheckClasses(subject_class, object_class);
  return std::span<const double>(softened_)
      .subspan(Index(subject_class, object_class, 0), static_cast<size_t>(num_predicates_));
}

FrequencyPrior BuildFrequencyPrior(std::span<const SceneGraph> corpus, int num_object_classes,
                                   int num_predicate_classes, double smoothing) {
  FrequencyPrior prior(num_object_classes, num_predicate_classes, smoothing);
  for (const SceneGraph& g : corpus) {
    for (const Triplet& t : g.triplets) {
      if (t.predicate == kBackgroundPredicate) continue;
      if (t.subject >= g.nodes.size() || t.object >= g.nodes.size()) {
        throw RangeError("frequency prior: triplet node index out of range in '" + g.image_id +
                         "'");
      }
      prior.Add(g.nodes[t.subject].class_id, g.nodes[t.object].class_id, t.predicate);
    }
  }
  prior.Finalize();
  return prior;
}

Vec PriorLookup(const FrequencyPrior& prior, int subject_class, int object_class) {
  auto p = prior.Lookup(subject_class, object_class);
  return Vec(p.begin(), p.end());
}

double IntersectionArea(const BBox& a, const BBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double Iou(const BBox& a, const BBox& b) {
  const double inter = IntersectionArea(a, b);
  if (inter <= 0.0) return 0.0;
  return inter / (a.Area() + b.Area() - inter);
}

BBox UnionBox(const BBox& a, const BBox& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

}  // namespace sgg
