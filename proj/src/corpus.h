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
#ifndef SGG_CORPUS_H_
#define SGG_CORPUS_H_

// A corpus is a list of scene graphs with precomputed node and union-box
// features. On disk it is a directory:
//
//   graphs.jsonl    one ground-truth scene graph per line
//   features.jsonl  one {image_id, X, U[, spatial_codes]} object per line
//   vocab.json      {object_classes: [...], predicate_classes: [...]}
//   meta.json       optional generator echo and planted rule table

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graph.h"
#include "json_util.h"
#include "linalg.h"
#include "message_passing.h"

namespace sgg {

struct ImageFeatures {
  Mat x;             // n x d
  UnionFeatures u;   // n x n pairs of width d_u
  // Latent relative-position code per ordered pair (row-major n x n, -1 on
  // the diagonal). Only synthetic corpora carry it.
  std::vector<int> spatial_codes;
};

struct Vocab {
  std::vector<std::string> object_classes;
  std::vector<std::string> predicate_classes;
};

// Planted generative rule: (subject class, object class, code) -> predicate.
struct RuleTable {
  int num_object_classes = 0;
  int num_codes = 0;
  std::vector<int> predicates;

  int At(int subject_class, int object_class, int code) const;
};

struct Corpus {
  int num_object_classes = 0;
  int num_predicate_classes = 0;
  size_t feature_dim = 0;
  size_t union_dim = 0;
  Vocab vocab;
  std::vector<SceneGraph> graphs;
  std::vector<ImageFeatures> features;
  std::optional<RuleTable> rules;
  Json meta;  // generator echo; null for external corpora

  size_t size() const { return graphs.size(); }
  // Index of the image with this id; throws DataError when unknown.
  size_t Find(const std::string& image_id) const;
};

// Default vocabulary: "__background__" at index 0 followed by generated names.
Vocab DefaultVocab(int num_object_classes, int num_predicate_classes);

// Throws on any inconsistency between graphs, features and class counts.
void ValidateCorpus(const Corpus& corpus);

// Deterministic shuffle split; round(fraction * N) images go to the first
// part. Image order inside each part follows the original order.
std::pair<Corpus, Corpus> Split(const Corpus& corpus, double train_fraction, uint64_t seed);

// Per-predicate count of ground-truth triplets.
std::vector<long> PredicateHistogram(const Corpus& corpus);

Json GraphToJson(const SceneGraph& graph);
SceneGraph GraphFromJson(const Json& j);

void WriteCorpus(const Corpus& corpus, const std::string& dir);
Corpus ReadCorpus(const std::string& dir);

// Prediction files share the graph schema, with node scores and a fourth
// triplet element holding the confidence.
void WritePredictions(const std::vector<SceneGraph>& predictions, const std::string& path);
std::vector<SceneGraph> ReadPredictions(const std::string& path);

}  // namespace sgg

#endif  // SGG_CORPUS_H_
