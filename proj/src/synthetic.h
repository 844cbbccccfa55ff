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
#ifndef SGG_SYNTHETIC_H_
#define SGG_SYNTHETIC_H_

// Synthetic corpora with planted relationship structure.
//
// Each image holds a handful of boxed objects with classes drawn uniformly
// from 1..O-1. Every unordered pair gets one of eight spatial codes
// (orientation x {overlap, near, mid, far}); the predicate of the ordered pair
// (i, j) is rule(class_i, class_j, code). Node features are class embeddings
// plus Gaussian noise; union features mix both embeddings with a code
// embedding, so the rule is recoverable from (x_i, x_j, u_ij).
//
// Foreground rule cells per code are dealt so that predicate r gets a share
// proportional to r^-tail_exponent.

#include <cstdint>
#include <vector>

#include "corpus.h"
#include "json_util.h"

namespace sgg {

inline constexpr int kNumSpatialCodes = 8;
inline constexpr double kCanvasSize = 100.0;

struct GenConfig {
  int num_object_classes = 6;     // O, including background 0
  int num_predicate_classes = 5;  // R, including background 0
  size_t feature_dim = 32;
  size_t union_dim = 32;
  size_t num_images = 300;
  size_t min_nodes = 3;
  size_t max_nodes = 6;
  double noise_sigma = 0.0;
  double tail_exponent = 0.0;
  // Fraction of (subject, object) class cells that carry a predicate per code.
  double rel_density = 0.5;
  uint64_t seed = 1;
};

// Throws ConfigError for infeasible settings.
void ValidateGenConfig(const GenConfig& config);

Json GenConfigToJson(const GenConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
GenConfig GenConfigFromJson(const Json& j, GenConfig base = {});

// Spatial code of a box pair; symmetric in its arguments.
int SpatialCode(const BBox& a, const BBox& b);

// Normalized planted predicate shares, index 0 (background) = 0.
Vec PlantedPredicateShares(int num_predicate_classes, double tail_exponent);

// Deterministic in config.seed.
Corpus GenCorpus(const GenConfig& config);

// Re-derives every image's triplets from the stored rule table and spatial
// codes; throws DataError at the first disagreement.
void CheckRuleConsistency(const Corpus& corpus);

}  // namespace sgg

#endif  // SGG_SYNTHETIC_H_
