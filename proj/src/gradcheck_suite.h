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
#ifndef SGG_GRADCHECK_SUITE_H_
#define SGG_GRADCHECK_SUITE_H_

// Finite-difference checks of every differentiable operation and of the
// full image loss with respect to every model parameter, over seeded
// random fixtures.

#include <cstdint>
#include <string>
#include <vector>

#include "json_util.h"
#include "linalg.h"

namespace sgg {

struct GradcheckConfig {
  size_t fixtures = 10;
  double tolerance = 1e-5;
  size_t feature_dim = 16;
  size_t union_dim = 8;
  size_t nodes = 4;
  size_t hidden_dim = 8;
  size_t fusion_dim = 16;
  int num_object_classes = 5;
  int num_predicate_classes = 4;
  // Name of a model parameter ("dmp.W_t2", "arm.W_r", ...) whose composite
  // gradient is negated; empty for none. Used to show that the checker
  // catches a broken backward pass.
  std::string fault;
  uint64_t seed = 1;
};

void ValidateGradcheckConfig(const GradcheckConfig& config);
Json GradcheckConfigToJson(const GradcheckConfig& config);
GradcheckConfig GradcheckConfigFromJson(const Json& j, GradcheckConfig base = {});

struct GradcheckCase {
  DiffOp op;
  std::vector<Mat> inputs;
};

// Operations and inputs of one fixture, in a fixed order; the last case is
// the full composite.
std::vector<GradcheckCase> BuildGradcheckCases(const GradcheckConfig& config, size_t fixture);

struct GradcheckEntry {
  size_t fixture = 0;
  GradCheckReport report;
};

struct GradcheckResult {
  std::vector<GradcheckEntry> entries;
  bool all_passed = true;
  double max_rel_error = 0.0;
  size_t entries_checked = 0;
  size_t kinks_skipped = 0;
  double seconds = 0.0;
};

GradcheckResult RunGradcheckSuite(const GradcheckConfig& config);

Json GradcheckResultToJson(const GradcheckResult& result);
// One line per operation (worst fixture) plus failures in full.
std::string GradcheckResultText(const GradcheckResult& result);

}  // namespace sgg

#endif  // SGG_GRADCHECK_SUITE_H_
