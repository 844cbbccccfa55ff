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
#ifndef SGG_SEED_H_
#define SGG_SEED_H_

#include <cstdint>

namespace sgg {

// Stream tags; every random consumer derives its own seed from the run seed.
enum class SeedTag : uint64_t {
  kRules = 1,
  kEmbeddings = 2,
  kImages = 3,
  kSplit = 4,
  kInit = 5,
  kShuffle = 6,
  kPairs = 7,
  kGradcheck = 8,
  kAttention = 9,
};

// splitmix64 finalizer over (seed, tag, index).
inline uint64_t DeriveSeed(uint64_t seed, SeedTag tag, uint64_t index = 0) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<uint64_t>(tag) + 1) +
               0xbf58476d1ce4e5b9ULL * index;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sgg

#endif  // SGG_SEED_H_
