// breathid/random.h

// Copyright 2026  The breathid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef BREATHID_RANDOM_H_
#define BREATHID_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace breathid {

using Rng = std::mt19937_64;

/// Combines a base seed with any number of stream identifiers into a new
/// seed (splitmix64 finalizer). Every stochastic step derives its generator
/// through this so that streams never alias.
inline uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> ids) {
  uint64_t h = base ^ 0x9E3779B97F4A7C15ULL;
  auto mix = [](uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  h = mix(h);
  for (uint64_t id : ids) h = mix(h ^ mix(id));
  return h;
}

}  // namespace breathid

#endif  // BREATHID_RANDOM_H_
