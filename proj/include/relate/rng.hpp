// Copyright 2026 The relate-kg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace relate {

using Rng = std::mt19937_64;

// Named sub-streams derived from the single user seed. The scheme is
// splitmix64(seed ^ stream constant) so each stream is independent of the
// order in which others are consumed.
enum class Stream : std::uint64_t {
  kInit = 0x1,
  kBatch = 0x2,
  kNegatives = 0x3,
  kValidSubsample = 0x4,
  kGenerator = 0x5,
  kSplit = 0x6,
  kPerturb = 0x7,
  kFormal = 0x8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(seed ^ (static_cast<std::uint64_t>(stream) * 0xd1342543de82ef95ULL));
}

inline Rng make_rng(std::uint64_t seed, Stream stream) { return Rng(derive_seed(seed, stream)); }

// Uniform double in [lo, hi) from the 53 high bits; avoids the
// implementation-defined std::uniform_real_distribution algorithm so streams
// are stable across standard libraries.
inline double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

// Uniform integer in [0, n). Lemire-style rejection keeps it unbiased.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Fisher-Yates over any random-access range using uniform_index.
template <typename Range>
void shuffle(Range& range, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(range.size());
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    using std::swap;
    swap(range[i - 1], range[j]);
  }
}

}  // namespace relate
