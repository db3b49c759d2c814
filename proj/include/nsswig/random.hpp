// Copyright 2026 The nsswig Authors
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

#ifndef NSSWIG_RANDOM_HPP
#define NSSWIG_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace nsswig {

using Rng = std::mt19937_64;

/// One step of the SplitMix64 generator; advances `state`.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

/// Counter-based seed derivation.
/**
 * Every random stream in a run is keyed by a path of integers below the root
 * seed (e.g. {iteration, slot}). Streams depend only on the path, never on the
 * order in which they are requested, so parallel and sequential execution
 * produce identical draws.
 */
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = root;
  std::uint64_t out = splitmix64(state);
  for (const auto key : path) {
    state ^= key + 0x632BE59BD9B4E019ULL + (out << 6U) + (out >> 2U);
    out = splitmix64(state);
  }
  return out;
}

inline Rng make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  return Rng{derive_seed(root, path)};
}

/// Uniform draw on the half-open interval (0, 1].
inline double uniform_open0(Rng& rng) {
  return 1.0 - std::generate_canonical<double, 53>(rng);
}

inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>{0.0, 1.0}(rng);
}

}  // namespace nsswig

#endif  // NSSWIG_RANDOM_HPP
