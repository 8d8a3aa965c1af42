// Copyright 2026 The kmsgibbs Authors
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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "kmsgibbs/linalg.hpp"

namespace kmsgibbs {

/**
 * Counter-based generator "splitmix64-ctr": draw k of stream (seed) is
 * mix(seed * phi + k), where mix is the SplitMix64 finalizer. Standard
 * library distributions are avoided because their output is not specified
 * across implementations.
 */
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix(mix(seed_) + counter_++); }

  /** Uniform in [0, 1). */
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /** Standard normal via Box-Muller (one value per pair of draws). */
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

inline CMatrix random_ginibre(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = cplx(rng.normal(), rng.normal()) / std::sqrt(2.0);
  return m;
}

/** GUE sample rescaled to spectral norm `norm` (norm <= 0 keeps the raw scale). */
inline CMatrix random_hermitian(CounterRng& rng, Eigen::Index d, double norm = 1.0) {
  const CMatrix g = random_ginibre(rng, d, d);
  CMatrix h = 0.5 * (g + g.adjoint());
  if (norm > 0) {
    const double n = op_norm(h);
    if (n > 0) h *= norm / n;
  }
  return h;
}

inline CMatrix random_unit_norm(CounterRng& rng, Eigen::Index d) {
  CMatrix a = random_ginibre(rng, d, d);
  return a / op_norm(a);
}

/** Random PSD matrix G G^dagger with trace scale of order d. */
inline CMatrix random_psd(CounterRng& rng, Eigen::Index d) {
  const CMatrix g = random_ginibre(rng, d, d);
  return g * g.adjoint();
}

/**
 * Kraus list closed under adjoint: `pairs` operators A_k together with their
 * adjoints. The resulting map is self-adjoint as a superoperator.
 */
inline std::vector<CMatrix> random_self_adjoint_kraus(CounterRng& rng, Eigen::Index d, int pairs,
                                                      double scale = 1.0) {
  std::vector<CMatrix> ks;
  for (int k = 0; k < pairs; ++k) {
    const CMatrix a = scale * random_unit_norm(rng, d);
    ks.push_back(a);
    ks.push_back(a.adjoint());
  }
  return ks;
}

}  // namespace kmsgibbs
