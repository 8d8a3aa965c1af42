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
#include <functional>
#include <limits>
#include <sstream>

#include "kmsgibbs/linalg.hpp"

namespace kmsgibbs {

using ScalarRule = std::function<double(double)>;

inline double g_metropolis(double r) { return std::min(1.0, r); }
inline double g_glauber(double r) { return 1.0 / (1.0 + 1.0 / r); }

/** Checks g(r) = r g(1/r) on a log grid r in [1e-6, 1e6]. */
inline void validate_rule_symmetry(const ScalarRule& g, double tol = 1e-12) {
  for (int k = 0; k <= 240; ++k) {
    const double r = std::pow(10.0, -6.0 + 12.0 * k / 240.0);
    const double lhs = g(r);
    const double rhs = r * g(1.0 / r);
    if (std::abs(lhs - rhs) > tol * std::max({1.0, std::abs(lhs), std::abs(rhs)})) {
      std::ostringstream os;
      os << "rule violates g(r) = r g(1/r) at r = " << r << " (" << lhs << " vs " << rhs << ")";
      fail(ErrorCode::kInvalidRule, os.str());
    }
  }
}

enum class ChainKind { kStochastic, kLaplacian };

/** Column-stochastic when columns sum to 1, Laplacian when they sum to 0. */
inline ChainKind classify_chain(const RMatrix& p) {
  const RVector cs = p.colwise().sum();
  if ((cs.array() - 1.0).abs().maxCoeff() <= 1e-12) return ChainKind::kStochastic;
  if (cs.array().abs().maxCoeff() <= 1e-12) return ChainKind::kLaplacian;
  fail(ErrorCode::kDomain, "matrix is neither column-stochastic nor a Laplacian");
}

/** Rebuilds the diagonal so columns sum to the chain's invariant value. */
inline void restore_diagonal(RMatrix& p, ChainKind kind) {
  const Eigen::Index d = p.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      if (i != j) off += p(i, j);
    p(j, j) = (kind == ChainKind::kStochastic ? 1.0 : 0.0) - off;
  }
}

/** P'_ij = P_ij g(v_i / v_j) off the diagonal, diagonal restored. */
inline RMatrix generalized_rule(const RMatrix& p, const RVector& v, const ScalarRule& g) {
  if (p.rows() != p.cols() || p.rows() != v.size()) fail(ErrorCode::kShape, "generalized_rule shape mismatch");
  if ((v.array() <= 0.0).any()) fail(ErrorCode::kDomain, "weights must be positive");
  validate_rule_symmetry(g);
  const ChainKind kind = classify_chain(p);
  RMatrix out = p;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (i != j) out(i, j) = p(i, j) * g(v(i) / v(j));
  restore_diagonal(out, kind);
  return out;
}

/** Hastings form: P'_ij = P_ij g(P_ji v_i / (P_ij v_j)); g(inf) := 0 and zero entries stay zero. */
inline RMatrix hastings_rule(const RMatrix& p, const RVector& v, const ScalarRule& g) {
  if (p.rows() != p.cols() || p.rows() != v.size()) fail(ErrorCode::kShape, "hastings_rule shape mismatch");
  if ((v.array() <= 0.0).any()) fail(ErrorCode::kDomain, "weights must be positive");
  validate_rule_symmetry(g);
  const ChainKind kind = classify_chain(p);
  RMatrix out = p;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (i == j) continue;
      if (p(i, j) == 0.0) {
        out(i, j) = 0.0;
        continue;
      }
      const double r = p(j, i) * v(i) / (p(i, j) * v(j));
      out(i, j) = std::isfinite(r) ? p(i, j) * g(r) : 0.0;
    }
  restore_diagonal(out, kind);
  return out;
}

/** max |P'_ij pi_j - P'_ji pi_i|. */
inline double classical_db_residual(const RMatrix& p, const RVector& pi) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) r = std::max(r, std::abs(p(i, j) * pi(j) - p(j, i) * pi(i)));
  return r;
}

/** Metropolis rate averaged over a Gaussian energy-estimate error of width sigma. */
inline double gaussian_uncertain_gamma(double nu, double sigma) {
  if (!(sigma > 0)) fail(ErrorCode::kDomain, "sigma must be positive");
  const double s2 = sigma * sigma;
  const double den = 2.0 * std::sqrt(2.0) * sigma;
  const double a = std::erfc((s2 - 2.0 * nu) / den);
  const double b = std::erfc((s2 + 2.0 * nu) / den);
  // e^{-nu} a can overflow as a product for very negative nu; a is bounded by 2.
  const double first = a == 0.0 ? 0.0 : std::exp(-nu + std::log(a));
  return 0.5 * (first + b);
}

}  // namespace kmsgibbs
