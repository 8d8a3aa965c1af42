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

#include <optional>
#include <string>
#include <vector>

#include "kmsgibbs/hamiltonian.hpp"
#include "kmsgibbs/linalg.hpp"

namespace kmsgibbs {

/** Matrix of X -> sum_a A_a X A_a^dagger, i.e. sum_a A_a kron conj(A_a). */
inline CMatrix superop_from_kraus(const std::vector<CMatrix>& kraus, int d) {
  CMatrix s = CMatrix::Zero(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);
  for (const auto& a : kraus) s += kron(a, a.conjugate());
  return s;
}

/** Completely positive map as a Kraus list with its cached superoperator. */
class CPMap {
 public:
  CPMap() = default;
  explicit CPMap(int d) : d_(d), superop_(CMatrix::Zero(d * d, d * d)) {}
  explicit CPMap(std::vector<CMatrix> kraus, int d = -1) : kraus_(std::move(kraus)) {
    if (d < 0) {
      if (kraus_.empty()) fail(ErrorCode::kShape, "CPMap without Kraus operators needs a dimension");
      d = static_cast<int>(kraus_.front().rows());
    }
    d_ = d;
    for (const auto& k : kraus_) {
      if (k.rows() != d_ || k.cols() != d_) fail(ErrorCode::kShape, "Kraus operators must be d x d");
      require_finite(k, "Kraus operator");
    }
    superop_ = superop_from_kraus(kraus_, d_);
  }

  int dim() const { return d_; }
  const std::vector<CMatrix>& kraus() const { return kraus_; }
  std::size_t size() const { return kraus_.size(); }
  const CMatrix& superop() const { return superop_; }
  CMatrix apply(const CMatrix& x) const {
    CMatrix y = CMatrix::Zero(d_, d_);
    for (const auto& a : kraus_) y += a * x * a.adjoint();
    return y;
  }
  CMatrix apply_adjoint(const CMatrix& x) const {
    CMatrix y = CMatrix::Zero(d_, d_);
    for (const auto& a : kraus_) y += a.adjoint() * x * a;
    return y;
  }
  CPMap scaled(double c) const {
    std::vector<CMatrix> ks;
    const double r = std::sqrt(c);
    for (const auto& a : kraus_) ks.push_back(r * a);
    return CPMap(std::move(ks), d_);
  }
  CPMap adjoint() const {
    std::vector<CMatrix> ks;
    for (const auto& a : kraus_) ks.push_back(a.adjoint());
    return CPMap(std::move(ks), d_);
  }
  CPMap plus(const CPMap& other) const {
    std::vector<CMatrix> ks = kraus_;
    ks.insert(ks.end(), other.kraus_.begin(), other.kraus_.end());
    return CPMap(std::move(ks), d_);
  }

 private:
  int d_ = 0;
  std::vector<CMatrix> kraus_;
  CMatrix superop_;
};

/** T^dagger[I] = sum_a A_a^dagger A_a. */
inline CMatrix trace_operator(const CPMap& t) {
  CMatrix s = CMatrix::Zero(t.dim(), t.dim());
  for (const auto& a : t.kraus()) s += a.adjoint() * a;
  return s;
}

/** Choi matrix: reshuffle J[(i,k),(j,l)] = S[(i,j),(k,l)], equal to sum_a vec(A)vec(A)^dagger. */
inline CMatrix choi_from_superop(const CMatrix& s, int d) {
  CMatrix j(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int jj = 0; jj < d; ++jj)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) j(i * d + k, jj * d + l) = s(i * d + jj, k * d + l);
  return j;
}

inline CMatrix superop_from_choi(const CMatrix& j, int d) {
  // The reshuffle is an involution.
  return choi_from_superop(j, d);
}

inline CMatrix choi(const CPMap& t) { return choi_from_superop(t.superop(), t.dim()); }

/** Kraus operators from the eigen-decomposition of a Choi matrix; drops eigenvalues below 1e-12 trace. */
inline std::vector<CMatrix> kraus_from_choi(const CMatrix& j, int d, double rel_cut = 1e-12) {
  const EigenSystem es = herm_eig_unchecked(j);
  const double tr = std::max(0.0, hermitian_part(j).trace().real());
  std::vector<CMatrix> ks;
  for (Eigen::Index k = es.values.size() - 1; k >= 0; --k) {
    const double lam = es.values(k);
    if (lam <= rel_cut * tr || lam <= 0.0) continue;
    ks.push_back(std::sqrt(lam) * unvec(es.vectors.col(k), d, d));
  }
  return ks;
}

inline CPMap cpmap_from_superop(const CMatrix& s, int d) {
  return CPMap(kraus_from_choi(choi_from_superop(s, d), d), d);
}

/** Similarity (rho^{-1/4} kron rho^{*-1/4}) S (rho^{1/4} kron rho^{*1/4}) of any superoperator matrix. */
inline CMatrix discriminant(const CMatrix& superop, const GibbsState& rho) {
  const CMatrix left = kron(rho.rho_mquarter, rho.rho_mquarter.conjugate());
  const CMatrix right = kron(rho.rho_quarter, rho.rho_quarter.conjugate());
  return left * superop * right;
}

inline CMatrix discriminant(const CPMap& t, const GibbsState& rho) { return discriminant(t.superop(), rho); }

/** ||D - D^dagger|| (spectral norm) of the discriminant. */
inline double db_residual(const CMatrix& superop, const GibbsState& rho) {
  const CMatrix dsc = discriminant(superop, rho);
  return op_norm(dsc - dsc.adjoint());
}

inline double db_residual(const CPMap& t, const GibbsState& rho) { return db_residual(t.superop(), rho); }

/** Detailed-balance pass threshold 1e-9 * ||T||. */
inline double db_threshold(const CMatrix& superop, double rel = 1e-9) {
  return rel * std::max(1.0, op_norm(superop));
}

struct VerificationReport {
  double db_residual = 0.0;
  double trace_residual = 0.0;
  double cp_min_eig = 0.0;
  double fixed_point_residual = 0.0;
  std::optional<double> gap;
  std::vector<std::string> notes;
};

/** Trace preservation and complete positivity of a Kraus map. */
inline VerificationReport cptp_check(const CPMap& q) {
  VerificationReport r;
  const int d = q.dim();
  r.trace_residual = op_norm(trace_operator(q) - CMatrix::Identity(d, d));
  const EigenSystem es = herm_eig_unchecked(choi(q));
  r.cp_min_eig = es.values.minCoeff();
  return r;
}

struct ErgodicityResult {
  bool ergodic = false;
  int commutant_dim = 0;
};

/**
 * Commutant dimension of the adjoint-closed Kraus set, from the null space of
 * the stacked system M A - A M = 0.
 */
inline ErgodicityResult ergodicity_check(const std::vector<CMatrix>& kraus, int d) {
  std::vector<CMatrix> ops;
  for (const auto& a : kraus) {
    ops.push_back(a);
    ops.push_back(a.adjoint());
  }
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  CMatrix gram = CMatrix::Zero(n, n);
  for (const auto& a : ops) {
    const CMatrix c = right_superop(a) - left_superop(a);
    gram += c.adjoint() * c;
  }
  const EigenSystem es = herm_eig_unchecked(gram);
  const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
  int null = 0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k)
    if (es.values(k) <= 1e-10 * scale) ++null;
  return {null == 1, null};
}

inline ErgodicityResult ergodicity_check(const CPMap& t) { return ergodicity_check(t.kraus(), t.dim()); }

/** ||S - S^dagger|| relative check for a self-adjoint superoperator. */
inline bool is_self_adjoint_superop(const CMatrix& s, double rel_tol = 1e-10) {
  return op_norm(s - s.adjoint()) <= rel_tol * std::max(1.0, op_norm(s));
}

}  // namespace kmsgibbs
