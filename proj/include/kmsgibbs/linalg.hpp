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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "kmsgibbs/error.hpp"

namespace kmsgibbs {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr cplx kI{0.0, 1.0};

inline bool all_finite(const CMatrix& m) { return m.allFinite(); }

inline void require_finite(const CMatrix& m, const std::string& what) {
  if (!m.allFinite()) fail(ErrorCode::kNonFinite, what + " has non-finite entries");
}

inline void require_square(const CMatrix& m, const std::string& what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    fail(ErrorCode::kShape, what + " must be square and non-empty");
}

/** Spectral norm (largest singular value). */
inline double op_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() <= 16 && m.cols() <= 16) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
  }
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

/** max |M - M^dagger| over entries. */
inline double hermitian_defect(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return hermitian_defect(m) <= rel_tol * std::max(1.0, op_norm(m));
}

/** Validates the Hermitian tag: finite, square and max|M - M^dagger| <= 1e-12 max(1,||M||). */
inline void require_hermitian(const CMatrix& m, const std::string& what) {
  require_square(m, what);
  require_finite(m, what);
  const double defect = hermitian_defect(m);
  const double scale = std::max(1.0, op_norm(m));
  if (defect > 1e-12 * scale) {
    std::ostringstream os;
    os << what << " is not Hermitian (max |M - M^dagger| = " << defect << ")";
    fail(ErrorCode::kSymmetryViolation, os.str());
  }
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

/** Eigenvalues ascending, eigenvectors as unitary columns. */
struct EigenSystem {
  RVector values;
  CMatrix vectors;
};

inline EigenSystem herm_eig(const CMatrix& m) {
  require_hermitian(m, "herm_eig input");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  if (es.info() != Eigen::Success) fail(ErrorCode::kDomain, "eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

/** Eigen-decomposition of a matrix that is Hermitian up to roundoff; no tag check. */
inline EigenSystem herm_eig_unchecked(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  if (es.info() != Eigen::Success) fail(ErrorCode::kDomain, "eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

template <class F>
CMatrix matrix_func(const EigenSystem& es, F&& f) {
  const Eigen::Index d = es.values.size();
  CVector fv(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto v = f(es.values(i));
    const cplx c(v);
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      std::ostringstream os;
      os << "function is not finite at eigenvalue " << es.values(i);
      fail(ErrorCode::kDomain, os.str());
    }
    fv(i) = c;
  }
  return es.vectors * fv.asDiagonal() * es.vectors.adjoint();
}

/** V diag(f(E)) V^dagger. */
template <class F>
CMatrix matrix_func(const CMatrix& m, F&& f) {
  return matrix_func(herm_eig(m), std::forward<F>(f));
}

inline double default_clamp_tol(const CMatrix& p) { return 1e-10 * op_norm(p); }

/**
 * Square root of a PSD matrix. Eigenvalues in [-clamp_tol, 0) are set to
 * zero; anything below -clamp_tol is an error. A negative clamp_tol selects
 * the default 1e-10 ||P||.
 */
inline CMatrix psd_sqrt(const CMatrix& p, double clamp_tol = -1.0) {
  const EigenSystem es = herm_eig(p);
  if (clamp_tol < 0) clamp_tol = 1e-10 * es.values.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (es.values(i) < -clamp_tol) {
      std::ostringstream os;
      os << "matrix is not PSD: eigenvalue " << es.values(i) << " below -" << clamp_tol;
      fail(ErrorCode::kNotPsd, os.str());
    }
  }
  return matrix_func(es, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

struct Svd {
  CMatrix u;
  RVector sigma;  // descending
  CMatrix w;
};

/** M = U diag(sigma) W^dagger. */
inline Svd svd(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> s(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {s.matrixU(), s.singularValues(), s.matrixV()};
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// Row-major vectorization: vec(X)[i * cols + j] = X(i, j). With this
// convention vec(A X B^T) = (A kron B) vec(X).
inline CVector vec(const CMatrix& m) {
  CVector v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

inline CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) fail(ErrorCode::kShape, "unvec: length does not match shape");
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(i * cols + j);
  return m;
}

inline CMatrix unvec_square(const CVector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) fail(ErrorCode::kShape, "unvec: length is not a perfect square");
  return unvec(v, d, d);
}

/** Matrix of X -> A X B. */
inline CMatrix sandwich_superop(const CMatrix& a, const CMatrix& b) { return kron(a, b.transpose()); }

/** Matrix of X -> A X. */
inline CMatrix left_superop(const CMatrix& a) {
  return kron(a, CMatrix::Identity(a.rows(), a.rows()));
}

/** Matrix of X -> X B. */
inline CMatrix right_superop(const CMatrix& b) {
  return kron(CMatrix::Identity(b.rows(), b.rows()), b.transpose());
}

/** Applies a superoperator matrix to a square matrix argument. */
inline CMatrix apply_superop(const CMatrix& s, const CMatrix& x) {
  return unvec(s * vec(x), x.rows(), x.cols());
}

/** General matrix exponential by scaling and squaring with a Pade core. */
inline CMatrix expm(const CMatrix& m) { return m.exp(); }

/** Trace norm of a Hermitian matrix (sum of |eigenvalues|). */
inline double trace_norm_hermitian(const CMatrix& m) {
  return herm_eig_unchecked(m).values.cwiseAbs().sum();
}

/** Trace norm of a general matrix. */
inline double trace_norm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> s(m);
  return s.singularValues().sum();
}

}  // namespace kmsgibbs
