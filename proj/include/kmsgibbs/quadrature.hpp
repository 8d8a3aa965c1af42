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

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "kmsgibbs/linalg.hpp"

namespace kmsgibbs {

namespace detail {

inline double qnorm(double x) { return std::abs(x); }
inline double qnorm(const cplx& x) { return std::abs(x); }
inline double qnorm(const CMatrix& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

// Eigen expressions are evaluated so accumulators hold plain values.
inline double materialize(double x) { return x; }
inline cplx materialize(const cplx& x) { return x; }
template <class D>
typename D::PlainObject materialize(const Eigen::MatrixBase<D>& x) {
  return x.eval();
}

}  // namespace detail

/** Description of a composite rule after refinement. */
struct QuadratureScheme {
  double a = 0.0;
  double b = 0.0;
  double core = 0.0;       // excluded half-width around 0 (0 if none)
  int nodes = 0;
  std::string rule = "composite Gauss-Legendre (30 points/panel)";
  double estimated_error = 0.0;
  bool converged = false;
};

template <class T>
struct QuadResult {
  T value;
  QuadratureScheme scheme;
};

/**
 * Composite 30-point Gauss-Legendre on [a, b] split at `breaks`. The number of
 * panels per segment doubles until successive estimates differ by at most
 * max(abs_tol, rel_tol * |value|).
 */
template <class F>
auto integrate(F&& f, double a, double b, std::vector<double> breaks = {}, double abs_tol = 1e-11,
               double rel_tol = 1e-13, int max_levels = 12) {
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  const auto& xs = Gauss::abscissa();
  const auto& ws = Gauss::weights();
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);

  using T = decltype(detail::materialize(f(a)));
  auto rule = [&](int panels, int& count) {
    T sum = detail::materialize(f(0.5 * (a + b)));
    sum *= 0.0;
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const double h = (pts[s + 1] - pts[s]) / panels;
      for (int p = 0; p < panels; ++p) {
        const double lo = pts[s] + p * h;
        const double c = lo + 0.5 * h;
        const double r = 0.5 * h;
        for (std::size_t k = 0; k < xs.size(); ++k) {
          // 30 is even, so no abscissa sits at the panel centre.
          sum += (ws[k] * r) * (detail::materialize(f(c - r * xs[k])) + detail::materialize(f(c + r * xs[k])));
          count += 2;
        }
      }
    }
    return sum;
  };
  QuadResult<T> res{T{}, {}};
  res.scheme.a = a;
  res.scheme.b = b;
  int count = 0;
  T prev = rule(1, count);
  for (int level = 1, panels = 2; level <= max_levels; ++level, panels *= 2) {
    int c2 = 0;
    T cur = rule(panels, c2);
    const double diff = detail::qnorm(T(cur - prev));
    const double tol = std::max(abs_tol, rel_tol * detail::qnorm(cur));
    res.value = cur;
    res.scheme.nodes = c2;
    res.scheme.estimated_error = diff;
    if (diff <= tol) {
      res.scheme.converged = true;
      return res;
    }
    prev = cur;
  }
  return res;
}

/** Same as integrate() but raises an accuracy error when refinement does not settle. */
template <class F>
auto integrate_or_throw(F&& f, double a, double b, std::vector<double> breaks = {}, double abs_tol = 1e-11,
                        double rel_tol = 1e-13, int max_levels = 12) {
  auto r = integrate(std::forward<F>(f), a, b, std::move(breaks), abs_tol, rel_tol, max_levels);
  if (!r.scheme.converged) {
    std::ostringstream os;
    os << "quadrature on [" << a << ", " << b << "] did not converge (last change "
       << r.scheme.estimated_error << ")";
    fail(ErrorCode::kAccuracy, os.str());
  }
  return r;
}

/**
 * Principal-value integral of an odd kernel over [-T, -theta] u [theta, T]:
 * int_theta^T k(t) (F(t) - F(-t)) dt. Pairing t with -t makes the odd
 * singular part cancel exactly instead of by subtraction.
 */
template <class K, class F>
auto integrate_odd_pv(K&& kernel, F&& fn, double theta, double T, double abs_tol = 1e-11,
                      double rel_tol = 1e-13, int max_levels = 12) {
  auto g = [&](double t) { return detail::materialize(kernel(t) * (fn(t) - fn(-t))); };
  auto r = integrate(g, theta, T, {}, abs_tol, rel_tol, max_levels);
  r.scheme.a = -T;
  r.scheme.b = T;
  r.scheme.core = theta;
  return r;
}

}  // namespace kmsgibbs
