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
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kmsgibbs/hamiltonian.hpp"
#include "kmsgibbs/linalg.hpp"
#include "kmsgibbs/quadrature.hpp"

namespace kmsgibbs {

struct TimeIntegral {
  CMatrix value;
  QuadratureScheme scheme;
  std::vector<std::string> notes;
};

namespace detail {

/** Evolution U(t) = e^{-iHt} from the eigensystem of H (no Bohr clustering involved). */
struct Evolution {
  const HamiltonianModel& h;
  CMatrix operator()(double t) const {
    const RVector& e = h.energies();
    CVector ph(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) ph(i) = std::exp(-kI * e(i) * t);
    return h.V() * ph.asDiagonal() * h.V().adjoint();
  }
};

}  // namespace detail

/** Truncation domain [-T, -theta] u [theta, T] with T = ln(4/eps)/(2 pi), theta = eps/(2||H||). */
struct TruncationDomain {
  double theta = 0.0;
  double t_max = 0.0;
  bool empty = false;
};

inline TruncationDomain truncation_domain(double hnorm, double eps) {
  TruncationDomain d;
  d.t_max = std::log(4.0 / eps) / (2 * std::numbers::pi);
  d.theta = hnorm > 0 ? eps / (2 * hnorm) : std::numeric_limits<double>::infinity();
  d.empty = !(d.theta < d.t_max);
  return d;
}

/**
 * Truncated time integral of S: int over the truncation domain of
 * i/sinh(2 pi t) e^{-iHt} M e^{iHt} dt, paired as t and -t so the odd
 * singular kernel cancels exactly.
 */
inline TimeIntegral s_truncated(const CMatrix& m, const HamiltonianModel& h, double eps) {
  if (!(eps > 0 && eps <= 0.2)) fail(ErrorCode::kDomain, "eps must lie in (0, 1/5]");
  if (m.rows() != h.dim() || m.cols() != h.dim()) fail(ErrorCode::kShape, "operator dimension does not match H");
  const TruncationDomain dom = truncation_domain(h.norm(), eps);
  TimeIntegral r;
  if (dom.empty) {
    r.value = CMatrix::Zero(m.rows(), m.cols());
    r.notes.emplace_back("truncation domain is empty; the truncated integral is 0");
    r.scheme.converged = true;
    return r;
  }
  const detail::Evolution u{h};
  auto kernel = [](double t) { return kI / std::sinh(2 * std::numbers::pi * t); };
  auto heis = [&](double t) -> CMatrix {
    const CMatrix ut = u(t);
    return ut * m * ut.adjoint();
  };
  auto res = integrate_odd_pv(kernel, heis, dom.theta, dom.t_max, 1e-12, 1e-12);
  if (!res.scheme.converged) fail(ErrorCode::kAccuracy, "s_truncated quadrature did not converge");
  r.value = res.value;
  r.scheme = res.scheme;
  return r;
}

/** S_c[M] = int_{-t_max}^{t_max} e^{iHt} M e^{-iHt} / cosh(2 pi t) dt; the tail is below 2 e^{-2 pi t_max}. */
inline TimeIntegral s_c_integral(const CMatrix& m, const HamiltonianModel& h, double t_max = 6.0) {
  if (!(t_max >= 2.0)) fail(ErrorCode::kDomain, "t_max must be at least 2");
  if (m.rows() != h.dim() || m.cols() != h.dim()) fail(ErrorCode::kShape, "operator dimension does not match H");
  const detail::Evolution u{h};
  auto f = [&](double t) -> CMatrix {
    const CMatrix ut = u(-t);
    return (ut * m * ut.adjoint()) / std::cosh(2 * std::numbers::pi * t);
  };
  auto res = integrate(f, -t_max, t_max, {0.0}, 1e-12, 1e-12);
  if (!res.scheme.converged) fail(ErrorCode::kAccuracy, "s_c_integral quadrature did not converge");
  TimeIntegral r{res.value, res.scheme, {}};
  std::ostringstream os;
  os << "analytic tail bound " << 2 * std::exp(-2 * std::numbers::pi * t_max);
  r.notes.push_back(os.str());
  return r;
}

/**
 * Smooth kernel i (1 - cos(eta t)) / sinh(2 pi t), which has no singularity.
 * The exact weight is 1/2 tanh(nu/4) - 1/4 tanh((nu + eta)/4) - 1/4 tanh((nu - eta)/4).
 */
inline TimeIntegral s_smooth(const CMatrix& m, const HamiltonianModel& h, double eta, double t_max = 7.0) {
  if (!(eta > 0)) fail(ErrorCode::kDomain, "eta must be positive");
  const detail::Evolution u{h};
  auto kernel = [eta](double t) { return kI * (1 - std::cos(eta * t)) / std::sinh(2 * std::numbers::pi * t); };
  auto heis = [&](double t) -> CMatrix {
    const CMatrix ut = u(t);
    return ut * m * ut.adjoint();
  };
  auto res = integrate_odd_pv(kernel, heis, 0.0, t_max, 1e-12, 1e-12);
  if (!res.scheme.converged) fail(ErrorCode::kAccuracy, "s_smooth quadrature did not converge");
  return {res.value, res.scheme, {}};
}

/**
 * Threshold 1/2 ||H|| + ln((3 ceil(log2 d) + 3) / (2 eps)). The residual weight
 * of s_smooth is 1/4 (tanh((nu - eta)/4) + tanh((nu + eta)/4)), so the
 * operator-norm error is at most eps when s_smooth is called with 4 times
 * this value.
 */
inline double smooth_eta(double hnorm, int d, double eps) {
  const double lg = std::ceil(std::log2(static_cast<double>(std::max(d, 1))));
  return 0.5 * hnorm + std::log((3 * lg + 3) / (2 * eps));
}

enum class FourierPair { kA, kB, kC };

struct FourierCheck {
  std::string name;
  std::string statement;
  double max_deviation = 0.0;
  int points = 0;
};

/** Uniform grid of n points on [a, b]. */
inline std::vector<double> linear_grid(double a, double b, int n) {
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
  return g;
}

/**
 * Numerical check of the three Fourier pairs. Forward transform is
 * (1/sqrt(2 pi)) int f(w) e^{-iwt} dw and the inverse uses e^{+iwt}.
 *  (a) inverse transform of i sqrt(2 pi)/sinh(2 pi t) equals -1/2 tanh(w/4), grid in w;
 *  (b) transform of p(w) = min(1/2, e^{-w} - 1/2) equals 1/(sqrt(2 pi) t (t - i)), grid in t;
 *  (c) transform of 1/(2 cosh(w/4)) equals sqrt(2 pi)/cosh(2 pi t), grid in t.
 * p is continuous with an integrable derivative, so (b) is evaluated as
 * FT[p'](t) / (i t), which needs t != 0.
 */
inline FourierCheck fourier_pair_check(FourierPair pair, const std::vector<double>& grid) {
  constexpr double pi = std::numbers::pi;
  const double rt = std::sqrt(2 * pi);
  FourierCheck c;
  c.points = static_cast<int>(grid.size());
  switch (pair) {
    case FourierPair::kA: {
      c.name = "a";
      c.statement = "PV (1/sqrt(2pi)) int i sqrt(2pi)/sinh(2pi t) e^{iwt} dt = -1/2 tanh(w/4)";
      for (double w : grid) {
        auto kernel = [](double t) { return kI / std::sinh(2 * pi * t); };
        auto f = [w](double t) { return std::exp(kI * w * t); };
        const cplx v = integrate_odd_pv(kernel, f, 0.0, 8.0, 1e-13, 1e-13).value;
        c.max_deviation = std::max(c.max_deviation, std::abs(v - cplx(-0.5 * std::tanh(0.25 * w))));
      }
      break;
    }
    case FourierPair::kB: {
      c.name = "b";
      c.statement = "(1/sqrt(2pi)) int min(1/2, e^{-w} - 1/2) e^{-iwt} dw = 1/(sqrt(2pi) t (t - i))";
      for (double t : grid) {
        if (t == 0.0) fail(ErrorCode::kDomain, "pair (b) is singular at t = 0");
        auto dp = [t](double w) { return -std::exp(-w) * std::exp(-kI * w * t); };
        const cplx ftd = integrate(dp, 0.0, 45.0, {}, 1e-14, 1e-13).value / rt;
        const cplx v = ftd / (kI * t);
        const cplx expect = 1.0 / (rt * t * (t - kI));
        c.max_deviation = std::max(c.max_deviation, std::abs(v - expect));
      }
      break;
    }
    case FourierPair::kC: {
      c.name = "c";
      c.statement = "(1/sqrt(2pi)) int e^{-iwt}/(2 cosh(w/4)) dw = sqrt(2pi)/cosh(2pi t)";
      for (double t : grid) {
        auto f = [t](double w) { return std::cos(w * t) / (2 * std::cosh(0.25 * w)); };
        // Even integrand; the imaginary part vanishes by symmetry.
        const double v = 2 * integrate(f, 0.0, 160.0, {}, 1e-14, 1e-13).value / rt;
        c.max_deviation = std::max(c.max_deviation, std::abs(v - rt / std::cosh(2 * pi * t)));
      }
      break;
    }
  }
  return c;
}

}  // namespace kmsgibbs
