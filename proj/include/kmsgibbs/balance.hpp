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
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kmsgibbs/cpmap.hpp"
#include "kmsgibbs/hamiltonian.hpp"
#include "kmsgibbs/linalg.hpp"
#include "kmsgibbs/quadrature.hpp"

namespace kmsgibbs {

enum class ProfileClass {
  kDavies,     // gamma(-nu) = e^nu gamma(nu)
  kAmplitude,  // f(-nu) = e^{nu/2} conj(f(nu))
};

inline std::string to_string(ProfileClass c) { return c == ProfileClass::kDavies ? "davies" : "amplitude"; }

struct WeightProfile {
  std::string name;
  ProfileClass cls = ProfileClass::kDavies;
  std::function<cplx(double)> eval;

  cplx operator()(double nu) const { return eval(nu); }
};

namespace profiles {

inline double gamma_metropolis(double nu) { return nu <= 0 ? 1.0 : std::exp(-nu); }
inline double gamma_glauber(double nu) {
  return nu >= 0 ? std::exp(-nu) / (1.0 + std::exp(-nu)) : 1.0 / (1.0 + std::exp(nu));
}
inline double f_glauber(double nu) { return gamma_glauber(0.5 * nu); }  // 1/2 - 1/2 tanh(nu/4)
inline double f_metropolis(double nu) { return nu <= 0 ? 1.0 : std::exp(-0.5 * nu); }

inline WeightProfile metropolis() {
  return {"metropolis", ProfileClass::kDavies, [](double nu) { return cplx(gamma_metropolis(nu)); }};
}
inline WeightProfile glauber() {
  return {"glauber", ProfileClass::kDavies, [](double nu) { return cplx(gamma_glauber(nu)); }};
}
inline WeightProfile sqrt_metropolis() {
  return {"sqrt-metropolis", ProfileClass::kAmplitude, [](double nu) { return cplx(f_metropolis(nu)); }};
}
inline WeightProfile sqrt_glauber() {
  return {"sqrt-glauber", ProfileClass::kAmplitude, [](double nu) { return cplx(f_glauber(nu)); }};
}
/** Constant profile; balanced only at infinite temperature. */
inline WeightProfile constant(double c) {
  return {"constant", ProfileClass::kDavies, [c](double) { return cplx(c); }};
}

/** Tabulated profile, linear interpolation between (nu, value) points sorted by nu. */
inline WeightProfile custom(ProfileClass cls, std::vector<std::pair<double, double>> points,
                            std::string name = "custom") {
  if (points.size() < 2) fail(ErrorCode::kInvalidProfile, "custom profile needs at least two points");
  std::sort(points.begin(), points.end());
  for (std::size_t k = 0; k + 1 < points.size(); ++k)
    if (!(points[k + 1].first > points[k].first))
      fail(ErrorCode::kInvalidProfile, "custom profile has repeated frequencies");
  auto eval = [pts = std::move(points)](double nu) -> cplx {
    constexpr double slack = 1e-12;
    if (nu < pts.front().first - slack || nu > pts.back().first + slack) {
      std::ostringstream os;
      os << "frequency " << nu << " is outside the custom profile table [" << pts.front().first << ", "
         << pts.back().first << "]";
      fail(ErrorCode::kInvalidProfile, os.str());
    }
    auto it = std::lower_bound(pts.begin(), pts.end(), nu, [](const auto& p, double v) { return p.first < v; });
    if (it == pts.begin()) return pts.front().second;
    if (it == pts.end()) return pts.back().second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *std::prev(it);
    return y0 + (y1 - y0) * (nu - x0) / (x1 - x0);
  };
  return {std::move(name), cls, std::move(eval)};
}

/** Built-in profile by name. */
inline WeightProfile by_name(const std::string& name) {
  if (name == "metropolis") return metropolis();
  if (name == "glauber") return glauber();
  if (name == "sqrt-metropolis") return sqrt_metropolis();
  if (name == "sqrt-glauber") return sqrt_glauber();
  fail(ErrorCode::kInvalidProfile, "unknown profile '" + name + "'");
}

}  // namespace profiles

/** Rate form gamma of a profile: itself, or |f|^2 for an amplitude profile. */
inline WeightProfile as_rate(const WeightProfile& p) {
  if (p.cls == ProfileClass::kDavies) return p;
  return {p.name + "^2", ProfileClass::kDavies, [e = p.eval](double nu) { return cplx(std::norm(e(nu))); }};
}

/** Amplitude form f of a profile: itself, or sqrt(gamma) for a rate profile. */
inline WeightProfile as_amplitude(const WeightProfile& p) {
  if (p.cls == ProfileClass::kAmplitude) return p;
  return {"sqrt(" + p.name + ")", ProfileClass::kAmplitude, [e = p.eval](double nu) {
            const double g = e(nu).real();
            if (g < 0) {
              std::ostringstream os;
              os << "rate profile is negative at nu = " << nu;
              fail(ErrorCode::kInvalidProfile, os.str());
            }
            return cplx(std::sqrt(g));
          }};
}

/** Checks the class symmetry at every Bohr frequency of h, to rel_tol. */
inline void validate_profile(const WeightProfile& p, const HamiltonianModel& h, double rel_tol = 1e-12) {
  for (const auto& c : h.bohr()) {
    const double nu = c.nu;
    const cplx lhs = p(-nu);
    const cplx rhs = p.cls == ProfileClass::kDavies ? std::exp(nu) * p(nu) : std::exp(0.5 * nu) * std::conj(p(nu));
    if (!std::isfinite(std::abs(lhs)) || !std::isfinite(std::abs(rhs)))
      fail(ErrorCode::kNonFinite, "profile value is not finite at nu = " + std::to_string(nu));
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    if (std::abs(lhs - rhs) > rel_tol * scale) {
      std::ostringstream os;
      os << "profile '" << p.name << "' violates the " << to_string(p.cls) << " symmetry at nu = " << nu << " ("
         << lhs.real() << " vs " << rhs.real() << ")";
      fail(ErrorCode::kSymmetryViolation, os.str());
    }
  }
}

/** S^[f][M] = sum_nu f(nu) M_nu. */
template <class F>
CMatrix schur_weight(const CMatrix& m, const HamiltonianModel& h, F&& f) {
  if (m.rows() != h.dim() || m.cols() != h.dim()) fail(ErrorCode::kShape, "operator dimension does not match H");
  const CMatrix w = h.weight_matrix(std::forward<F>(f));
  return h.from_eigenbasis(h.to_eigenbasis(m).cwiseProduct(w));
}

inline CMatrix schur_weight(const CMatrix& m, const HamiltonianModel& h, const WeightProfile& f) {
  return schur_weight(m, h, [&](double nu) { return f(nu); });
}

/** S[M] = sum_nu 1/2 tanh(nu/4) M_nu. */
inline CMatrix s_map(const CMatrix& m, const HamiltonianModel& h) {
  return schur_weight(m, h, [](double nu) { return 0.5 * std::tanh(0.25 * nu); });
}

/** S^{+/-}[M] = M/2 +/- S[M]; sign must be +1 or -1. */
inline CMatrix s_pm(const CMatrix& m, const HamiltonianModel& h, int sign) {
  if (sign != 1 && sign != -1) fail(ErrorCode::kDomain, "s_pm sign must be +1 or -1");
  const double sg = sign;
  return schur_weight(m, h, [sg](double nu) { return 0.5 + sg * 0.5 * std::tanh(0.25 * nu); });
}

/** S_c[M] = sum_nu M_nu / (2 cosh(nu/4)). */
inline CMatrix s_c(const CMatrix& m, const HamiltonianModel& h) {
  return schur_weight(m, h, [](double nu) { return 0.5 / std::cosh(0.25 * nu); });
}

namespace detail {

inline void require_self_adjoint(const CPMap& t, const char* who) {
  if (!is_self_adjoint_superop(t.superop())) {
    std::ostringstream os;
    os << who << " needs a self-adjoint input map (||T - T^dagger|| = " << op_norm(t.superop() - t.superop().adjoint())
       << ")";
    fail(ErrorCode::kPrecondition, os.str());
  }
}

inline void require_dim(const CPMap& t, const HamiltonianModel& h) {
  if (t.dim() != h.dim()) fail(ErrorCode::kShape, "map dimension does not match H");
}

/** Kraus operators from an eigenbasis Choi matrix. */
inline CPMap cpmap_from_eigen_choi(const CMatrix& jt, const HamiltonianModel& h) {
  const int d = h.dim();
  std::vector<CMatrix> ks = kraus_from_choi(jt, d, 1e-14);
  for (auto& k : ks) k = h.from_eigenbasis(k);
  return CPMap(std::move(ks), d);
}

}  // namespace detail

/** Davies reweighting: Kraus {sqrt(gamma(nu)) A_nu} over all clusters. */
inline CPMap davies(const CPMap& t, const HamiltonianModel& h, const WeightProfile& profile) {
  detail::require_dim(t, h);
  detail::require_self_adjoint(t, "davies");
  const WeightProfile g = as_rate(profile);
  validate_profile(g, h);
  std::vector<double> rates;
  for (const auto& c : h.bohr()) {
    const double r = g(c.nu).real();
    if (r < 0) {
      std::ostringstream os;
      os << "rate profile '" << profile.name << "' is negative at nu = " << c.nu;
      fail(ErrorCode::kInvalidProfile, os.str());
    }
    rates.push_back(r);
  }
  std::vector<CMatrix> ks;
  for (const auto& a : t.kraus()) {
    const CMatrix at = h.to_eigenbasis(a);
    const double scale = at.cwiseAbs().maxCoeff();
    for (int k = 0; k < h.num_clusters(); ++k) {
      if (rates[static_cast<std::size_t>(k)] == 0.0) continue;
      CMatrix comp = CMatrix::Zero(h.dim(), h.dim());
      double mx = 0.0;
      for (const auto& [i, j] : h.bohr()[static_cast<std::size_t>(k)].pairs) {
        comp(i, j) = at(i, j);
        mx = std::max(mx, std::abs(at(i, j)));
      }
      if (mx <= 1e-15 * scale) continue;
      ks.push_back(std::sqrt(rates[static_cast<std::size_t>(k)]) * h.from_eigenbasis(comp));
    }
  }
  return CPMap(std::move(ks), h.dim());
}

/** Coherent reweighting: Kraus {S^[f][A]}; a rate profile is used through sqrt(gamma). */
inline CPMap coherent(const CPMap& t, const HamiltonianModel& h, const WeightProfile& profile) {
  detail::require_dim(t, h);
  detail::require_self_adjoint(t, "coherent");
  const WeightProfile f = as_amplitude(profile);
  validate_profile(f, h);
  const CMatrix w = h.weight_matrix([&](double nu) { return f(nu); });
  std::vector<CMatrix> ks;
  for (const auto& a : t.kraus()) ks.push_back(h.from_eigenbasis(h.to_eigenbasis(a).cwiseProduct(w)));
  return CPMap(std::move(ks), h.dim());
}

/** Gamma_fn for the operator Fourier transform, with optional kink locations. */
struct FrequencyRate {
  std::string name;
  std::function<double(double)> eval;
  std::vector<double> breakpoints;
};

/** Shifted Metropolis rate e^{-max(w + sigma^2/2, 0)}. */
inline FrequencyRate shifted_metropolis(double sigma) {
  const double shift = 0.5 * sigma * sigma;
  return {"shifted-metropolis", [shift](double w) { return w + shift <= 0 ? 1.0 : std::exp(-(w + shift)); }, {-shift}};
}

/**
 * Gaussian overlap integral
 *   c(nu1, nu2) = int gamma(w) f_s(w - nu1) f_s(w - nu2) dw
 *               = exp(-(nu1 - nu2)^2 / (8 s^2)) E[gamma(m + s Z)],  m = (nu1 + nu2)/2,
 * the expectation evaluated by quadrature on [m - 8s, m + 8s].
 */
inline double oft_coefficient(double nu1, double nu2, double sigma, const FrequencyRate& rate) {
  const double m = 0.5 * (nu1 + nu2);
  const double dn = nu1 - nu2;
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  auto integrand = [&](double w) {
    const double z = (w - m) / sigma;
    return rate.eval(w) * norm * std::exp(-0.5 * z * z);
  };
  const double avg = integrate_or_throw(integrand, m - 8 * sigma, m + 8 * sigma, rate.breakpoints, 1e-11, 1e-11).value;
  return std::exp(-dn * dn / (8 * sigma * sigma)) * avg;
}

namespace detail {

/**
 * Eigenbasis Choi matrix sum_a (v_a v_a^dagger) o C, with v_a = vec(A_a in the
 * eigenbasis) and C[(i,j),(k,l)] = coef(cluster(i,j), cluster(k,l)).
 */
inline CMatrix weighted_choi(const CPMap& t, const HamiltonianModel& h, const RMatrix& coef) {
  const int d = h.dim();
  const int n = d * d;
  CMatrix jt = CMatrix::Zero(n, n);
  for (const auto& a : t.kraus()) {
    const CVector v = vec(h.to_eigenbasis(a));
    jt.noalias() += v * v.adjoint();
  }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) jt(p, q) *= coef(h.cluster_of(p / d, p % d), h.cluster_of(q / d, q % d));
  return jt;
}

}  // namespace detail

/** Operator-Fourier-transform construction with frequency rate gamma_fn and energy resolution sigma. */
inline CPMap oft(const CPMap& t, const HamiltonianModel& h, double sigma, const FrequencyRate& rate) {
  detail::require_dim(t, h);
  if (!(sigma > 0)) fail(ErrorCode::kDomain, "sigma must be positive");
  const int nc = h.num_clusters();
  RMatrix coef(nc, nc);
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b <= a; ++b) {
      coef(a, b) = oft_coefficient(h.bohr()[a].nu, h.bohr()[b].nu, sigma, rate);
      coef(b, a) = coef(a, b);
    }
  if ((coef.array() < 0).any()) fail(ErrorCode::kInvalidProfile, "frequency rate must be non-negative");
  return detail::cpmap_from_eigen_choi(detail::weighted_choi(t, h, coef), h);
}

inline CPMap oft(const CPMap& t, const HamiltonianModel& h, double sigma) {
  return oft(t, h, sigma, shifted_metropolis(sigma));
}

/** OFT with gamma = 1: coefficients exp(-(nu1 - nu2)^2 / (8 sigma^2)) in closed form. */
inline CPMap oft_unweighted(const CPMap& t, const HamiltonianModel& h, double sigma) {
  detail::require_dim(t, h);
  if (!(sigma > 0)) fail(ErrorCode::kDomain, "sigma must be positive");
  const int nc = h.num_clusters();
  RMatrix coef(nc, nc);
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) {
      const double dn = h.bohr()[a].nu - h.bohr()[b].nu;
      coef(a, b) = std::exp(-dn * dn / (8 * sigma * sigma));
    }
  return detail::cpmap_from_eigen_choi(detail::weighted_choi(t, h, coef), h);
}

/** Weight g(x) on [sigma^2, inf) for the two-sided construction. */
using XWeight = std::function<double(double)>;

/** Default g(x) = exp(-(x - sigma^2)). */
inline XWeight default_x_weight(double sigma) {
  const double s2 = sigma * sigma;
  return [s2](double x) { return std::exp(-(x - s2)); };
}

/**
 * Coefficient tensor of the two-sided construction,
 *   alpha(E1,E2,E3,E4) = 1/2 exp(-(E1-E3)^2/(8 s^2) - (E2-E4)^2/(8 s^2)) I(E1 + E3 - E2 - E4),
 *   I(u) = int_{s^2}^{s^2 + x_span} g(x) sqrt(1 - s^2/x) exp(-(u - 2x)^2/(16 x)) dx,
 * with I cached by its argument.
 */
class TwoSidedAlpha {
 public:
  TwoSidedAlpha(double sigma, XWeight g, double x_span = 40.0)
      : sigma_(sigma), g_(std::move(g)), span_(x_span) {
    if (!(sigma > 0)) fail(ErrorCode::kDomain, "sigma must be positive");
  }

  double x_integral(double u) const {
    const long key = std::llround(u * 1e9);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double s2 = sigma_ * sigma_;
    // x = s^2 + v^2 removes the square-root endpoint.
    auto f = [&](double v) {
      const double x = s2 + v * v;
      const double gx = g_(x);
      if (gx < 0) fail(ErrorCode::kInvalidProfile, "two-sided weight g must be non-negative");
      const double r = u - 2 * x;
      return gx * (v / std::sqrt(x)) * std::exp(-r * r / (16 * x)) * 2 * v;
    };
    const double val = integrate_or_throw(f, 0.0, std::sqrt(span_), {}, 1e-13, 1e-11).value;
    cache_.emplace(key, val);
    return val;
  }

  double operator()(double e1, double e2, double e3, double e4) const {
    const double s2 = sigma_ * sigma_;
    const double a = e1 - e3;
    const double b = e2 - e4;
    return 0.5 * std::exp(-a * a / (8 * s2) - b * b / (8 * s2)) * x_integral(e1 + e3 - e2 - e4);
  }

  double sigma() const { return sigma_; }

 private:
  double sigma_;
  XWeight g_;
  double span_;
  mutable std::map<long, double> cache_;
};

/** max relative defect of alpha_1234 = alpha_2143 e^{(E1-E2+E3-E4)/2} over all level quadruples. */
inline double two_sided_skew_defect(const TwoSidedAlpha& alpha, const std::vector<double>& levels) {
  double worst = 0.0;
  for (double e1 : levels)
    for (double e2 : levels)
      for (double e3 : levels)
        for (double e4 : levels) {
          const double lhs = alpha(e1, e2, e3, e4);
          const double rhs = alpha(e2, e1, e4, e3) * std::exp(0.5 * (e1 - e2 + e3 - e4));
          const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
          worst = std::max(worst, std::abs(lhs - rhs) / scale);
        }
  return worst;
}

/**
 * Two-sided construction sum_a sum alpha(E1..E4) P_{E2} A P_{E1} [.] P_{E3} A^dagger P_{E4}.
 * The skew symmetry of alpha is checked to 1e-10 before assembly.
 */
inline CPMap two_sided(const CPMap& t, const HamiltonianModel& h, double sigma, const XWeight& g) {
  detail::require_dim(t, h);
  const TwoSidedAlpha alpha(sigma, g);
  const auto& lv = h.levels();
  const double skew = two_sided_skew_defect(alpha, lv);
  if (skew > 1e-10) {
    std::ostringstream os;
    os << "two-sided coefficients violate skew symmetry (relative defect " << skew << ")";
    fail(ErrorCode::kSymmetryViolation, os.str());
  }
  const int d = h.dim();
  const int n = d * d;
  const int nl = static_cast<int>(lv.size());
  // alpha indexed by level numbers.
  std::vector<double> tab(static_cast<std::size_t>(nl) * nl * nl * nl);
  auto at = [&](int l1, int l2, int l3, int l4) -> double& {
    return tab[((static_cast<std::size_t>(l1) * nl + l2) * nl + l3) * nl + l4];
  };
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b)
      for (int c = 0; c < nl; ++c)
        for (int e = 0; e < nl; ++e) at(a, b, c, e) = alpha(lv[a], lv[b], lv[c], lv[e]);
  CMatrix jt = CMatrix::Zero(n, n);
  for (const auto& a : t.kraus()) {
    const CVector v = vec(h.to_eigenbasis(a));
    jt.noalias() += v * v.adjoint();
  }
  // Row (i,j): left factor entry A_ij, E2 = E_i, E1 = E_j. Column (l,k): E4 = E_l, E3 = E_k.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l)
        for (int k = 0; k < d; ++k)
          jt(i * d + j, l * d + k) *= at(h.level_of(j), h.level_of(i), h.level_of(k), h.level_of(l));
  return detail::cpmap_from_eigen_choi(jt, h);
}

inline CPMap two_sided(const CPMap& t, const HamiltonianModel& h, double sigma) {
  return two_sided(t, h, sigma, default_x_weight(sigma));
}

/** coherent(oft_unweighted(T, sigma), sqrt(gamma)). */
inline CPMap interpolated(const CPMap& t, const HamiltonianModel& h, double sigma, const WeightProfile& profile) {
  detail::require_self_adjoint(t, "interpolated");
  return coherent(oft_unweighted(t, h, sigma), h, as_amplitude(profile));
}

/** Named construction with its parameters. */
struct ConstructionOptions {
  std::string name = "coherent";  // davies | coherent | oft | two-sided | interpolated
  std::optional<WeightProfile> profile;
  double sigma = 1.0;
};

inline const std::vector<std::string>& construction_names() {
  static const std::vector<std::string> names{"davies", "coherent", "oft", "two-sided", "interpolated"};
  return names;
}

/** Profile used when none is given: f_G for coherent, Metropolis otherwise. */
inline WeightProfile default_profile(const std::string& construction) {
  return construction == "coherent" ? profiles::sqrt_glauber() : profiles::metropolis();
}

/** Applies the named balancing construction to a self-adjoint map. */
inline CPMap construct_balanced(const CPMap& t, const HamiltonianModel& h, const ConstructionOptions& opt) {
  const WeightProfile prof = opt.profile ? *opt.profile : default_profile(opt.name);
  if (opt.name == "davies") return davies(t, h, prof);
  if (opt.name == "coherent") return coherent(t, h, prof);
  if (opt.name == "interpolated") return interpolated(t, h, opt.sigma, prof);
  if (opt.name == "oft" || opt.name == "two-sided") {
    if (opt.profile && opt.profile->name != "metropolis")
      fail(ErrorCode::kUsage, opt.name + " uses its own frequency weight; only the metropolis profile is accepted");
    detail::require_self_adjoint(t, opt.name.c_str());
    return opt.name == "oft" ? oft(t, h, opt.sigma) : two_sided(t, h, opt.sigma);
  }
  fail(ErrorCode::kUsage, "unknown construction '" + opt.name + "'");
}

}  // namespace kmsgibbs
