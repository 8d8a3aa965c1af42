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
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kmsgibbs/balance.hpp"
#include "kmsgibbs/cpmap.hpp"
#include "kmsgibbs/hamiltonian.hpp"
#include "kmsgibbs/linalg.hpp"

namespace kmsgibbs {

/** L[X] = T'[X] - 1/2 {D, X} - i [C, X]. */
struct Lindbladian {
  CPMap transition;
  CMatrix decay;     // D = T'^dagger[I]
  CMatrix coherent;  // C, Hermitian and traceless
  CMatrix superop;
  std::vector<std::string> notes;

  int dim() const { return transition.dim(); }
};

/** Discrete-time channel: transition Kraus operators plus rejection Kraus operators. */
struct Channel {
  CPMap map;
  std::string provenance;  // exact-K | taylor-K(N) | recursive(L)
  std::vector<CMatrix> transition;
  std::vector<CMatrix> reject;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<std::string> notes;

  int dim() const { return map.dim(); }
  const CMatrix& superop() const { return map.superop(); }
};

using QuantumDynamics = std::variant<Lindbladian, Channel>;

inline const CMatrix& superop_of(const QuantumDynamics& q) {
  if (const auto* l = std::get_if<Lindbladian>(&q)) return l->superop;
  return std::get<Channel>(q).superop();
}

namespace detail {

inline void require_balanced(const CPMap& t, const GibbsState& rho, const char* who) {
  const double r = db_residual(t, rho);
  const double thr = db_threshold(t.superop());
  if (r > thr) {
    std::ostringstream os;
    os << who << ": transition map is not detailed balanced (db_residual " << r << " > " << thr << ")";
    fail(ErrorCode::kPrecondition, os.str());
  }
}

}  // namespace detail

/** Superoperator of -1/2 {D, .} - i [C, .]. */
inline CMatrix decay_coherent_superop(const CMatrix& d_op, const CMatrix& c_op) {
  return -0.5 * (left_superop(d_op) + right_superop(d_op)) - kI * (left_superop(c_op) - right_superop(c_op));
}

/** Completes a balanced CP map into a balanced Lindbladian with C = i S[D], made traceless. */
inline Lindbladian lindblad_from_cp(const CPMap& tp, const HamiltonianModel& h, const GibbsState& rho) {
  detail::require_dim(tp, h);
  detail::require_balanced(tp, rho, "lindblad_from_cp");
  Lindbladian l;
  l.transition = tp;
  l.decay = hermitian_part(trace_operator(tp));
  CMatrix c = kI * s_map(l.decay, h);
  c = hermitian_part(c);
  c -= (c.trace() / static_cast<double>(h.dim())) * CMatrix::Identity(h.dim(), h.dim());
  l.coherent = c;
  l.superop = tp.superop() + decay_coherent_superop(l.decay, l.coherent);
  return l;
}

/** ||Q[rho] - rho|| for channels, ||L[rho]|| for generators (spectral norm). */
inline double fixed_point_residual(const CMatrix& superop, const GibbsState& rho, bool generator) {
  CMatrix r = apply_superop(superop, rho.rho);
  if (!generator) r -= rho.rho;
  return op_norm(r);
}

inline double fixed_point_residual(const Channel& q, const GibbsState& rho) {
  return fixed_point_residual(q.superop(), rho, false);
}

inline double fixed_point_residual(const Lindbladian& l, const GibbsState& rho) {
  return fixed_point_residual(l.superop, rho, true);
}

/** Norm surrogate s = 1 + (1/pi) ln(1 + ||H||/2) for ||S^+-||_{inf->inf}. */
inline double s_surrogate(const HamiltonianModel& h) {
  return 1.0 + std::log(1.0 + 0.5 * h.norm()) / std::numbers::pi;
}

namespace detail {

/** sqrt(sqrt(rho) P sqrt(rho)) rho^{-1/2}; negative eigenvalues beyond the clamp raise `code`. */
inline CMatrix balanced_root(const CMatrix& p, const GibbsState& rho, ErrorCode code, const char* what) {
  const EigenSystem es = herm_eig(p);
  const double clamp = 1e-10 * std::max(1.0, es.values.cwiseAbs().maxCoeff());
  if (es.values.minCoeff() < -clamp) {
    std::ostringstream os;
    os << what << " has a negative eigenvalue " << es.values.minCoeff();
    fail(code, os.str());
  }
  const CMatrix inner = hermitian_part(rho.rho_half * p * rho.rho_half);
  return psd_sqrt(inner, std::max(clamp, 1e-10 * op_norm(inner))) * rho.rho_mhalf;
}

}  // namespace detail

/** Channel with the exact rejection operator K = sqrt(sqrt(rho)(I - D)sqrt(rho)) rho^{-1/2}. */
inline Channel channel_exact(const CPMap& tp, const HamiltonianModel& h, const GibbsState& rho) {
  detail::require_dim(tp, h);
  detail::require_balanced(tp, rho, "channel_exact");
  const int d = h.dim();
  const CMatrix dop = hermitian_part(trace_operator(tp));
  const double lmax = herm_eig(dop).values.maxCoeff();
  if (lmax > 1.0 + 1e-10) {
    std::ostringstream os;
    os << "T'^dagger[I] has norm " << lmax << " > 1; rescale the transition part by at most " << 1.0 / lmax;
    fail(ErrorCode::kNormalization, os.str());
  }
  const CMatrix k = detail::balanced_root(CMatrix::Identity(d, d) - dop, rho, ErrorCode::kNormalization, "I - T'^dagger[I]");
  Channel c;
  c.provenance = "exact-K";
  c.transition = tp.kraus();
  c.reject = {k};
  std::vector<CMatrix> all = tp.kraus();
  all.push_back(k);
  c.map = CPMap(std::move(all), d);
  return c;
}

/** Taylor coefficients a_k = (-1)^{k+1} binom(1/2, k) of 1 - sqrt(1 - x). */
inline double sqrt_taylor_coefficient(int k) {
  double a = 0.5;
  for (int j = 2; j <= k; ++j) a *= (j - 1.5) / j;
  return a;
}

/** nabla^(1..order)[O] by the product recursion. */
inline std::vector<CMatrix> nabla_terms(const CMatrix& o, const HamiltonianModel& h, int order) {
  std::vector<CMatrix> nab{o};
  std::vector<CMatrix> plus{s_pm(o, h, +1)};
  std::vector<CMatrix> minus{s_pm(o, h, -1)};
  for (int k = 2; k <= order; ++k) {
    CMatrix n = CMatrix::Zero(o.rows(), o.cols());
    for (int p = 1; p <= k - 1; ++p) n += plus[p - 1] * minus[k - p - 1];
    nab.push_back(n);
    plus.push_back(s_pm(n, h, +1));
    minus.push_back(s_pm(n, h, -1));
  }
  return nab;
}

/** Sum over k > order of a_k x^k / (2 s) with x = 4 s^2 ||O||. */
inline double taylor_tail_bound(double onorm, double s, int order) {
  const double x = 4 * s * s * onorm;
  double sum = 0.0;
  double a = sqrt_taylor_coefficient(order + 1);
  double xp = std::pow(x, order + 1);
  for (int k = order + 1; k < order + 200000; ++k) {
    const double term = a * xp / (2 * s);
    sum += term;
    if (term < 1e-18 * std::max(sum, 1e-300)) break;
    a *= (k + 1 - 1.5) / (k + 1);
    xp *= x;
  }
  return sum;
}

/** Channel with K = I - sum_{k <= order} S^-[nabla^(k)[O]], O = T'^dagger[I]. */
inline Channel channel_taylor(const CPMap& tp, const HamiltonianModel& h, const GibbsState& rho, int order) {
  detail::require_dim(tp, h);
  detail::require_balanced(tp, rho, "channel_taylor");
  if (order < 1) fail(ErrorCode::kDomain, "Taylor order must be at least 1");
  const int d = h.dim();
  const CMatrix o = hermitian_part(trace_operator(tp));
  const double onorm = op_norm(o);
  const double s = s_surrogate(h);
  if (onorm > 1.0 / (4 * s * s)) {
    std::ostringstream os;
    os << "||T'^dagger[I]|| = " << onorm << " exceeds 1/(4 s^2) = " << 1.0 / (4 * s * s) << " (s = " << s << ")";
    fail(ErrorCode::kPrecondition, os.str());
  }
  CMatrix k = CMatrix::Identity(d, d);
  for (const auto& n : nabla_terms(o, h, order)) k -= s_pm(n, h, -1);
  Channel c;
  c.provenance = "taylor-K(" + std::to_string(order) + ")";
  c.transition = tp.kraus();
  c.reject = {k};
  std::vector<CMatrix> all = tp.kraus();
  all.push_back(k);
  c.map = CPMap(std::move(all), d);
  c.diagnostics.emplace_back("s", s);
  c.diagnostics.emplace_back("truncation_bound", taylor_tail_bound(onorm, s, order));
  return c;
}

enum class TraceFix { kNone, kSqrt, kDb };

inline std::string to_string(TraceFix f) {
  switch (f) {
    case TraceFix::kNone: return "none";
    case TraceFix::kSqrt: return "sqrt-fix";
    case TraceFix::kDb: return "db-fix";
  }
  return "unknown";
}

/** B_1 = T'^dagger[I], B_{k+1} = S^+[B_k] S^-[B_k]; returns B_1 .. B_{count}. */
inline std::vector<CMatrix> recursive_b_sequence(const CMatrix& b1, const HamiltonianModel& h, int count) {
  std::vector<CMatrix> b{hermitian_part(b1)};
  while (static_cast<int>(b.size()) < count) {
    const CMatrix& last = b.back();
    b.push_back(hermitian_part(s_pm(last, h, +1) * s_pm(last, h, -1)));
  }
  return b;
}

/** c_k = 2^{-k/2}. */
inline double recursive_c(int k) { return std::pow(2.0, -0.5 * k); }
/** b_k = 2^{2^k - 1}. */
inline double recursive_b(int k) { return std::pow(2.0, std::pow(2.0, k) - 1.0); }

/**
 * Recursive rejection family K_k = c_k (I - b_k S^-[B_k]), k = 1..levels, with
 * an optional trace-restoring operator built from B_{levels+1}.
 */
inline Channel channel_recursive(const CPMap& tp, const HamiltonianModel& h, const GibbsState& rho, int levels,
                                 TraceFix fix = TraceFix::kDb) {
  detail::require_dim(tp, h);
  detail::require_balanced(tp, rho, "channel_recursive");
  if (levels < 0) fail(ErrorCode::kDomain, "levels must be non-negative");
  const int d = h.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix b1 = hermitian_part(trace_operator(tp));
  const double s = s_surrogate(h);
  const double lambda = op_norm(b1) * s * s;
  if (!(lambda < 0.25)) {
    std::ostringstream os;
    os << "recursive construction needs ||T'^dagger[I]|| s^2 < 1/4, got " << lambda;
    fail(ErrorCode::kPrecondition, os.str());
  }
  const auto b = recursive_b_sequence(b1, h, levels + 1);
  Channel c;
  c.provenance = "recursive(" + std::to_string(levels) + ")";
  c.transition = tp.kraus();
  for (int k = 1; k <= levels; ++k)
    c.reject.push_back(recursive_c(k) * (id - recursive_b(k) * s_pm(b[static_cast<std::size_t>(k - 1)], h, -1)));
  const double bl = recursive_b(levels);
  const double scale = std::pow(2.0, -0.5 * levels);
  const CMatrix rest = id - bl * bl * b[static_cast<std::size_t>(levels)];
  if (fix == TraceFix::kSqrt) {
    const EigenSystem es = herm_eig(rest);
    if (es.values.minCoeff() < -1e-10)
      fail(ErrorCode::kLevelTooShallow, "I - b_l^2 B_{l+1} is not PSD; increase the number of levels");
    c.reject.push_back(scale * psd_sqrt(hermitian_part(rest), 1e-10));
  } else if (fix == TraceFix::kDb) {
    c.reject.push_back(scale * detail::balanced_root(hermitian_part(rest), rho, ErrorCode::kLevelTooShallow,
                                                     "I - b_l^2 B_{l+1}"));
  }
  std::vector<CMatrix> all = tp.kraus();
  all.insert(all.end(), c.reject.begin(), c.reject.end());
  c.map = CPMap(std::move(all), d);
  c.diagnostics.emplace_back("s", s);
  c.diagnostics.emplace_back("lambda", lambda);
  c.diagnostics.emplace_back("trace_defect", std::pow(2.0, -levels) * bl * bl * op_norm(b[static_cast<std::size_t>(levels)]));
  c.notes.push_back("trace_fix=" + to_string(fix));
  return c;
}

/** Spectrum summary of the Hermitian part of a discriminant. */
struct GapResult {
  double gap = 0.0;
  double top = 0.0;
  double second = 0.0;
  double max_imag = 0.0;  // largest |imag| of the non-Hermitian discriminant spectrum
  std::vector<std::string> notes;
};

/**
 * gap = lambda_1 - lambda_2 of the Hermitian part of the discriminant. The
 * expected top eigenvalue is 1 for channels and 0 for generators.
 */
inline GapResult discriminant_gap(const CMatrix& superop, const GibbsState& rho, bool generator) {
  const CMatrix dsc = discriminant(superop, rho);
  const EigenSystem es = herm_eig_unchecked(dsc);
  GapResult g;
  const Eigen::Index n = es.values.size();
  g.top = es.values(n - 1);
  g.second = n > 1 ? es.values(n - 2) : g.top;
  const double expected = generator ? 0.0 : 1.0;
  const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
  if (std::abs(g.top - expected) > 1e-8 * scale) {
    std::ostringstream os;
    os << "top discriminant eigenvalue " << g.top << " differs from " << expected;
    g.notes.push_back(os.str());
  }
  g.gap = g.top - g.second;
  if (g.gap <= 1e-10 * scale) {
    g.gap = 0.0;
    g.notes.emplace_back("degenerate top eigenvalue: map is not ergodic");
  }
  const double asym = op_norm(dsc - dsc.adjoint());
  g.max_imag = 0.5 * asym;  // bound on |imag| of eigenvalues of a near-Hermitian matrix
  return g;
}

/** Spectral gap of balanced dynamics; unbalanced input raises an error. */
inline GapResult spectral_gap(const QuantumDynamics& q, const GibbsState& rho) {
  const CMatrix& s = superop_of(q);
  const double r = db_residual(s, rho);
  const double thr = db_threshold(s);
  if (r > thr) {
    std::ostringstream os;
    os << "spectral_gap needs detailed-balanced dynamics (db_residual " << r << " > " << thr << ")";
    fail(ErrorCode::kUnbalanced, os.str());
  }
  return discriminant_gap(s, rho, std::holds_alternative<Lindbladian>(q));
}

struct GapComparison {
  double gap_discrete = 0.0;
  double gap_continuous = 0.0;
  bool holds = false;
  std::vector<std::string> notes;
};

/** gap(Q) >= gap(L) - 1e-9 for a channel and a generator built from the same parts. */
inline GapComparison gap_compare(const Channel& q, const Lindbladian& l, const GibbsState& rho) {
  const GapResult gq = spectral_gap(QuantumDynamics{q}, rho);
  const GapResult gl = spectral_gap(QuantumDynamics{l}, rho);
  GapComparison r;
  r.gap_discrete = gq.gap;
  r.gap_continuous = gl.gap;
  r.holds = gq.gap >= gl.gap - 1e-9;
  r.notes = gq.notes;
  r.notes.insert(r.notes.end(), gl.notes.begin(), gl.notes.end());
  return r;
}

/** Full verification report of a channel or generator. */
inline VerificationReport verify_dynamics(const QuantumDynamics& q, const GibbsState& rho) {
  VerificationReport r;
  const CMatrix& s = superop_of(q);
  r.db_residual = db_residual(s, rho);
  if (const auto* c = std::get_if<Channel>(&q)) {
    r = cptp_check(c->map);
    r.db_residual = db_residual(s, rho);
    r.fixed_point_residual = fixed_point_residual(*c, rho);
    r.notes = c->notes;
  } else {
    const auto& l = std::get<Lindbladian>(q);
    const int d = l.dim();
    // Trace annihilation: L^dagger[I] = 0.
    r.trace_residual = op_norm(apply_superop(s.adjoint(), CMatrix::Identity(d, d)));
    r.cp_min_eig = herm_eig_unchecked(choi(l.transition)).values.minCoeff();
    r.fixed_point_residual = fixed_point_residual(l, rho);
    r.notes = l.notes;
  }
  if (r.db_residual <= db_threshold(s)) {
    const GapResult g = discriminant_gap(s, rho, std::holds_alternative<Lindbladian>(q));
    r.gap = g.gap;
    r.notes.insert(r.notes.end(), g.notes.begin(), g.notes.end());
  }
  return r;
}

}  // namespace kmsgibbs
