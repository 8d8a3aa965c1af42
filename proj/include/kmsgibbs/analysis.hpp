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
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kmsgibbs/balance.hpp"
#include "kmsgibbs/dynamics.hpp"
#include "kmsgibbs/hamiltonian.hpp"
#include "kmsgibbs/linalg.hpp"

namespace kmsgibbs {

/**
 * Spectral form of balanced dynamics. With G = rho^{1/4} kron conj(rho^{1/4}),
 * the superoperator is G D G^{-1} for the (Hermitian) discriminant D = U diag(lambda) U^dagger.
 */
class SpectralPropagator {
 public:
  SpectralPropagator(const CMatrix& superop, const GibbsState& rho, bool generator)
      : generator_(generator), d_(rho.dim()) {
    const CMatrix dsc = hermitian_part(discriminant(superop, rho));
    es_ = herm_eig_unchecked(dsc);
    g_ = kron(rho.rho_quarter, rho.rho_quarter.conjugate());
    ginv_ = kron(rho.rho_mquarter, rho.rho_mquarter.conjugate());
  }

  /** e^{tL}[x] for generators, Q^t[x] (t rounded to an integer) for channels. */
  CMatrix apply(const CMatrix& x, double t) const {
    const CVector y = es_.vectors.adjoint() * (ginv_ * vec(x));
    CVector z(y.size());
    for (Eigen::Index k = 0; k < y.size(); ++k) z(k) = y(k) * factor(es_.values(k), t);
    return unvec(g_ * (es_.vectors * z), d_, d_);
  }

  const RVector& eigenvalues() const { return es_.values; }
  bool generator() const { return generator_; }

 private:
  double factor(double lam, double t) const {
    if (generator_) return std::exp(t * lam);
    const double n = std::round(t);
    return std::pow(lam, n);
  }

  bool generator_;
  int d_;
  EigenSystem es_;
  CMatrix g_;
  CMatrix ginv_;
};

/** e^{tL}[x] by the Pade exponential of the superoperator. */
inline CMatrix evolve_expm(const CMatrix& superop, const CMatrix& x, double t) {
  return apply_superop(expm(t * superop), x);
}

/** ||sigma - rho||_1 for Hermitian arguments. */
inline double trace_distance(const CMatrix& a, const CMatrix& b) { return trace_norm_hermitian(hermitian_part(a - b)); }

/** Computational basis states |i><i|. */
inline std::vector<CMatrix> basis_states(int d) {
  std::vector<CMatrix> s;
  for (int i = 0; i < d; ++i) {
    CMatrix m = CMatrix::Zero(d, d);
    m(i, i) = 1.0;
    s.push_back(m);
  }
  return s;
}

/**
 * Smallest t with ||e^{tL}[sigma] - rho||_1 <= threshold, located by doubling
 * then bisection to relative precision 1e-6. Returns nullopt if the distance
 * is still above threshold at t = t_cap.
 */
inline std::optional<double> mixing_time(const SpectralPropagator& p, const CMatrix& sigma, const GibbsState& rho,
                                         double threshold = 1.0 / 3.0, double t_cap = 1e6) {
  auto dist = [&](double t) { return trace_distance(p.apply(sigma, t), rho.rho); };
  if (dist(0.0) <= threshold) return 0.0;
  double lo = 0.0;
  double hi = p.generator() ? 0.125 : 1.0;
  while (dist(hi) > threshold) {
    lo = hi;
    hi *= 2;
    if (hi > t_cap) return std::nullopt;
  }
  if (!p.generator()) {
    while (hi - lo > 1) {
      const double mid = std::floor(0.5 * (lo + hi));
      (dist(mid) > threshold ? lo : hi) = mid;
    }
    return hi;
  }
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (dist(mid) > threshold ? lo : hi) = mid;
  }
  return hi;
}

/** Worst case over computational basis states. */
inline std::optional<double> mixing_time_worst(const SpectralPropagator& p, const GibbsState& rho,
                                               double threshold = 1.0 / 3.0) {
  double worst = 0.0;
  for (const auto& s : basis_states(rho.dim())) {
    const auto t = mixing_time(p, s, rho, threshold);
    if (!t) return std::nullopt;
    worst = std::max(worst, *t);
  }
  return worst;
}

struct DistanceCurve {
  std::vector<double> t;
  std::vector<double> distance;
  std::vector<double> lazy_distance;  // channels only: (Q^t + Q^{t+1})/2
  std::optional<double> mixing_time;  // first grid t with distance <= 1/3
  std::optional<double> fitted_rate;  // slope of -log(distance) on the tail
};

/** Least-squares decay rate of the tail of a curve (points with 1e-12 < distance < 0.5). */
inline std::optional<double> fit_decay_rate(const std::vector<double>& t, const std::vector<double>& dist) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (dist[k] > 1e-12 && dist[k] < 0.5) pts.emplace_back(t[k], std::log(dist[k]));
  if (pts.size() < 3) return std::nullopt;
  pts.erase(pts.begin(), pts.begin() + static_cast<long>(pts.size() / 2));
  if (pts.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double den = n * sxx - sx * sx;
  if (den <= 0) return std::nullopt;
  return -(n * sxy - sx * sy) / den;
}

/** Distance to rho along a time grid for generators or channels. */
inline DistanceCurve mixing_sim(const QuantumDynamics& q, const GibbsState& rho, const CMatrix& sigma0,
                                const std::vector<double>& grid) {
  const bool gen = std::holds_alternative<Lindbladian>(q);
  const SpectralPropagator p(superop_of(q), rho, gen);
  DistanceCurve c;
  for (double t : grid) {
    c.t.push_back(t);
    const CMatrix s = p.apply(sigma0, t);
    const double d = trace_distance(s, rho.rho);
    c.distance.push_back(d);
    if (!gen) {
      const CMatrix s1 = p.apply(sigma0, std::round(t) + 1);
      c.lazy_distance.push_back(trace_distance(0.5 * (s + s1), rho.rho));
    }
    if (!c.mixing_time && d <= 1.0 / 3.0) c.mixing_time = t;
  }
  c.fitted_rate = fit_decay_rate(c.t, c.distance);
  return c;
}

/** Self-adjoint single-jump maps A[.]A^dagger for each operator of a jump set. */
inline std::vector<CPMap> jump_maps(const JumpSet& js) {
  std::vector<CPMap> out;
  for (const auto& a : js.ops) out.emplace_back(std::vector<CMatrix>{a});
  return out;
}

struct LatticeDynamics {
  Lindbladian continuous;
  Channel discrete;
  double s = 1.0;
  double discrete_scale = 1.0;  // factor applied to each transition part before completion
  std::vector<std::string> notes;
};

/**
 * Continuous generator sum_a L(T'_a) with no prefactor, and the discrete
 * channel (1/(3L)) sum_a Q_a where Q_a completes T'_a / s^2 with the exact
 * rejection operator.
 */
inline LatticeDynamics lattice_dynamics(const HamiltonianModel& h, const GibbsState& rho, const JumpSet& js,
                                        const ConstructionOptions& opt) {
  LatticeDynamics out;
  std::vector<CPMap> parts;
  for (const auto& t : jump_maps(js)) parts.push_back(construct_balanced(t, h, opt));
  std::vector<CMatrix> all;
  for (const auto& p : parts) all.insert(all.end(), p.kraus().begin(), p.kraus().end());
  out.continuous = lindblad_from_cp(CPMap(all, h.dim()), h, rho);
  out.s = s_surrogate(h);
  double dmax = 0.0;
  for (const auto& p : parts) dmax = std::max(dmax, herm_eig(hermitian_part(trace_operator(p))).values.maxCoeff());
  out.discrete_scale = 1.0 / std::max(out.s * out.s, dmax);
  if (dmax > out.s * out.s) out.notes.emplace_back("transition parts rescaled below 1/s^2 to keep T'^dagger[I] <= I");
  const double w = 1.0 / static_cast<double>(parts.size());
  std::vector<CMatrix> qk;
  for (const auto& p : parts) {
    const Channel c = channel_exact(p.scaled(out.discrete_scale), h, rho);
    for (const auto& k : c.map.kraus()) qk.push_back(std::sqrt(w) * k);
  }
  out.discrete.map = CPMap(std::move(qk), h.dim());
  out.discrete.provenance = "exact-K mixture";
  return out;
}

struct SweepRow {
  std::string model;
  int L = 0;
  double beta = 0.0;
  std::string construction;
  double gap_continuous = 0.0;
  double gap_discrete = 0.0;
  std::optional<double> mixing_time_est;
  double db_residual = 0.0;
  double s = 1.0;
  bool discrete_bound_holds = false;  // gap_discrete >= gap_continuous / (3 L s^2 2)
  std::vector<std::string> notes;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double fitted_slope = 0.0;            // max |gap(b) - gap(0)| / b over the grid
  std::optional<double> beta_threshold;  // largest grid beta with gap >= 1/2
  double max_step_delta = 0.0;          // max |gap(b_{k+1}) - gap(b_k)|
};

inline SweepRow sweep_point(const ModelSpec& base, double beta, const ConstructionOptions& opt, bool with_mixing) {
  ModelSpec spec = base;
  spec.beta = beta;
  const HamiltonianModel h = lattice_hamiltonian(spec);
  const GibbsState rho = gibbs(h);
  const JumpSet js = pauli_jump_set(spec.L);
  const LatticeDynamics dyn = lattice_dynamics(h, rho, js, opt);
  SweepRow r;
  r.model = spec.model;
  r.L = spec.L;
  r.beta = beta;
  r.construction = opt.name;
  r.s = dyn.s;
  const GapResult gc = discriminant_gap(dyn.continuous.superop, rho, true);
  const GapResult gd = discriminant_gap(dyn.discrete.superop(), rho, false);
  r.gap_continuous = gc.gap;
  r.gap_discrete = gd.gap;
  r.db_residual = db_residual(dyn.continuous.superop, rho);
  r.discrete_bound_holds = gd.gap >= gc.gap / (3.0 * spec.L * dyn.s * dyn.s * 2.0) - 1e-12;
  if (with_mixing) r.mixing_time_est = mixing_time_worst(SpectralPropagator(dyn.continuous.superop, rho, true), rho);
  r.notes = dyn.notes;
  r.notes.insert(r.notes.end(), gc.notes.begin(), gc.notes.end());
  r.notes.insert(r.notes.end(), rho.notes.begin(), rho.notes.end());
  return r;
}

/** Gap per beta on a lattice model; points are computed on up to `jobs` threads, output order is the grid order. */
inline SweepResult gap_sweep(const ModelSpec& spec, const ConstructionOptions& opt, const std::vector<double>& betas,
                             int jobs = 1, bool with_mixing = true) {
  if (spec.model != "ising" && spec.model != "heisenberg") fail(ErrorCode::kUsage, "gap_sweep needs a lattice model");
  if (spec.L < 1 || spec.L > 5) fail(ErrorCode::kSize, "gap_sweep supports lattice sizes L <= 5");
  SweepResult res;
  res.rows.resize(betas.size());
  auto work = [&](std::size_t k) { res.rows[k] = sweep_point(spec, betas[k], opt, with_mixing); };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (std::size_t k = 0; k < betas.size(); ++k) work(k);
  } else {
    std::vector<std::exception_ptr> eps(betas.size());
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&, j] {
        for (std::size_t k = static_cast<std::size_t>(j); k < betas.size(); k += static_cast<std::size_t>(jobs)) {
          try {
            work(k);
          } catch (...) {
            eps[k] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    for (const auto& e : eps)
      if (e) std::rethrow_exception(e);
  }
  const auto zero = std::find_if(res.rows.begin(), res.rows.end(), [](const SweepRow& r) { return r.beta == 0.0; });
  for (std::size_t k = 0; k < res.rows.size(); ++k) {
    const auto& r = res.rows[k];
    if (zero != res.rows.end() && r.beta > 0)
      res.fitted_slope = std::max(res.fitted_slope, std::abs(r.gap_continuous - zero->gap_continuous) / r.beta);
    if (r.gap_continuous >= 0.5 && (!res.beta_threshold || r.beta > *res.beta_threshold)) res.beta_threshold = r.beta;
    if (k > 0) res.max_step_delta = std::max(res.max_step_delta, std::abs(r.gap_continuous - res.rows[k - 1].gap_continuous));
  }
  return res;
}

}  // namespace kmsgibbs
