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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "kmsgibbs/analysis.hpp"
#include "kmsgibbs/classical.hpp"
#include "kmsgibbs/time_domain.hpp"
#include "test_util.hpp"

namespace kmsgibbs {
namespace {

using test::max_abs;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

// 50 random (H, T) pairs, d in 2..8, shared by criteria 1 and 3.
std::vector<test::Instance> suite() {
  CounterRng rng(2026);
  std::vector<test::Instance> out;
  for (int k = 0; k < 50; ++k) out.push_back(test::random_instance(rng, 2 + k % 7, rng.uniform(0.5, 4.0)));
  return out;
}

ConstructionOptions options(const std::string& name) {
  ConstructionOptions o;
  o.name = name;
  o.sigma = 1.0;
  return o;
}

void db_suite(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& name : construction_names()) {
    double worst_c = 0.0;
    for (const auto& inst : suite()) {
      const CPMap tp = construct_balanced(inst.t, inst.h, options(name));
      const double rel = db_residual(tp, inst.rho) / std::max(1.0, op_norm(tp.superop()));
      worst_c = std::max(worst_c, rel);
    }
    o.require(worst_c <= 1e-9, name);
    o.detail << ' ' << name << '=' << worst_c;
    worst = std::max(worst, worst_c);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs <= 120, "runtime");
  o.detail << " (worst relative residual " << worst << ')';
}

void worked_examples(Outcome& o) {
  double err_l = 0.0;
  double err_d = 0.0;
  double err_c = 0.0;
  for (double eps : {0.0, 0.5, 2.0}) {
    RMatrix l(2, 2);
    l << -1, 1, 1, -1;
    RVector v(2);
    v << std::exp(eps), std::exp(-eps);
    RMatrix expect_l(2, 2);
    expect_l << -std::exp(-2 * eps), 1, std::exp(-2 * eps), -1;
    err_l = std::max(err_l, (generalized_rule(l, v, g_metropolis) - expect_l).cwiseAbs().maxCoeff());

    const HamiltonianModel h = test::qubit(eps);
    const CPMap tx({pauli::X()});
    CMatrix expect_d = CMatrix::Zero(4, 4);
    expect_d(3, 0) = std::exp(-2 * eps);
    expect_d(0, 3) = 1.0;
    if (eps == 0.0) {
      // Degenerate H: every matrix element sits at frequency 0, so the map is X[.]X itself.
      expect_d(1, 2) = 1.0;
      expect_d(2, 1) = 1.0;
    }
    err_d = std::max(err_d, max_abs(davies(tx, h, profiles::metropolis()).superop() - expect_d));

    const CPMap tc = coherent(tx, h, profiles::sqrt_metropolis());
    const CMatrix xe = std::exp(-eps) * test::ket_bra(2, 1, 0) + test::ket_bra(2, 0, 1);
    err_c = std::max(err_c, tc.size() == 1 ? max_abs(tc.kraus()[0] - xe) : 1.0);
  }
  o.require(err_l <= 1e-12, "classical L'");
  o.require(err_d <= 1e-12, "Davies superoperator");
  o.require(err_c <= 1e-12, "coherent Kraus X_eps");
  o.detail << " L' " << err_l << ", Davies " << err_d << ", X_eps " << err_c;
}

void channel_completion(Outcome& o) {
  double tr = 0.0;
  double cp = 0.0;
  double db = 0.0;
  double taylor_ratio = 0.0;
  for (const auto& name : construction_names()) {
    for (const auto& inst : suite()) {
      const CPMap tp = construct_balanced(inst.t, inst.h, options(name));
      const double lmax = herm_eig(hermitian_part(trace_operator(tp))).values.maxCoeff();
      if (lmax <= 0) continue;
      const Channel q = channel_exact(tp.scaled(0.9 / lmax), inst.h, inst.rho);
      const VerificationReport r = verify_dynamics(QuantumDynamics{q}, inst.rho);
      tr = std::max(tr, r.trace_residual);
      cp = std::min(cp, r.cp_min_eig);
      db = std::max(db, r.db_residual);

      const double s = s_surrogate(inst.h);
      const CPMap small = tp.scaled(1.0 / (16 * s * s * op_norm(trace_operator(tp))));
      const CMatrix exact = channel_exact(small, inst.h, inst.rho).reject[0];
      for (double eps : {1e-2, 1e-4}) {
        const int order = static_cast<int>(std::floor(std::log2(1 / eps)));
        const CMatrix k = channel_taylor(small, inst.h, inst.rho, order).reject[0];
        taylor_ratio = std::max(taylor_ratio, op_norm(k - exact) / eps);
      }
    }
  }
  o.require(tr <= 1e-9, "trace residual");
  o.require(cp >= -1e-9, "Choi eigenvalue");
  o.require(db <= 1e-9, "db residual");
  o.require(taylor_ratio <= 1.0, "Taylor accuracy");
  o.detail << " trace " << tr << ", min Choi eig " << cp << ", db " << db << ", max Taylor error/eps " << taylor_ratio;
}

void recursive(Outcome& o) {
  CounterRng rng(404);
  double tele = 0.0;
  double bratio = 0.0;
  double fix = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 5;
    const test::Instance inst = test::balanced_instance(rng, d, 1.0, rng.uniform(0.5, 3.0));
    const double s = s_surrogate(inst.h);
    const CPMap tp = inst.t.scaled(0.1 / (s * s));
    const CMatrix b1 = trace_operator(tp);
    const CMatrix id = CMatrix::Identity(d, d);
    const auto b = recursive_b_sequence(b1, inst.h, 5);
    for (int l = 1; l <= 3; ++l) {
      const Channel c = channel_recursive(tp, inst.h, inst.rho, l, TraceFix::kNone);
      CMatrix sum = CMatrix::Zero(d, d);
      for (const auto& k : c.reject) sum += k.adjoint() * k;
      const double bl = recursive_b(l);
      const CMatrix rhs =
          (1 - std::pow(2.0, -l)) * id - b1 + std::pow(2.0, -l) * bl * bl * b[static_cast<std::size_t>(l)];
      tele = std::max(tele, max_abs(sum - rhs));
    }
    for (int k = 1; k <= 3; ++k)
      bratio = std::max(bratio, op_norm(b[static_cast<std::size_t>(k)]) * s * s / std::pow(0.1, std::pow(2.0, k)));
    const VerificationReport r =
        verify_dynamics(QuantumDynamics{channel_recursive(tp, inst.h, inst.rho, 2, TraceFix::kDb)}, inst.rho);
    fix = std::max({fix, r.trace_residual, r.db_residual, -r.cp_min_eig});
  }
  o.require(tele <= 1e-12, "telescoping identity");
  o.require(bratio <= 1.0 + 1e-9, "B_k decay");
  o.require(fix <= 1e-9, "db-fix channel");
  o.detail << " telescoping " << tele << ", max ||B_{k+1}|| s^2 / lambda^{2^k} " << bratio << ", db-fix residual "
           << fix;
}

void gap_comparison(Outcome& o) {
  CounterRng rng(505);
  double margin = 1e300;
  int held = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const int d = 2 + seed % 5;
    const test::Instance inst = test::random_instance(rng, d, rng.uniform(0.5, 3.0));
    const auto& names = construction_names();
    const CPMap tp0 = construct_balanced(inst.t, inst.h, options(names[static_cast<std::size_t>(seed) % names.size()]));
    const double lmax = herm_eig(hermitian_part(trace_operator(tp0))).values.maxCoeff();
    const CPMap tp = tp0.scaled(rng.uniform(0.2, 1.0) / lmax);
    const GapComparison g =
        gap_compare(channel_exact(tp, inst.h, inst.rho), lindblad_from_cp(tp, inst.h, inst.rho), inst.rho);
    margin = std::min(margin, g.gap_discrete - g.gap_continuous);
    if (g.holds) ++held;
  }
  o.require(held == 20, "gap(Q) >= gap(L)");
  o.detail << ' ' << held << "/20 hold, smallest gap(Q) - gap(L) " << margin;
}

void truncated_integral(Outcome& o) {
  CounterRng rng(606);
  for (double eps : {0.2, 0.1, 0.05, 0.01}) {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const int d = 2 + k % 5;
      const HamiltonianModel h(random_hermitian(rng, d, rng.uniform(0.5, 5.0)));
      const CMatrix m = random_unit_norm(rng, d);
      worst = std::max(worst, op_norm(s_truncated(m, h, eps).value - s_map(m, h)));
    }
    o.require(worst <= eps / 2, "eps " + std::to_string(eps));
    o.detail << " eps=" << eps << ": " << worst;
  }
}

void fourier(Outcome& o) {
  const auto w = linear_grid(-10, 10, 81);
  const auto t = linear_grid(-3, 3, 60);  // even count: t = 0 is not a node
  const FourierCheck a = fourier_pair_check(FourierPair::kA, w);
  const FourierCheck b = fourier_pair_check(FourierPair::kB, t);
  const FourierCheck c = fourier_pair_check(FourierPair::kC, t);
  for (const auto* f : {&a, &b, &c}) {
    o.require(f->max_deviation <= 1e-6, "pair " + f->name);
    o.detail << " (" << f->name << ") " << f->max_deviation;
  }
}

void high_temperature(Outcome& o) {
  std::vector<double> betas;
  for (int k = 0; k <= 20; ++k) betas.push_back(0.05 * k);
  for (int L : {3, 4}) {
    ModelSpec spec;
    spec.model = "ising";
    spec.L = L;
    spec.J = 1.0;
    spec.hx = 1.0;
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult r = gap_sweep(spec, options("coherent"), betas, 1, false);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double g0 = r.rows.front().gap_continuous;
    o.require(std::abs(g0 - 1.0) <= 1e-9, "gap(0) at L=" + std::to_string(L));
    o.require(r.max_step_delta <= 0.2, "continuity at L=" + std::to_string(L));
    if (L == 4) o.require(secs <= 300, "runtime at L=4");
    o.detail << " L=" << L << ": gap(0)=" << g0 << ", max step " << r.max_step_delta << ", beta(gap>=1/2)=";
    if (r.beta_threshold)
      o.detail << *r.beta_threshold;
    else
      o.detail << "none";
    o.detail << ", gap(" << betas.back() << ")=" << r.rows.back().gap_continuous << ", " << secs << " s;";
  }
}

void classical_oracle(Outcome& o) {
  CounterRng rng(909);
  double worst = 0.0;
  for (int d : {2, 3, 5, 6}) {
    RVector e(d);
    for (int i = 0; i < d; ++i) e(i) = rng.uniform(-2, 2);
    const HamiltonianModel h(e.cast<cplx>().asDiagonal().toDenseMatrix());
    const GibbsState rho = gibbs(h);
    RMatrix l = RMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) l(i, j) = l(j, i) = rng.uniform(0.1, 1.0);
    restore_diagonal(l, ChainKind::kLaplacian);
    const CPMap t = test::classical_jumps(l);
    const RVector v = (-e).array().exp();
    const RMatrix metro = generalized_rule(l, v, g_metropolis);
    const RMatrix glaub = generalized_rule(l, v, g_glauber);
    auto pop = [&](const CPMap& tp) { return test::population_block(lindblad_from_cp(tp, h, rho).superop, d); };
    worst = std::max(worst, (pop(davies(t, h, profiles::metropolis())) - metro).cwiseAbs().maxCoeff());
    worst = std::max(worst, (pop(coherent(t, h, profiles::sqrt_metropolis())) - metro).cwiseAbs().maxCoeff());
    worst = std::max(worst, (pop(davies(t, h, profiles::glauber())) - glaub).cwiseAbs().maxCoeff());
    worst = std::max(worst, (pop(coherent(t, h, as_amplitude(profiles::glauber()))) - glaub).cwiseAbs().maxCoeff());
  }
  double sym = 0.0;
  for (double nu : linear_grid(-3, 3, 20))
    sym = std::max(sym, std::abs(std::exp(nu) * gaussian_uncertain_gamma(nu, 1.0) - gaussian_uncertain_gamma(-nu, 1.0)));
  o.require(worst <= 1e-10, "generalized rule");
  o.require(sym <= 1e-12, "Gaussian symmetry");
  o.detail << " rule deviation " << worst << ", symmetry " << sym;
}

void first_order(Outcome& o) {
  CounterRng rng(1010);
  double worst = 1e300;
  for (int k = 0; k < 5; ++k) {
    const test::Instance inst = test::balanced_instance(rng, 2 + k, 1.0, 2.0);
    const Lindbladian l = lindblad_from_cp(inst.t, inst.h, inst.rho);
    std::vector<double> x;
    std::vector<double> y;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
      const Channel q = channel_exact(inst.t.scaled(delta), inst.h, inst.rho);
      x.push_back(std::log(delta));
      y.push_back(std::log(op_norm(q.superop() - expm(delta * l.superop))));
    }
    const double mx = (x[0] + x[1] + x[2]) / 3;
    const double my = (y[0] + y[1] + y[2]) / 3;
    double sxy = 0.0;
    double sxx = 0.0;
    for (int j = 0; j < 3; ++j) {
      sxy += (x[j] - mx) * (y[j] - my);
      sxx += (x[j] - mx) * (x[j] - mx);
    }
    worst = std::min(worst, sxy / sxx);
  }
  o.require(worst >= 1.9, "fitted order");
  o.detail << " smallest fitted order " << worst;
}

void ergodicity(Outcome& o) {
  ModelSpec spec;
  spec.model = "ising";
  spec.L = 2;
  spec.hx = 0.5;
  spec.hz = 0.3;
  const HamiltonianModel h = lattice_hamiltonian(spec);
  const GibbsState rho = gibbs(h);
  const LatticeDynamics full = lattice_dynamics(h, rho, pauli_jump_set(2), options("coherent"));
  const ErgodicityResult e = ergodicity_check(full.continuous.transition);
  const double fp = std::max(fixed_point_residual(full.continuous, rho), fixed_point_residual(full.discrete, rho));
  double lazy = 0.0;
  for (const auto& s : basis_states(4))
    lazy = std::max(lazy, mixing_sim(QuantumDynamics{full.discrete}, rho, s, {5000.0}).lazy_distance.back());
  const GapResult g = spectral_gap(QuantumDynamics{full.continuous}, rho);

  const JumpSet zs = make_jump_set({site_operator(pauli::Z(), 0, 2), site_operator(pauli::Z(), 1, 2)});
  // With hx != 0 the balanced Z jumps pick up off-diagonal parts and are ergodic.
  // The negative control needs H diagonal in the Z basis.
  const ErgodicityResult ez_field =
      ergodicity_check(lattice_dynamics(h, rho, zs, options("coherent")).continuous.transition);
  ModelSpec classical = spec;
  classical.hx = 0.0;
  const HamiltonianModel hc = lattice_hamiltonian(classical);
  const GibbsState rhoc = gibbs(hc);
  const LatticeDynamics dz = lattice_dynamics(hc, rhoc, zs, options("coherent"));
  const ErgodicityResult ez = ergodicity_check(dz.continuous.transition);
  CMatrix plus = CMatrix::Constant(4, 4, cplx(0.25, 0.0));
  const double plateau = mixing_sim(QuantumDynamics{dz.continuous}, rhoc, plus, {1000.0}).distance.back();

  o.require(e.ergodic, "Pauli set ergodic");
  o.require(g.gap > 0, "unique fixed point");
  o.require(fp <= 1e-9, "fixed point residual");
  o.require(lazy <= 1e-6, "lazy distance");
  o.require(!ez.ergodic, "{Z} set non-ergodic");
  o.require(plateau > 1e-3, "{Z} distance plateau");
  o.detail << " Pauli commutant dim " << e.commutant_dim << ", gap " << g.gap << ", fixed point " << fp
           << ", lazy distance " << lazy << "; {Z} at hx=0: commutant dim " << ez.commutant_dim
           << ", distance at t=1000 " << plateau << "; {Z} at hx=0.5: commutant dim " << ez_field.commutant_dim;
}

}  // namespace
}  // namespace kmsgibbs

int main() {
  using namespace kmsgibbs;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"detailed balance of all constructions", db_suite},
      {"worked examples", worked_examples},
      {"channel completion and Taylor series", channel_completion},
      {"recursive rejection family", recursive},
      {"gap comparison", gap_comparison},
      {"truncated time integral", truncated_integral},
      {"Fourier pairs", fourier},
      {"high-temperature gap", high_temperature},
      {"classical oracle", classical_oracle},
      {"first-order agreement", first_order},
      {"ergodicity", ergodicity},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s:%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
