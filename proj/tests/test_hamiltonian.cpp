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

#include <catch_amalgamated.hpp>

#include "kmsgibbs/hamiltonian.hpp"
#include "kmsgibbs/random.hpp"
#include "test_util.hpp"

namespace kmsgibbs {
namespace test_hamiltonian {

using test::max_abs;

// Transverse-field Ising matrix built bit by bit: sum J Z_i Z_{i+1} + hx X_i + hz Z_i.
static CMatrix brute_force_ising(int L, double J, double hx, double hz, bool periodic) {
  const int d = 1 << L;
  CMatrix h = CMatrix::Zero(d, d);
  auto spin = [L](int s, int site) { return ((s >> (L - 1 - site)) & 1) ? -1.0 : 1.0; };
  for (int s = 0; s < d; ++s) {
    double diag = 0.0;
    const int bonds = periodic ? L : L - 1;
    for (int i = 0; i < bonds; ++i) diag += J * spin(s, i) * spin(s, (i + 1) % L);
    for (int i = 0; i < L; ++i) {
      diag += hz * spin(s, i);
      h(s ^ (1 << (L - 1 - i)), s) += hx;
    }
    h(s, s) += diag;
  }
  return h;
}

TEST_CASE("Bohr clusters") {
  CounterRng rng(21);
  const HamiltonianModel h(random_hermitian(rng, 5, 2.0));
  const auto& bohr = h.bohr();
  int pairs = 0;
  for (std::size_t k = 0; k < bohr.size(); ++k) {
    const int m = h.mirror(static_cast<int>(k));
    CHECK(bohr[k].nu == -bohr[static_cast<std::size_t>(m)].nu);
    for (const auto& [i, j] : bohr[k].pairs) {
      CHECK(std::abs(h.energies()(i) - h.energies()(j) - bohr[k].nu) <= h.cluster_tol());
      CHECK(h.cluster_of(i, j) == static_cast<int>(k));
      ++pairs;
    }
  }
  CHECK(pairs == 25);
  CHECK(bohr[static_cast<std::size_t>(h.zero_cluster())].nu == 0.0);
  CHECK(h.find_cluster(0.0).has_value());
  CHECK_FALSE(h.find_cluster(100.0).has_value());
}

TEST_CASE("degenerate spectrum clusters pairs together") {
  CMatrix d = CMatrix::Zero(4, 4);
  d(0, 0) = -1;
  d(1, 1) = -1;
  d(2, 2) = 1;
  d(3, 3) = 1;
  const HamiltonianModel h(d);
  CHECK(h.num_clusters() == 3);
  CHECK(h.levels().size() == 2);
}

TEST_CASE("component_at_frequency") {
  CounterRng rng(22);
  const HamiltonianModel h(random_hermitian(rng, 5, 2.0));
  const CMatrix id = CMatrix::Identity(5, 5);
  CHECK(max_abs(component_at_frequency(id, h, 0.0) - id) <= 1e-12);
  for (const auto& c : h.bohr())
    if (c.nu != 0.0) CHECK(max_abs(component_at_frequency(id, h, c.nu)) <= 1e-12);

  const CMatrix m = random_ginibre(rng, 5, 5);
  CMatrix sum = CMatrix::Zero(5, 5);
  for (const auto& c : components(m, h)) sum += c;
  CHECK(max_abs(sum - m) <= 1e-10);

  try {
    component_at_frequency(m, h, 123.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownFrequency);
  }
}

TEST_CASE("qubit components of X") {
  const double eps = 0.7;
  const HamiltonianModel h = test::qubit(eps);
  const CMatrix x = pauli::X();
  // Raising part |1><0| sits at nu = E_1 - E_0 = 2 eps.
  const CMatrix up = component_at_frequency(x, h, 2 * eps);
  CHECK(max_abs(up - test::ket_bra(2, 1, 0)) <= 1e-12);
  const CMatrix down = component_at_frequency(x, h, -2 * eps);
  CHECK(max_abs(down - test::ket_bra(2, 0, 1)) <= 1e-12);
}

TEST_CASE("gibbs states") {
  const GibbsState flat = gibbs(HamiltonianModel(CMatrix::Zero(2, 2)));
  CHECK(max_abs(flat.rho - 0.5 * CMatrix::Identity(2, 2)) <= 1e-15);

  const GibbsState q = gibbs(test::qubit(1.0));
  const double e = std::exp(1.0);
  CHECK(std::abs(q.rho(0, 0) - e / (e + 1 / e)) <= 1e-14);
  CHECK(std::abs(q.rho(1, 1) - (1 / e) / (e + 1 / e)) <= 1e-14);

  CounterRng rng(23);
  const CMatrix hm = random_hermitian(rng, 6, 4.0);
  const GibbsState g = gibbs(HamiltonianModel(hm));
  CHECK(std::abs(g.rho.trace() - 1.0) <= 1e-12);
  CHECK(herm_eig(g.rho).values.minCoeff() > 0.0);
  CHECK(max_abs(g.rho_quarter * g.rho_mquarter - CMatrix::Identity(6, 6)) <= 1e-9);
  CHECK(max_abs(g.rho_half * g.rho_half - g.rho) <= 1e-12);
  // Unshifted formula.
  const CMatrix direct = expm(-hm);
  CHECK(max_abs(direct / direct.trace() - g.rho) <= 1e-12);
}

TEST_CASE("gibbs caps the Hamiltonian norm") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 70;
  try {
    gibbs(HamiltonianModel(d));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
  }
  d(0, 0) = 40;
  const GibbsState g = gibbs(HamiltonianModel(d));
  CHECK_FALSE(g.notes.empty());
}

TEST_CASE("conjugation identity for components") {
  CounterRng rng(24);
  const HamiltonianModel h(random_hermitian(rng, 5, 3.0));
  const GibbsState rho = gibbs(h);
  const CMatrix m = random_ginibre(rng, 5, 5);
  for (int k = 0; k < h.num_clusters(); ++k) {
    const CMatrix mk = component_at_cluster(m, h, k);
    const double nu = h.bohr()[static_cast<std::size_t>(k)].nu;
    CHECK(max_abs(rho.rho_mquarter * mk * rho.rho_quarter - std::exp(0.25 * nu) * mk) <= 1e-9);
  }
}

TEST_CASE("lattice models") {
  ModelSpec s;
  s.model = "ising";
  s.L = 1;
  s.J = 0.0;
  s.hx = 0.8;
  s.beta = 0.5;
  CHECK(max_abs(lattice_hamiltonian(s).H() - 0.4 * pauli::X()) <= 1e-15);

  s.L = 2;
  s.J = 1.0;
  s.hx = 0.0;
  s.beta = 0.0;
  CHECK(max_abs(lattice_hamiltonian(s).H()) == 0.0);

  s.L = 3;
  s.beta = 1.0;
  s.hx = 0.6;
  s.hz = -0.3;
  s.periodic = true;
  const CMatrix ref = brute_force_ising(3, 1.0, 0.6, -0.3, true);
  CHECK(max_abs(model_matrix(s) - ref) <= 1e-14);
  const RVector e = lattice_hamiltonian(s).energies();
  const RVector er = herm_eig(ref).values;
  CHECK((e - er).cwiseAbs().maxCoeff() <= 1e-12);

  s.model = "heisenberg";
  s.L = 2;
  s.hx = s.hz = 0.0;
  s.periodic = false;
  // XX + YY + ZZ on two qubits has spectrum {-3, 1, 1, 1}.
  const RVector eh = lattice_hamiltonian(s).energies();
  CHECK(std::abs(eh(0) + 3) < 1e-12);
  CHECK(std::abs(eh(3) - 1) < 1e-12);

  s.model = "ising";
  s.L = 7;
  try {
    model_matrix(s);
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kSize);
  }
}

TEST_CASE("pauli jump sets") {
  const JumpSet one = pauli_jump_set(1);
  REQUIRE(one.ops.size() == 3);
  CHECK(max_abs(one.ops[0] - pauli::X()) == 0.0);
  CHECK(max_abs(one.ops[1] - pauli::Y()) == 0.0);
  CHECK(max_abs(one.ops[2] - pauli::Z()) == 0.0);
  const JumpSet two = pauli_jump_set(2);
  CHECK(two.ops.size() == 6);
  CHECK(two.self_adjoint);
  for (const auto& a : two.ops) CHECK(max_abs(a * a - CMatrix::Identity(4, 4)) == 0.0);
  CHECK(closed_under_adjoint(two.ops));
  CHECK_FALSE(make_jump_set({test::ket_bra(2, 0, 1)}).self_adjoint);
  CHECK(make_jump_set({test::ket_bra(2, 0, 1), test::ket_bra(2, 1, 0)}).self_adjoint);
}

}  // namespace test_hamiltonian
}  // namespace kmsgibbs
