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

#include "kmsgibbs/linalg.hpp"
#include "kmsgibbs/random.hpp"
#include "test_util.hpp"

namespace kmsgibbs {
namespace test_linalg {

using test::max_abs;

TEST_CASE("herm_eig on known inputs") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = -1;
  d(1, 1) = 1;
  const EigenSystem es = herm_eig(d);
  CHECK(es.values(0) == Catch::Approx(-1));
  CHECK(es.values(1) == Catch::Approx(1));
  CHECK(std::abs(es.vectors(0, 0)) == Catch::Approx(1));

  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const EigenSystem ex = herm_eig(x);
  CHECK(ex.values(0) == Catch::Approx(-1));
  // Eigenvector for -1 is |->, up to phase.
  CHECK(std::abs(ex.vectors(0, 0) + ex.vectors(1, 0)) < 1e-12);
}

TEST_CASE("herm_eig reconstructs random GUE samples") {
  CounterRng rng(11);
  for (int k = 0; k < 10; ++k) {
    const CMatrix m = random_hermitian(rng, 6, 3.0);
    const EigenSystem es = herm_eig(m);
    const CMatrix rec = es.vectors * es.values.cast<cplx>().asDiagonal() * es.vectors.adjoint();
    CHECK(op_norm(rec - m) <= 1e-10 * std::max(1.0, op_norm(m)));
    CHECK(max_abs(es.vectors.adjoint() * es.vectors - CMatrix::Identity(6, 6)) <= 1e-12);
    for (int i = 0; i + 1 < 6; ++i) CHECK(es.values(i) <= es.values(i + 1));
  }
}

TEST_CASE("herm_eig rejects non-Hermitian input") {
  CMatrix m(2, 2);
  m << 0, 1, 0, 0;
  try {
    herm_eig(m);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSymmetryViolation);
  }
}

TEST_CASE("require_finite rejects NaN") {
  CMatrix m = CMatrix::Identity(2, 2);
  m(0, 1) = std::nan("");
  CHECK_THROWS_AS(require_finite(m, "m"), Error);
}

TEST_CASE("matrix_func") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(1, 1) = std::log(4.0);
  const CMatrix r = matrix_func(d, [](double x) { return std::exp(-0.5 * x); });
  CHECK(std::abs(r(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(r(1, 1) - 0.5) < 1e-14);

  CounterRng rng(3);
  const CMatrix m = random_hermitian(rng, 5, 2.0);
  CHECK(op_norm(matrix_func(m, [](double x) { return x; }) - m) <= 1e-10);

  const CMatrix p = random_psd(rng, 4);
  const CMatrix s = matrix_func(p, [](double x) { return std::sqrt(std::max(x, 0.0)); });
  CHECK(op_norm(s * s - p) <= 1e-9);

  // Multiplicativity f * g.
  const CMatrix fg = matrix_func(m, [](double x) { return std::sin(x) * std::exp(x); });
  const CMatrix f = matrix_func(m, [](double x) { return std::sin(x); });
  const CMatrix g = matrix_func(m, [](double x) { return std::exp(x); });
  CHECK(op_norm(f * g - fg) <= 1e-9);
}

TEST_CASE("matrix_func reports the offending eigenvalue") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(1, 1) = 1.0;
  try {
    matrix_func(d, [](double x) { return 1.0 / x - 1.0 / x; });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
    CHECK(std::string(e.what()).find("eigenvalue 0") != std::string::npos);
  }
}

TEST_CASE("psd_sqrt") {
  CHECK(max_abs(psd_sqrt(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)) < 1e-15);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  const CMatrix r = psd_sqrt(d);
  CHECK(std::abs(r(0, 0) - 2.0) < 1e-14);
  CHECK(std::abs(r(1, 1) - 3.0) < 1e-14);

  CounterRng rng(5);
  const CMatrix v = herm_eig(random_hermitian(rng, 2)).vectors;
  CMatrix e = CMatrix::Zero(2, 2);
  e(0, 0) = -1e-14;
  e(1, 1) = 1.0;
  const CMatrix p = v * e * v.adjoint();
  CMatrix root;
  REQUIRE_NOTHROW(root = psd_sqrt(p));
  CHECK(op_norm(root * root - p) <= 10 * 1e-10 * 2);
  CHECK(herm_eig_unchecked(root).values.minCoeff() >= 0.0);

  const CMatrix q = random_psd(rng, 4);
  const CMatrix rq = psd_sqrt(q);
  CHECK(op_norm(psd_sqrt(rq * rq) - rq) <= 1e-8);

  e(0, 0) = -1e-3;
  try {
    psd_sqrt(v * e * v.adjoint());
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kNotPsd);
  }
}

TEST_CASE("svd") {
  const Svd id = svd(CMatrix::Identity(2, 2));
  CHECK(id.sigma(0) == Catch::Approx(1));
  CMatrix d = CMatrix::Zero(2, 2);
  d(1, 1) = 3;
  const Svd sd = svd(d);
  CHECK(sd.sigma(0) == Catch::Approx(3));
  CHECK(std::abs(sd.sigma(1)) < 1e-15);

  CounterRng rng(8);
  const CMatrix m = random_ginibre(rng, 5, 5);
  const Svd s = svd(m);
  const CMatrix rec = s.u * s.sigma.cast<cplx>().asDiagonal() * s.w.adjoint();
  CHECK(op_norm(rec - m) <= 1e-10 * std::max(1.0, op_norm(m)));
  for (int i = 0; i + 1 < 5; ++i) CHECK(s.sigma(i) >= s.sigma(i + 1));
}

TEST_CASE("vectorization convention") {
  const CVector v = vec(test::ket_bra(2, 0, 1));
  CHECK(v(1) == cplx(1.0));
  CHECK(v.norm() == Catch::Approx(1.0));

  CounterRng rng(13);
  const CMatrix x0 = random_ginibre(rng, 3, 3);
  CHECK(max_abs(kron(CMatrix::Identity(3, 3), CMatrix::Identity(3, 3)) * vec(x0) - vec(x0)) == 0.0);
  for (int k = 0; k < 100; ++k) {
    const CMatrix a = random_ginibre(rng, 3, 3);
    const CMatrix b = random_ginibre(rng, 3, 3);
    const CMatrix x = random_ginibre(rng, 3, 3);
    CHECK(max_abs(vec(a * x * b.transpose()) - kron(a, b) * vec(x)) <= 1e-12);
    CHECK(max_abs(apply_superop(sandwich_superop(a, b), x) - a * x * b) <= 1e-12);
    CHECK(max_abs(apply_superop(left_superop(a), x) - a * x) <= 1e-12);
    CHECK(max_abs(apply_superop(right_superop(b), x) - x * b) <= 1e-12);
  }
  CHECK_THROWS_AS(unvec(CVector::Zero(5), 2, 2), Error);
  CHECK_THROWS_AS(unvec_square(CVector::Zero(5)), Error);
}

TEST_CASE("trace norms") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = -0.25;
  CHECK(trace_norm_hermitian(d) == Catch::Approx(0.75));
  CHECK(trace_norm(d) == Catch::Approx(0.75));
}

TEST_CASE("counter rng is reproducible") {
  CounterRng a(42);
  CounterRng b(42);
  for (int k = 0; k < 10; ++k) CHECK(a.next_u64() == b.next_u64());
  CounterRng c(43);
  CHECK(CounterRng(42).next_u64() != c.next_u64());
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

}  // namespace test_linalg
}  // namespace kmsgibbs
