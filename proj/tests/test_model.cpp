// Copyright 2026 The qmetro developers
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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmetro/linalg.hpp"
#include "qmetro/model.hpp"
#include "qmetro/rng.hpp"

using namespace qmetro;

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

StatisticalModel bloch_model(double sz) {
  const Matrix s = 0.5 * (Matrix::Identity(2, 2) + sz * pauli_z());
  return StatisticalModel(
      s, {0.5 * pauli_x(), 0.5 * pauli_y(), 0.5 * pauli_z()}, "bloch");
}

StatisticalModel random_full_rank_model(Rng* rng, int d, int n) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng->cgaussian();
  Matrix s = g * g.adjoint() + 0.1 * Matrix::Identity(d, d);
  s /= s.trace().real();
  std::vector<Matrix> derivs;
  for (int k = 0; k < n; ++k) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = rng->cgaussian();
    Matrix h = 0.5 * (a + a.adjoint().eval());
    h -= (h.trace().real() / d) * Matrix::Identity(d, d);
    derivs.push_back(h);
  }
  return StatisticalModel(s, derivs, "random");
}

}  // namespace

TEST_CASE("construction validates trace, positivity and derivatives") {
  const Matrix bad_trace = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(StatisticalModel(bad_trace, {pauli_x()}), DomainError);

  Matrix indef(2, 2);
  indef << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(StatisticalModel(indef, {pauli_x()}), NotPsdError);

  const Matrix s = 0.5 * Matrix::Identity(2, 2);
  Matrix traceful(2, 2);
  traceful << 1, 0, 0, 0;
  CHECK_THROWS_AS(StatisticalModel(s, {traceful}), DomainError);

  CHECK_THROWS_AS(StatisticalModel(s, {pauli_x(), pauli_x()}),
                  ModelInconsistentError);
  CHECK_THROWS_AS(StatisticalModel(s, {}), DomainError);
  CHECK_THROWS_AS(StatisticalModel(Matrix::Identity(1, 1), {pauli_x()}),
                  DomainError);
}

TEST_CASE("support decomposition orders eigenvalues descending") {
  Matrix s = Matrix::Zero(3, 3);
  s(0, 0) = 0.2;
  s(1, 1) = 0.8;
  const auto dec = support_decomposition(s);
  CHECK(dec.rank == 2);
  CHECK(dec.eigenvalues(0) == doctest::Approx(0.8));
  CHECK(dec.eigenvalues(1) == doctest::Approx(0.2));
  CHECK(dec.eigenvalues(2) == doctest::Approx(0.0));
  // Support columns span the e0/e1 plane.
  const Matrix proj =
      dec.basis.leftCols(2) * dec.basis.leftCols(2).adjoint();
  CHECK(std::abs(proj(2, 2)) < 1e-12);
}

TEST_CASE("kernel leakage is recorded, not rejected") {
  Matrix pure = Matrix::Zero(2, 2);
  pure(0, 0) = 1.0;

  const StatisticalModel clean(pure, {pauli_x()});
  CHECK(!clean.kernel_leak());
  CHECK(clean.rank() == 1);

  const StatisticalModel leaky(pure, {pauli_z()});
  CHECK(leaky.kernel_leak());
  CHECK_THROWS_AS(sld_operators(leaky), ModelInconsistentError);
}

TEST_CASE("qubit SLD and Fisher information match closed forms") {
  const double sz = 0.5;
  const auto m = bloch_model(sz);
  const auto slds = sld_operators(m);
  REQUIRE(slds.size() == 3);

  // d/dsz component: L = diag(1/(1+sz), -1/(1-sz)).
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 1.0 / (1.0 + sz);
  expect(1, 1) = -1.0 / (1.0 - sz);
  CHECK((slds[2] - expect).norm() < 1e-10);

  const RealMatrix j = sld_fisher(m);
  CHECK(j(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(j(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(j(2, 2) == doctest::Approx(1.0 / (1.0 - sz * sz)).epsilon(1e-10));
  CHECK(std::abs(j(0, 1)) < 1e-10);
  CHECK(std::abs(j(0, 2)) < 1e-10);
  CHECK(std::abs(j(1, 2)) < 1e-10);

  CHECK(sldcrb(m) == doctest::Approx(2.0 + (1.0 - sz * sz)).epsilon(1e-10));
}

TEST_CASE("SLDs satisfy the Lyapunov equation on random models") {
  Rng rng(9001);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = random_full_rank_model(&rng, 4, 3);
    const auto slds = sld_operators(m);
    for (int i = 0; i < m.params(); ++i) {
      const Matrix resid =
          0.5 * (m.state() * slds[i] + slds[i] * m.state()) - m.deriv(i);
      CHECK(resid.norm() < 1e-9 * (1.0 + m.deriv(i).norm()));
      CHECK((slds[i] - slds[i].adjoint()).norm() < 1e-10);
    }
  }
}

TEST_CASE("quotient basis counts and orthonormality") {
  Matrix s = Matrix::Zero(3, 3);
  s(0, 0) = 0.7;
  s(1, 1) = 0.3;
  Matrix d1 = Matrix::Zero(3, 3);
  d1(0, 0) = 1.0;
  d1(1, 1) = -1.0;
  const StatisticalModel m(s, {d1});
  REQUIRE(m.rank() == 2);

  const auto qb = quotient_basis(m);
  CHECK(qb.ss_count == 4);
  CHECK(qb.sk_count == 4);
  CHECK(qb.kk_count == 0);
  REQUIRE(static_cast<int>(qb.elements.size()) == 8);

  const auto qbk = quotient_basis(m, true);
  CHECK(qbk.kk_count == 1);
  REQUIRE(static_cast<int>(qbk.elements.size()) == 9);

  for (size_t a = 0; a < qbk.elements.size(); ++a) {
    CHECK((qbk.elements[a] - qbk.elements[a].adjoint()).norm() < 1e-13);
    for (size_t b = a; b < qbk.elements.size(); ++b) {
      const double ip =
          (qbk.elements[a] * qbk.elements[b]).trace().real();
      CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("tensor power models add Fisher information") {
  const auto m1 = bloch_model(0.4);
  const auto m2 = tensor_power_model(m1, 2);
  CHECK(m2.dim() == 4);
  CHECK(m2.params() == 3);

  const RealMatrix j1 = sld_fisher(m1);
  const RealMatrix j2 = sld_fisher(m2);
  CHECK((j2 - 2.0 * j1).norm() < 1e-9 * j1.norm());

  const auto m3 = tensor_power_model(m1, 3);
  const RealMatrix j3 = sld_fisher(m3);
  CHECK((j3 - 3.0 * j1).norm() < 1e-9 * j1.norm());
}

TEST_CASE("tensor power derivatives match finite differences of the family") {
  const double sz0 = 0.3;
  const auto family = [](const RealVector& th) -> Matrix {
    const Matrix s1 =
        0.5 * (Matrix::Identity(2, 2) + th(0) * pauli_x() + th(1) * pauli_z());
    return kron(s1, s1);
  };
  RealVector th0(2);
  th0 << 0.0, sz0;

  const Matrix s1 = 0.5 * (Matrix::Identity(2, 2) + sz0 * pauli_z());
  const StatisticalModel base(s1, {0.5 * pauli_x(), 0.5 * pauli_z()});
  const auto m2 = tensor_power_model(base, 2);

  const auto fd = finite_difference_derivs(family, th0, 1e-3);
  REQUIRE(fd.size() == 2);
  CHECK((fd[0] - m2.deriv(0)).norm() < 1e-9);
  CHECK((fd[1] - m2.deriv(1)).norm() < 1e-9);
}

TEST_CASE("reparameterization transforms the scalar bound consistently") {
  const auto m = bloch_model(0.5);

  RealMatrix w = RealMatrix::Zero(3, 3);
  w(0, 0) = 2.0;
  w(1, 1) = 1.0;
  w(2, 2) = 0.5;
  w(0, 1) = w(1, 0) = 0.3;

  const auto mr = reparameterize(m, w);
  CHECK(sldcrb(mr) == doctest::Approx(sldcrb(m, w)).epsilon(1e-10));

  RealMatrix w2 = RealMatrix::Zero(3, 3);
  w2(0, 0) = 4.0;
  w2(1, 1) = 1.0;
  w2(2, 2) = 1.0;
  const auto m2 = bloch_model(0.0);
  CHECK(sldcrb(reparameterize(m2, w2)) ==
        doctest::Approx(sldcrb(m2, w2)).epsilon(1e-10));

  CHECK_THROWS_AS(reparameterize(m, RealMatrix::Zero(3, 3)), DomainError);
  CHECK_THROWS_AS(parameter_map(m, RealMatrix::Zero(3, 3)), DomainError);
  RealMatrix skew = RealMatrix::Identity(3, 3);
  skew(0, 1) = 0.4;
  CHECK_THROWS_AS(reparameterize(m, skew), DomainError);
}

TEST_CASE("quasiclassical detection") {
  Matrix s = Matrix::Zero(3, 3);
  s(0, 0) = 0.5;
  s(1, 1) = 0.3;
  s(2, 2) = 0.2;
  Matrix d1 = Matrix::Zero(3, 3);
  d1(0, 0) = 1.0;
  d1(1, 1) = -1.0;
  Matrix d2 = Matrix::Zero(3, 3);
  d2(1, 1) = 1.0;
  d2(2, 2) = -1.0;
  const StatisticalModel classical(s, {d1, d2});
  CHECK(is_quasiclassical(classical));

  CHECK(!is_quasiclassical(bloch_model(0.5)));
}

TEST_CASE("finite differences recover an analytic derivative") {
  const auto family = [](const RealVector& th) -> Matrix {
    return 0.5 * (Matrix::Identity(2, 2) + std::sin(th(0)) * pauli_z());
  };
  RealVector th0(1);
  th0 << 0.3;
  const auto fd = finite_difference_derivs(family, th0, 1e-3);
  const Matrix expect = 0.5 * std::cos(0.3) * pauli_z();
  CHECK((fd[0] - expect).norm() < 1e-11);
}
