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
#include <vector>

#include "qmetro/bounds.hpp"
#include "qmetro/model.hpp"

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

// Transverse qubit model: state displaced along z, parameters along x and y.
StatisticalModel transverse_qubit(double sz) {
  const Matrix s = 0.5 * (Matrix::Identity(2, 2) + sz * pauli_z());
  return StatisticalModel(s, {0.5 * pauli_x(), 0.5 * pauli_y()}, "transverse");
}

StatisticalModel bloch3(double sz) {
  const Matrix s = 0.5 * (Matrix::Identity(2, 2) + sz * pauli_z());
  return StatisticalModel(
      s, {0.5 * pauli_x(), 0.5 * pauli_y(), 0.5 * pauli_z()}, "bloch3");
}

// Equatorial qubit state under Gaussian dephasing, parameters (polar angle,
// phase), evaluated at phase zero.
// Phase phi and diffusion strength delta estimated jointly at a fixed
// interrogation angle lambda; the diffusion damps the coherence by
// eta = exp(-delta^2).
StatisticalModel dephased_qubit(double lambda, double phi, double delta) {
  const double eta = std::exp(-delta * delta);
  const double cl = std::cos(lambda), sl = std::sin(lambda);
  const Complex ph = std::exp(Complex(0, -phi));
  Matrix s(2, 2), d1(2, 2), d2(2, 2);
  s << 0.5 * (1 + cl), 0.5 * eta * sl * ph, 0.5 * eta * sl * std::conj(ph),
      0.5 * (1 - cl);
  d1 << 0, Complex(0, -0.5 * eta * sl) * ph,
      Complex(0, 0.5 * eta * sl) * std::conj(ph), 0;
  d2 << 0, -delta * eta * sl * ph, -delta * eta * sl * std::conj(ph), 0;
  return StatisticalModel(s, {d1, d2}, "dephased");
}

StatisticalModel classical_trinomial() {
  Matrix s = Matrix::Zero(3, 3);
  s(0, 0) = 0.5;
  s(1, 1) = 0.3;
  s(2, 2) = 0.2;
  Matrix d1 = Matrix::Zero(3, 3), d2 = Matrix::Zero(3, 3);
  d1(0, 0) = 1;
  d1(1, 1) = -1;
  d2(1, 1) = 1;
  d2(2, 2) = -1;
  return StatisticalModel(s, {d1, d2}, "trinomial");
}

// Pure state with one rotation parameter and one rank-increasing parameter;
// the second derivative leaks into the kernel-kernel block.
StatisticalModel boundary_qubit() {
  Matrix pure = Matrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  return StatisticalModel(pure, {0.5 * pauli_x(), 0.5 * pauli_z()},
                          "boundary");
}

EstimatorSet sigma_xy() { return EstimatorSet{{pauli_x(), pauli_y()}}; }

}  // namespace

TEST_CASE("z matrix of the transverse model") {
  const auto m = transverse_qubit(0.5);
  const Matrix z = z_matrix(m, sigma_xy());
  CHECK(z(0, 0).real() == doctest::Approx(1.0));
  CHECK(z(1, 1).real() == doctest::Approx(1.0));
  CHECK(z(0, 1).imag() == doctest::Approx(-0.5));
  CHECK(z(1, 0).imag() == doctest::Approx(0.5));
  CHECK(std::abs(z(0, 1).real()) < 1e-12);

  CHECK(unbiasedness_residual(m, sigma_xy()) < 1e-12);
  CHECK(sld_function(m, sigma_xy()) == doctest::Approx(2.0));

  CHECK_THROWS_AS(z_matrix(m, EstimatorSet{{pauli_x()}}), WrongArityError);
  CHECK_THROWS_AS(
      z_matrix(m, EstimatorSet{{Matrix::Identity(3, 3),
                                Matrix::Identity(3, 3)}}),
      DomainError);
}

TEST_CASE("holevo and nagaoka functions on sigma_x, sigma_y") {
  const auto m = transverse_qubit(0.5);
  // tr{S(X^2+Y^2)} = 2, |tr A| = 2 s_z, trabs A = 2.
  CHECK(holevo_function(m, sigma_xy()) == doctest::Approx(3.0));
  CHECK(nagaoka_function(m, sigma_xy()) == doctest::Approx(4.0));

  const auto m9 = transverse_qubit(0.9);
  CHECK(holevo_function(m9, sigma_xy()) == doctest::Approx(2.0 + 2.0 * 0.9));
  CHECK(nagaoka_function(m9, sigma_xy()) == doctest::Approx(4.0));

  RealMatrix w(2, 2);
  w << 1, 2, 0, 1;
  CHECK_THROWS_AS(holevo_function(m, sigma_xy(), w), DomainError);
  CHECK_THROWS_AS(nagaoka_function(bloch3(0.5),
                                   EstimatorSet{{pauli_x(), pauli_y(),
                                                 pauli_z()}}),
                  WrongArityError);
}

TEST_CASE("sld bound packages the closed form") {
  const auto m = transverse_qubit(0.5);
  const auto res = sld_bound(m);
  CHECK(res.bound == "sld");
  CHECK(res.value == doctest::Approx(2.0));
  CHECK(res.gap == 0.0);
  CHECK(res.unbiasedness < 1e-10);
  CHECK(sld_function(m, res.optimizer) == doctest::Approx(res.value));

  RealMatrix w(2, 2);
  w << 4, 0, 0, 1;
  CHECK(sld_bound(m, w).value == doctest::Approx(5.0));
}

TEST_CASE("holevo bound on the transverse qubit") {
  const auto m = transverse_qubit(0.5);
  const auto res = hcrb(m);
  CHECK(res.bound == "holevo");
  CHECK(res.status == SolveStatus::Optimal);
  CHECK(res.value == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(res.gap < 1e-6);
  CHECK(res.unbiasedness < 1e-6);
  const double at_opt = holevo_function(m, res.optimizer);
  CHECK(at_opt == doctest::Approx(res.value).epsilon(1e-6));

  // Deterministic re-solve, stable under a perturbed start.
  const auto again = hcrb(m);
  CHECK(again.value == res.value);
  SolverSettings jitter;
  jitter.init_perturb_seed = 7;
  CHECK(hcrb(m, RealMatrix::Identity(2, 2), jitter).value ==
        doctest::Approx(res.value).epsilon(1e-7));
}

TEST_CASE("nagaoka bound matches the qubit closed form") {
  const auto m = transverse_qubit(0.5);
  const auto res = ncrb(m);
  CHECK(res.bound == "nagaoka");
  CHECK(res.status == SolveStatus::Optimal);
  CHECK(res.value == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(res.unbiasedness < 1e-6);
  CHECK(gill_massar_ncrb(m) == doctest::Approx(4.0));
  CHECK(nagaoka_function(m, res.optimizer) ==
        doctest::Approx(res.value).epsilon(1e-6));
  // Nagaoka dominates Holevo.
  CHECK(res.value >= hcrb(m).value - 1e-7);
}

TEST_CASE("dephased qubit pins both bounds") {
  const double delta = 0.5, dd = delta * delta;
  const auto m = dephased_qubit(M_PI / 2, 0.0, delta);

  // At lambda = pi/2 the mean Uhlmann curvature vanishes, so the Holevo
  // bound collapses onto the symmetric bound
  // e^{2 d^2} + (e^{2 d^2} - 1) / (4 d^2).
  const double sld = std::exp(2 * dd) + std::expm1(2 * dd) / (4 * dd);
  CHECK(sldcrb(m) == doctest::Approx(sld).epsilon(1e-10));
  const auto h = hcrb(m);
  CHECK(h.value == doctest::Approx(sld).epsilon(1e-6));

  // Nagaoka closed form (e^{d^2} + sqrt(e^{2 d^2} - 1) / (2 d))^2.
  const auto n = ncrb(m);
  const double nag =
      std::pow(std::exp(dd) + std::sqrt(std::expm1(2 * dd)) / (2 * delta), 2);
  CHECK(n.value == doctest::Approx(nag).epsilon(1e-6));
  CHECK(gill_massar_ncrb(m) == doctest::Approx(nag).epsilon(1e-10));
  CHECK(n.value >= h.value);

  // Nagaoka-Hayashi agrees with Nagaoka for two parameters.
  const auto nh = nhcrb(m);
  CHECK(nh.bound == "nagaoka-hayashi");
  CHECK(nh.value == doctest::Approx(n.value).epsilon(1e-6));
  CHECK(nh_function(m, nh.optimizer, RealMatrix::Identity(2, 2)) ==
        doctest::Approx(nh.value).epsilon(1e-6));
}

TEST_CASE("quasiclassical model collapses to the sld bound") {
  const auto m = classical_trinomial();
  CHECK(is_quasiclassical(m));
  const double s = sldcrb(m);
  CHECK(s == doctest::Approx(0.41));
  CHECK(hcrb(m).value == doctest::Approx(s).epsilon(1e-8));
  CHECK(ncrb(m).value == doctest::Approx(s).epsilon(1e-8));
}

TEST_CASE("pure state equalizes holevo and nagaoka") {
  Matrix pure = Matrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  const StatisticalModel m(pure, {0.5 * pauli_x(), 0.5 * pauli_y()}, "pure");
  CHECK(!m.kernel_leak());
  const auto h = hcrb(m);
  const auto n = ncrb(m);
  CHECK(h.value == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(n.value == doctest::Approx(h.value).epsilon(1e-6));
}

TEST_CASE("kernel leakage keeps the bounds finite") {
  const auto m = boundary_qubit();
  CHECK(m.kernel_leak());
  CHECK_THROWS_AS(sld_operators(m), ModelInconsistentError);
  // The rank-increasing direction is estimated without variance at the
  // boundary, leaving only the rotation cost.
  CHECK(hcrb(m).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(ncrb(m).value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("weight absorption leaves the holevo bound invariant") {
  const auto m = dephased_qubit(1.1, 0.3, 0.4);
  RealMatrix w(2, 2);
  w << 4, 1, 1, 2;
  const auto direct = hcrb(m, w);
  const auto absorbed = hcrb(reparameterize(m, w));
  CHECK(direct.value == doctest::Approx(absorbed.value).epsilon(1e-7));
  CHECK(holevo_function(m, direct.optimizer, w) ==
        doctest::Approx(direct.value).epsilon(1e-6));
  // Weighted Nagaoka goes through the same absorption.
  CHECK(ncrb(m, w).value ==
        doctest::Approx(ncrb(reparameterize(m, w)).value).epsilon(1e-10));

  RealMatrix neg(2, 2);
  neg << -1, 0, 0, 1;
  CHECK_THROWS_AS(hcrb(m, neg), NotPsdError);
  CHECK_THROWS_AS(nhcrb(m, neg), NotPsdError);
}

TEST_CASE("nagaoka-hayashi bound for three parameters") {
  const auto m = bloch3(0.5);
  const auto nh = nhcrb(m);
  CHECK(nh.status == SolveStatus::Optimal);
  CHECK(nh.unbiasedness < 1e-6);

  const double s = sldcrb(m);
  const double h = hcrb(m).value;
  CHECK(s == doctest::Approx(2.75));
  CHECK(h >= s - 1e-7);
  CHECK(nh.value >= h - 1e-7);

  const RealMatrix id3 = RealMatrix::Identity(3, 3);
  CHECK(nh_function(m, nh.optimizer, id3) ==
        doctest::Approx(nh.value).epsilon(1e-6));
  const auto [direct, penalty] = nh_split(m, nh.optimizer, id3);
  CHECK(penalty >= -1e-9);
  CHECK(direct + penalty ==
        doctest::Approx(nh_function(m, nh.optimizer, id3)).epsilon(1e-6));
  const Matrix z = z_matrix(m, nh.optimizer);
  CHECK(direct == doctest::Approx(z.real().trace()).epsilon(1e-9));

  CHECK_THROWS_AS(
      nhcrb(StatisticalModel(m.state(), {0.5 * pauli_x()}, "one")),
      WrongArityError);
}

TEST_CASE("gill-massar guards its domain") {
  CHECK_THROWS_AS(gill_massar_ncrb(bloch3(0.5)), WrongArityError);
  CHECK_THROWS_AS(gill_massar_ncrb(classical_trinomial()), DomainError);
  CHECK(gill_massar_ncrb(dephased_qubit(1.0, 0.2, 0.3)) > 0.0);
}

TEST_CASE("mse matrix of the optimal z measurement") {
  const Matrix s = 0.5 * (Matrix::Identity(2, 2) + 0.5 * pauli_z());
  const StatisticalModel m(s, {0.5 * pauli_z()}, "z-line");

  Matrix up = Matrix::Zero(2, 2), down = Matrix::Zero(2, 2);
  up(0, 0) = 1;
  down(1, 1) = 1;
  RealVector eu(1), ed(1);
  eu << 0.5;
  ed << -1.5;

  double resid = -1.0;
  const RealMatrix v = mse_matrix({up, down}, {eu, ed}, m, &resid);
  CHECK(v(0, 0) == doctest::Approx(0.75));
  CHECK(resid < 1e-12);
  // Efficient measurement: variance meets the sld bound.
  CHECK(v(0, 0) == doctest::Approx(sldcrb(m)));

  CHECK_THROWS_AS(mse_matrix({up}, {eu}, m, nullptr), DomainError);
  CHECK_THROWS_AS(mse_matrix({up, down}, {eu}, m, nullptr), DomainError);
  Matrix skew = up;
  skew(0, 1) = 2.0;
  skew(1, 0) = 2.0;
  CHECK_THROWS_AS(
      mse_matrix({skew, Matrix::Identity(2, 2) - skew}, {eu, ed}, m, nullptr),
      NotPsdError);
}
