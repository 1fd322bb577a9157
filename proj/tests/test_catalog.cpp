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
#include <numbers>

#include "qmetro/bounds.hpp"
#include "qmetro/catalog.hpp"
#include "qmetro/errors.hpp"
#include "qmetro/model.hpp"

using namespace qmetro;

namespace {

constexpr double kPi = std::numbers::pi;

double sandwich_distance(const Matrix& s, const Matrix& a, const Matrix& b) {
  const Matrix sq = matrix_sqrt_psd(s);
  return (sq * (a - b) * sq).norm();
}

std::vector<double> fallbacks(const CatalogEntry& e) {
  std::vector<double> v;
  for (const CatalogParam& p : e.params) v.push_back(p.fallback);
  return v;
}

}  // namespace

TEST_CASE("phase diffusion construction and derivatives") {
  const auto m = phase_diffusion(kPi / 2, 0.0, 0.5);
  CHECK(m.dim() == 2);
  CHECK(m.params() == 2);
  CHECK(m.state()(0, 1).real() ==
        doctest::Approx(0.5 * std::exp(-0.25)).epsilon(1e-12));
  CHECK(m.state()(0, 1).imag() == doctest::Approx(0.0));

  CHECK(std::abs(phase_diffusion(kPi / 2, 0.0, 6.0).state()(0, 1)) < 1e-15);

  // Analytic derivatives against central differences in (phi, delta).
  const double lambda = 1.1;
  const auto family = [lambda](const RealVector& t) -> Matrix {
    return phase_diffusion(lambda, t(0), t(1)).state();
  };
  const RealVector theta0 = (RealVector(2) << 0.3, 0.4).finished();
  const auto fd = finite_difference_derivs(family, theta0, 1e-2);
  const auto at = phase_diffusion(lambda, 0.3, 0.4);
  CHECK((fd[0] - at.deriv(0)).norm() < 1e-7);
  CHECK((fd[1] - at.deriv(1)).norm() < 1e-7);

  // Same for the variance parameterization.
  const auto tfamily = [lambda](const RealVector& t) -> Matrix {
    return phase_diffusion_reparam_tilde(lambda, t(0), t(1)).state();
  };
  const auto tfd = finite_difference_derivs(tfamily, theta0, 1e-2);
  const auto tat = phase_diffusion_reparam_tilde(lambda, 0.3, 0.4);
  CHECK((tfd[0] - tat.deriv(0)).norm() < 1e-7);
  CHECK((tfd[1] - tat.deriv(1)).norm() < 1e-7);

  // delta_tilde = delta^2 is a linear change of the derivative rows:
  // the tilde model equals the original with the delta row divided by
  // 2 delta.
  const double delta = 0.3;
  const auto orig = phase_diffusion(0.8, 0.2, delta);
  const auto tilde = phase_diffusion_reparam_tilde(0.8, 0.2, delta * delta);
  RealMatrix t = RealMatrix::Identity(2, 2);
  t(1, 1) = 1 / (2 * delta);
  const auto mapped = parameter_map(orig, t);
  CHECK((tilde.state() - mapped.state()).norm() < 1e-14);
  CHECK((tilde.deriv(0) - mapped.deriv(0)).norm() < 1e-14);
  CHECK((tilde.deriv(1) - mapped.deriv(1)).norm() < 1e-14);

  CHECK_THROWS_AS(phase_diffusion(0.0, 0.0, 0.5), DomainError);
  CHECK_THROWS_AS(phase_diffusion(kPi, 0.0, 0.5), DomainError);
  CHECK_THROWS_AS(phase_diffusion(1.0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(phase_diffusion(1.0, 0.0, -0.2), DomainError);
  CHECK_THROWS_AS(phase_diffusion_reparam_tilde(1.0, 0.0, -0.1), DomainError);
}

TEST_CASE("phase diffusion closed forms match the solver") {
  for (int i = 0; i < 10; ++i) {
    const double lambda = 0.2 + i * (kPi - 0.4) / 9;
    for (int j = 0; j < 10; ++j) {
      const double delta = 0.05 + j * 0.95 / 9;
      CAPTURE(lambda);
      CAPTURE(delta);
      const auto m = phase_diffusion(lambda, 0.0, delta);

      CHECK(sldcrb(m) ==
            doctest::Approx(phase_diffusion_sldcrb_oracle(lambda, delta))
                .epsilon(1e-9));

      const double h = phase_diffusion_hcrb_oracle(lambda, delta);
      CHECK(std::abs(hcrb(m).value - h) < 1e-5);

      const double n = phase_diffusion_ncrb_oracle(lambda, delta);
      CHECK(std::abs(ncrb(m).value - n) < 1e-5);
      CHECK(gill_massar_ncrb(m) == doctest::Approx(n).epsilon(1e-8));

      CHECK(n > h);
    }
  }

  // The two branch expressions agree where the branch function vanishes.
  const double delta = 1.0;
  const double boundary = std::acos(2 * delta / std::expm1(2 * delta * delta));
  const double left = phase_diffusion_hcrb_oracle(boundary - 1e-9, delta);
  const double right = phase_diffusion_hcrb_oracle(boundary + 1e-9, delta);
  CHECK(std::abs(left - right) < 1e-6);

  // Both branches are exercised on the domain.
  CHECK(phase_diffusion_hcrb_oracle(0.2, 1.0) > 0);   // rld branch
  CHECK(phase_diffusion_hcrb_oracle(kPi / 2, 1.0) > 0);

  // The gap at lambda = pi/2 tends to sqrt(2) from above as the diffusion
  // weakens.
  const double gap = phase_diffusion_ncrb_oracle(kPi / 2, 0.01) -
                     phase_diffusion_hcrb_oracle(kPi / 2, 0.01);
  CHECK(gap > std::numbers::sqrt2);
  CHECK(gap < std::numbers::sqrt2 + 5e-4);
  for (double d : {0.01, 0.5, 0.99})
    for (double l : {0.3, 1.0, kPi / 2, 2.5})
      CHECK(phase_diffusion_ncrb_oracle(l, d) >
            phase_diffusion_hcrb_oracle(l, d));
}

TEST_CASE("phase diffusion log derivative closed forms") {
  const double lambda = 0.7, delta = 0.4;
  const auto m = phase_diffusion(lambda, 0.0, delta);
  const auto lds = phase_diffusion_sld_rld_oracle(lambda, delta);

  const auto slds = sld_operators(m);
  CHECK((lds.sld_phi - slds[0]).norm() < 1e-9);
  CHECK((lds.sld_delta - slds[1]).norm() < 1e-9);

  CHECK(lds.sld_phi(0, 0) == Complex(0, 0));
  CHECK(lds.sld_phi(0, 1).real() == doctest::Approx(0.0));
  CHECK(std::abs(lds.sld_phi(0, 1).imag()) ==
        doctest::Approx(std::exp(-delta * delta) * std::sin(lambda)));

  // Defining property of the right logarithmic derivatives.
  const Matrix& s = m.state();
  CHECK((m.deriv(0) - s * lds.rld_phi).norm() < 1e-9);
  CHECK((m.deriv(1) - s * lds.rld_delta).norm() < 1e-9);
}

TEST_CASE("phi invariance and the pure-limit parameterization") {
  const auto a = hcrb(phase_diffusion(0.9, 0.0, 0.4));
  const auto b = hcrb(phase_diffusion(0.9, 0.7, 0.4));
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-6));

  // At delta_tilde = 0 the state is pure and both bounds hit 1/sin^2.
  for (double lambda : {kPi / 2, 0.9}) {
    const auto pure = phase_diffusion_reparam_tilde(lambda, 0.0, 0.0);
    const double target = 1 / (std::sin(lambda) * std::sin(lambda));
    CHECK(hcrb(pure).value == doctest::Approx(target).epsilon(1e-6));
    CHECK(ncrb(pure).value == doctest::Approx(target).epsilon(1e-6));
  }

  // In the original parameterization the ratio of the bounds stays away
  // from one as delta -> 0.
  const double ratio = phase_diffusion_ncrb_oracle(kPi / 2, 1e-3) /
                       phase_diffusion_hcrb_oracle(kPi / 2, 1e-3);
  CHECK(std::abs(ratio - (1 + 2 * std::numbers::sqrt2 / 3)) < 1e-3);
}

TEST_CASE("qubit sz closed forms") {
  for (double sz : {-0.9, -0.5, -0.2, 0.2, 0.5, 0.9}) {
    CAPTURE(sz);
    const auto m = qubit_sz(sz);
    CHECK(sldcrb(m) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(hcrb(m).value ==
          doctest::Approx(qubit_sz_hcrb_oracle(sz)).epsilon(1e-6));
  }

  const auto m = qubit_sz(0.5);
  CHECK(ncrb(m).value == doctest::Approx(4.0).epsilon(1e-6));

  // The optimal estimators are the transverse Pauli pair.
  const auto h = hcrb(m);
  Matrix sx(2, 2), sy(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  CHECK(sandwich_distance(m.state(), h.optimizer.x[0], sx) < 1e-4);
  CHECK(sandwich_distance(m.state(), h.optimizer.x[1], sy) < 1e-4);

  CHECK_THROWS_AS(qubit_sz(0.0), DomainError);
  CHECK_THROWS_AS(qubit_sz(1.0), DomainError);
  CHECK_THROWS_AS(qubit_sz(-1.3), DomainError);
}

TEST_CASE("bell phase damping closed forms") {
  for (double eps : {0.1, 0.5}) {
    CAPTURE(eps);
    const auto m = bell_phase_damping(eps);
    CHECK(m.dim() == 4);
    CHECK(m.params() == 3);
    CHECK(m.rank() == 2);

    const double h = bell_phase_damping_hcrb_oracle(eps);
    CHECK(sldcrb(m) == doctest::Approx(h).epsilon(1e-9));
    CHECK(hcrb(m).value == doctest::Approx(h).epsilon(1e-5));

    const double nh = bell_phase_damping_nhcrb_oracle(eps);
    CHECK(nhcrb(m).value == doctest::Approx(nh).epsilon(1e-5));
    CHECK(nh - h > 1e-6);
  }

  // eps = 0 keeps the pure Bell pair: every bound is 3.
  const auto pure = bell_phase_damping(0.0);
  CHECK(sldcrb(pure) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(bell_phase_damping_hcrb_oracle(0.0) == doctest::Approx(3.0));
  CHECK(hcrb(pure).value == doctest::Approx(3.0).epsilon(1e-6));

  CHECK_THROWS_AS(bell_phase_damping(-0.1), DomainError);
  CHECK_THROWS_AS(bell_phase_damping(1.0), DomainError);
}

TEST_CASE("classical diagonal collapses every bound") {
  const RealVector p = (RealVector(3) << 0.5, 0.3, 0.2).finished();
  const RealVector d1 = (RealVector(3) << 0.5, -0.5, 0).finished();
  const RealVector d2 = (RealVector(3) << 0, 0.5, -0.5).finished();
  const auto m = classical_diagonal(p, {d1, d2});
  CHECK(is_quasiclassical(m));

  RealMatrix j = RealMatrix::Zero(2, 2);
  for (int a = 0; a < 3; ++a) {
    j(0, 0) += d1(a) * d1(a) / p(a);
    j(0, 1) += d1(a) * d2(a) / p(a);
    j(1, 1) += d2(a) * d2(a) / p(a);
  }
  j(1, 0) = j(0, 1);
  const double crb = j.inverse().trace();
  CHECK(sldcrb(m) == doctest::Approx(crb).epsilon(1e-12));
  CHECK(hcrb(m).value == doctest::Approx(crb).epsilon(1e-7));
  CHECK(ncrb(m).value == doctest::Approx(crb).epsilon(1e-7));
  CHECK(nhcrb(m).value == doctest::Approx(crb).epsilon(1e-7));

  const RealVector bad = (RealVector(3) << 0.5, 0.5, 0.0).finished();
  CHECK_THROWS_AS(classical_diagonal(bad, {d1}), DomainError);
  const RealVector unnorm = (RealVector(3) << 0.5, 0.3, 0.4).finished();
  CHECK_THROWS_AS(classical_diagonal(unnorm, {d1}), DomainError);
  const RealVector traced = (RealVector(3) << 1, 0, 0).finished();
  CHECK_THROWS_AS(classical_diagonal(p, {traced}), DomainError);
  const RealVector short_dir = (RealVector(2) << 0.5, -0.5).finished();
  CHECK_THROWS_AS(classical_diagonal(p, {short_dir}), DomainError);
  CHECK_THROWS_AS(classical_diagonal(p, {}), DomainError);
}

TEST_CASE("catalog registry is consistent with the named constructors") {
  CHECK(catalog().size() == 5);
  CHECK(find_catalog_entry("no_such_model") == nullptr);

  for (const CatalogEntry& e : catalog()) {
    CAPTURE(e.name);
    CHECK(find_catalog_entry(e.name) == &e);
    const auto args = fallbacks(e);
    const auto m = e.make(args);
    CHECK(m.dim() >= 2);
    for (const auto& [bound, oracle] : e.oracles) {
      CAPTURE(bound);
      CHECK(std::isfinite(oracle(args)));
    }
  }

  const CatalogEntry* pd = find_catalog_entry("phase_diffusion");
  REQUIRE(pd != nullptr);
  const std::vector<double> at{kPi / 2, 0.0, 0.5};
  CHECK(pd->oracles.at("hcrb")(at) ==
        doctest::Approx(phase_diffusion_hcrb_oracle(kPi / 2, 0.5)));
  CHECK(pd->oracles.at("hcrb")(at) ==
        doctest::Approx(2 * std::exp(0.5) - 1).epsilon(1e-12));
  CHECK(pd->oracles.at("ncrb")(at) == doctest::Approx(4.365834).epsilon(1e-6));
  CHECK(pd->oracles.at("sld")(at) ==
        doctest::Approx(2 * std::exp(0.5) - 1).epsilon(1e-12));

  const CatalogEntry* cls = find_catalog_entry("classical_diagonal");
  REQUIRE(cls != nullptr);
  CHECK(cls->oracles.at("hcrb")({0.5, 0.3}) ==
        doctest::Approx(1.64).epsilon(1e-12));
}
