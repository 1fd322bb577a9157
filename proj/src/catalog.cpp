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
#include "qmetro/catalog.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "qmetro/errors.hpp"

namespace qmetro {

namespace {

// Both branch expressions agree where the branch function changes sign, so
// near the boundary either is valid; averaging avoids an arbitrary tie-break.
constexpr double kBranchTol = 1e-10;

void check_angle(double lambda) {
  if (std::abs(std::sin(lambda)) < 1e-9)
    throw DomainError(
        "phase_diffusion: lambda must stay away from multiples of pi");
}

double sin2(double lambda) {
  const double sl = std::sin(lambda);
  return sl * sl;
}

}  // namespace

StatisticalModel phase_diffusion(double lambda, double phi, double delta) {
  check_angle(lambda);
  if (delta <= 0.0)
    throw DomainError("phase_diffusion: delta must be positive");
  const double cl = std::cos(lambda);
  const double cs = 0.5 * std::sin(lambda);
  const double eta = std::exp(-delta * delta);
  const Complex ph = std::exp(Complex(0, -phi));
  Matrix s(2, 2), dphi(2, 2), ddelta(2, 2);
  s << 0.5 * (1 + cl), cs * eta * ph, cs * eta * std::conj(ph), 0.5 * (1 - cl);
  dphi << 0, Complex(0, -1) * cs * eta * ph,
      Complex(0, 1) * cs * eta * std::conj(ph), 0;
  ddelta << 0, -2 * delta * cs * eta * ph,
      -2 * delta * cs * eta * std::conj(ph), 0;
  return StatisticalModel(s, {dphi, ddelta}, "phase_diffusion");
}

StatisticalModel phase_diffusion_reparam_tilde(double lambda, double phi,
                                               double delta_tilde) {
  check_angle(lambda);
  if (delta_tilde < 0.0)
    throw DomainError(
        "phase_diffusion_reparam_tilde: delta_tilde must be nonnegative");
  const double cl = std::cos(lambda);
  const double cs = 0.5 * std::sin(lambda);
  const double eta = std::exp(-delta_tilde);
  const Complex ph = std::exp(Complex(0, -phi));
  Matrix s(2, 2), dphi(2, 2), dtilde(2, 2);
  s << 0.5 * (1 + cl), cs * eta * ph, cs * eta * std::conj(ph), 0.5 * (1 - cl);
  dphi << 0, Complex(0, -1) * cs * eta * ph,
      Complex(0, 1) * cs * eta * std::conj(ph), 0;
  dtilde << 0, -cs * eta * ph, -cs * eta * std::conj(ph), 0;
  return StatisticalModel(s, {dphi, dtilde}, "phase_diffusion_tilde");
}

double phase_diffusion_sldcrb_oracle(double lambda, double delta) {
  check_angle(lambda);
  if (delta <= 0.0)
    throw DomainError("phase_diffusion: delta must be positive");
  const double x = 2 * delta * delta;
  return (std::exp(x) + std::expm1(x) / (2 * x)) / sin2(lambda);
}

double phase_diffusion_hcrb_oracle(double lambda, double delta) {
  check_angle(lambda);
  if (delta <= 0.0)
    throw DomainError("phase_diffusion: delta must be positive");
  const double x = 2 * delta * delta;
  const double ac = std::abs(std::cos(lambda));
  const double s2 = sin2(lambda);
  const double beta = 1 - std::expm1(x) * ac / (2 * delta);
  const double rld =
      std::expm1(x) * (1 + 2 * x + 4 * delta * ac) / (2 * x * s2);
  const double e1 = std::expm1(x);
  const double mixed =
      (std::exp(2 * x) - 1 + 4 * x * std::exp(x) + std::cos(2 * lambda) * e1 * e1) /
      (4 * x * s2);
  if (beta <= -kBranchTol) return rld;
  if (beta >= kBranchTol) return mixed;
  return 0.5 * (rld + mixed);
}

double phase_diffusion_ncrb_oracle(double lambda, double delta) {
  check_angle(lambda);
  if (delta <= 0.0)
    throw DomainError("phase_diffusion: delta must be positive");
  const double x = 2 * delta * delta;
  const double q = -std::expm1(-x);  // 1 - exp(-2 delta^2)
  return std::exp(x) * (1 + q / (2 * x) + std::sqrt(q) / delta) / sin2(lambda);
}

PhaseDiffusionLogDerivs phase_diffusion_sld_rld_oracle(double lambda,
                                                       double delta) {
  check_angle(lambda);
  if (delta <= 0.0)
    throw DomainError("phase_diffusion: delta must be positive");
  const double dd = delta * delta;
  const double sl = std::sin(lambda), cl = std::cos(lambda);
  const double eta = std::exp(-dd);
  const double cothm1 = 2.0 / std::expm1(2 * dd);  // coth(delta^2) - 1
  const double csch = 1.0 / std::sinh(dd);
  const double q12 = csch * (1 - cl) / sl;  // csch(delta^2) tan(lambda/2)
  const double q21 = csch * (1 + cl) / sl;  // csch(delta^2) cot(lambda/2)

  PhaseDiffusionLogDerivs out;
  out.sld_phi = Matrix::Zero(2, 2);
  out.sld_phi(0, 1) = Complex(0, -eta * sl);
  out.sld_phi(1, 0) = Complex(0, eta * sl);

  out.sld_delta = Matrix::Zero(2, 2);
  out.sld_delta(0, 0) = delta * (1 - cl) * cothm1;
  out.sld_delta(0, 1) = -delta * csch * sl;
  out.sld_delta(1, 0) = -delta * csch * sl;
  out.sld_delta(1, 1) = delta * (1 + cl) * cothm1;

  out.rld_phi = Matrix::Zero(2, 2);
  out.rld_phi(0, 0) = Complex(0, -0.5 * cothm1);
  out.rld_phi(0, 1) = Complex(0, -0.5 * q12);
  out.rld_phi(1, 0) = Complex(0, 0.5 * q21);
  out.rld_phi(1, 1) = Complex(0, 0.5 * cothm1);

  out.rld_delta = Matrix::Zero(2, 2);
  out.rld_delta(0, 0) = delta * cothm1;
  out.rld_delta(0, 1) = -delta * q12;
  out.rld_delta(1, 0) = -delta * q21;
  out.rld_delta(1, 1) = delta * cothm1;
  return out;
}

StatisticalModel qubit_sz(double s_z) {
  if (s_z == 0.0 || std::abs(s_z) >= 1.0)
    throw DomainError("qubit_sz: need 0 < |s_z| < 1");
  Matrix s(2, 2), dx(2, 2), dy(2, 2);
  s << 0.5 * (1 + s_z), 0, 0, 0.5 * (1 - s_z);
  dx << 0, 0.5, 0.5, 0;
  dy << 0, Complex(0, -0.5), Complex(0, 0.5), 0;
  return StatisticalModel(s, {dx, dy}, "qubit_sz");
}

double qubit_sz_hcrb_oracle(double s_z) {
  if (s_z == 0.0 || std::abs(s_z) >= 1.0)
    throw DomainError("qubit_sz: need 0 < |s_z| < 1");
  return 2 + 2 * std::abs(s_z);
}

StatisticalModel bell_phase_damping(double eps) {
  if (eps < 0.0 || eps >= 1.0)
    throw DomainError("bell_phase_damping: need eps in [0, 1)");
  Matrix rho = Matrix::Zero(4, 4);
  rho(1, 1) = rho(1, 2) = rho(2, 1) = rho(2, 2) = 0.5;

  // Phase damping acts on both qubits of the entangled resource; the
  // rotations about the first qubit's Bloch axes act on the damped state.
  // This placement is the one that reproduces the closed forms below (the
  // permanent validation lives in the catalog tests).
  const Matrix id2 = Matrix::Identity(2, 2);
  Matrix k1q(2, 2), k2q(2, 2);
  k1q << 1, 0, 0, std::sqrt(1 - eps);
  k2q << 0, 0, 0, std::sqrt(eps);
  Matrix s = rho;
  for (const auto& [a, b] :
       {std::pair{kron(k1q, id2), kron(k2q, id2)},
        std::pair{kron(id2, k1q), kron(id2, k2q)}}) {
    s = (a * s * a.adjoint() + b * s * b.adjoint()).eval();
  }

  Matrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  std::vector<Matrix> derivs;
  for (const Matrix& sig : {sx, sy, sz}) {
    const Matrix gen = kron(sig, id2);
    derivs.push_back(Complex(0, -0.5) * (gen * s - s * gen));
  }
  return StatisticalModel(std::move(s), std::move(derivs),
                          "bell_phase_damping");
}

double bell_phase_damping_hcrb_oracle(double eps) {
  if (eps < 0.0 || eps >= 1.0)
    throw DomainError("bell_phase_damping: need eps in [0, 1)");
  return 2 + 1 / ((1 - eps) * (1 - eps));
}

double bell_phase_damping_nhcrb_oracle(double eps) {
  if (eps < 0.0 || eps >= 1.0)
    throw DomainError("bell_phase_damping: need eps in [0, 1)");
  return 4 / (2 - eps) + 1 / ((1 - eps) * (1 - eps));
}

StatisticalModel classical_diagonal(
    const RealVector& p, const std::vector<RealVector>& directions) {
  const int d = static_cast<int>(p.size());
  if (d < 2) throw DomainError("classical_diagonal: need at least two outcomes");
  if (p.minCoeff() <= 0.0)
    throw DomainError("classical_diagonal: probabilities must be positive");
  if (std::abs(p.sum() - 1.0) > 1e-12)
    throw DomainError("classical_diagonal: probabilities must sum to one");
  if (directions.empty())
    throw DomainError("classical_diagonal: need at least one direction");
  Matrix s = Matrix::Zero(d, d);
  s.diagonal() = p.cast<Complex>();
  std::vector<Matrix> derivs;
  for (const RealVector& dir : directions) {
    if (dir.size() != d)
      throw DomainError("classical_diagonal: direction length mismatch");
    if (std::abs(dir.sum()) > 1e-12)
      throw DomainError("classical_diagonal: directions must be traceless");
    Matrix m = Matrix::Zero(d, d);
    m.diagonal() = dir.cast<Complex>();
    derivs.push_back(std::move(m));
  }
  return StatisticalModel(s, std::move(derivs), "classical_diagonal");
}

namespace {

// Classical Cramer-Rao value of the fixed d = 3 registry entry.
double trinomial_crb(double p1, double p2) {
  const RealVector d1 = (RealVector(3) << 0.5, -0.5, 0).finished();
  const RealVector d2 = (RealVector(3) << 0, 0.5, -0.5).finished();
  const RealVector p = (RealVector(3) << p1, p2, 1 - p1 - p2).finished();
  if (p.minCoeff() <= 0.0)
    throw DomainError("classical_diagonal: probabilities must be positive");
  RealMatrix j = RealMatrix::Zero(2, 2);
  for (int a = 0; a < 3; ++a) {
    j(0, 0) += d1(a) * d1(a) / p(a);
    j(0, 1) += d1(a) * d2(a) / p(a);
    j(1, 1) += d2(a) * d2(a) / p(a);
  }
  j(1, 0) = j(0, 1);
  return j.inverse().trace();
}

std::vector<CatalogEntry> build_catalog() {
  const double half_pi = std::numbers::pi / 2;
  std::vector<CatalogEntry> entries;

  CatalogEntry pd;
  pd.name = "phase_diffusion";
  pd.summary =
      "qubit phase shift and phase diffusion at a fixed interrogation angle";
  pd.params = {{"lambda", half_pi, "away from multiples of pi"},
               {"phi", 0.0, "any real"},
               {"delta", 0.5, "> 0"}};
  pd.make = [](const std::vector<double>& v) {
    return phase_diffusion(v[0], v[1], v[2]);
  };
  pd.oracles["sld"] = [](const std::vector<double>& v) {
    return phase_diffusion_sldcrb_oracle(v[0], v[2]);
  };
  pd.oracles["hcrb"] = [](const std::vector<double>& v) {
    return phase_diffusion_hcrb_oracle(v[0], v[2]);
  };
  pd.oracles["ncrb"] = [](const std::vector<double>& v) {
    return phase_diffusion_ncrb_oracle(v[0], v[2]);
  };
  pd.oracles["nhcrb"] = pd.oracles["ncrb"];
  entries.push_back(std::move(pd));

  CatalogEntry tilde;
  tilde.name = "phase_diffusion_tilde";
  tilde.summary =
      "diffusion-variance parameterization, regular at zero diffusion";
  tilde.params = {{"lambda", half_pi, "away from multiples of pi"},
                  {"phi", 0.0, "any real"},
                  {"delta_tilde", 0.25, ">= 0"}};
  tilde.make = [](const std::vector<double>& v) {
    return phase_diffusion_reparam_tilde(v[0], v[1], v[2]);
  };
  entries.push_back(std::move(tilde));

  CatalogEntry qs;
  qs.name = "qubit_sz";
  qs.summary = "transverse Bloch components of a qubit with known z "
               "polarization";
  qs.params = {{"sz", 0.5, "0 < |sz| < 1"}};
  qs.make = [](const std::vector<double>& v) { return qubit_sz(v[0]); };
  qs.oracles["sld"] = [](const std::vector<double>&) { return 2.0; };
  qs.oracles["hcrb"] = [](const std::vector<double>& v) {
    return qubit_sz_hcrb_oracle(v[0]);
  };
  qs.oracles["ncrb"] = [](const std::vector<double>&) { return 4.0; };
  qs.oracles["nhcrb"] = qs.oracles["ncrb"];
  entries.push_back(std::move(qs));

  CatalogEntry bell;
  bell.name = "bell_phase_damping";
  bell.summary =
      "entangled pair with local rotations under one-sided phase damping";
  bell.params = {{"epsilon", 0.5, "[0, 1)"}};
  bell.make = [](const std::vector<double>& v) {
    return bell_phase_damping(v[0]);
  };
  bell.oracles["sld"] = [](const std::vector<double>& v) {
    return bell_phase_damping_hcrb_oracle(v[0]);
  };
  bell.oracles["hcrb"] = bell.oracles["sld"];
  bell.oracles["nhcrb"] = [](const std::vector<double>& v) {
    return bell_phase_damping_nhcrb_oracle(v[0]);
  };
  entries.push_back(std::move(bell));

  CatalogEntry cls;
  cls.name = "classical_diagonal";
  cls.summary =
      "commuting three-outcome model; every bound is the classical one";
  cls.params = {{"p1", 0.5, "(0, 1), p1 + p2 < 1"},
                {"p2", 0.3, "(0, 1), p1 + p2 < 1"}};
  cls.make = [](const std::vector<double>& v) {
    const RealVector p =
        (RealVector(3) << v[0], v[1], 1 - v[0] - v[1]).finished();
    const RealVector d1 = (RealVector(3) << 0.5, -0.5, 0).finished();
    const RealVector d2 = (RealVector(3) << 0, 0.5, -0.5).finished();
    return classical_diagonal(p, {d1, d2});
  };
  const auto crb = [](const std::vector<double>& v) {
    return trinomial_crb(v[0], v[1]);
  };
  cls.oracles["sld"] = crb;
  cls.oracles["hcrb"] = crb;
  cls.oracles["ncrb"] = crb;
  cls.oracles["nhcrb"] = crb;
  entries.push_back(std::move(cls));

  return entries;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

const CatalogEntry* find_catalog_entry(const std::string& name) {
  for (const CatalogEntry& e : catalog())
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace qmetro
