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
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qmetro/model.hpp"

namespace qmetro {

// Built-in models with closed-form reference values where known. The named
// constructors validate their parameter domains (DomainError); the registry
// at the bottom exposes the same models to the CLI by name.

// Qubit probe prepared at a fixed interrogation angle lambda, carrying a
// phase shift phi and phase diffusion of strength delta; the estimated
// parameters are (phi, delta). The diffusion damps the coherence by
// exp(-delta^2). Requires sin(lambda) != 0 and delta > 0.
StatisticalModel phase_diffusion(double lambda, double phi, double delta);

// The same probe in the diffusion-variance parameterization
// delta_tilde = delta^2. The delta_tilde derivative stays finite as
// delta_tilde -> 0, where the state becomes pure; delta_tilde = 0 is
// allowed.
StatisticalModel phase_diffusion_reparam_tilde(double lambda, double phi,
                                               double delta_tilde);

// Closed forms for the phase-diffusion probe (phi-independent).
double phase_diffusion_sldcrb_oracle(double lambda, double delta);
double phase_diffusion_hcrb_oracle(double lambda, double delta);
double phase_diffusion_ncrb_oracle(double lambda, double delta);

// Logarithmic derivative operators of the phase-diffusion probe at phi = 0.
// The SLDs solve (S L_i + L_i S)/2 = S_i; the right logarithmic derivatives
// solve S_i = S R_i and are not Hermitian.
struct PhaseDiffusionLogDerivs {
  Matrix sld_phi;
  Matrix sld_delta;
  Matrix rld_phi;
  Matrix rld_delta;
};
PhaseDiffusionLogDerivs phase_diffusion_sld_rld_oracle(double lambda,
                                                       double delta);

// Qubit with known z polarization s_z; the parameters are the transverse
// Bloch components, evaluated at zero. Requires 0 < |s_z| < 1.
StatisticalModel qubit_sz(double s_z);
double qubit_sz_hcrb_oracle(double s_z);  // 2 + 2|s_z|

// Maximally entangled pair (|01> + |10>)/sqrt(2) whose first qubit carries
// three infinitesimal rotations (the parameters) and then passes through a
// phase-damping channel of strength eps in [0, 1).
StatisticalModel bell_phase_damping(double eps);
double bell_phase_damping_hcrb_oracle(double eps);  // equals the sldcrb
double bell_phase_damping_nhcrb_oracle(double eps);

// Commuting model: diagonal state with probabilities p (strictly positive,
// summing to one) and diagonal traceless derivative directions, one per
// parameter. All bounds coincide with the classical Cramer-Rao value.
StatisticalModel classical_diagonal(const RealVector& p,
                                    const std::vector<RealVector>& directions);

struct CatalogParam {
  std::string name;
  double fallback = 0.0;  // used when the caller does not set the parameter
  std::string domain;     // human-readable constraint
};

struct CatalogEntry {
  std::string name;
  std::string summary;
  std::vector<CatalogParam> params;
  // Arguments in params order; out-of-domain values raise DomainError.
  std::function<StatisticalModel(const std::vector<double>&)> make;
  // Closed forms keyed by bound name ("sld", "hcrb", "ncrb", "nhcrb"),
  // present only where an analytic value is known; same argument convention
  // as make.
  std::map<std::string, std::function<double(const std::vector<double>&)>>
      oracles;
};

const std::vector<CatalogEntry>& catalog();

// nullptr when no entry has that name.
const CatalogEntry* find_catalog_entry(const std::string& name);

}  // namespace qmetro
