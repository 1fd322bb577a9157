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

#include <string>
#include <utility>
#include <vector>

#include "qmetro/conic.hpp"
#include "qmetro/linalg.hpp"
#include "qmetro/model.hpp"

namespace qmetro {

// One Hermitian estimator observable per parameter.
struct EstimatorSet {
  std::vector<Matrix> x;

  int params() const { return static_cast<int>(x.size()); }
  int dim() const { return x.empty() ? 0 : static_cast<int>(x.front().rows()); }
};

// Largest violation of the locally-unbiased conditions
// tr(S X_i) = 0 and tr(dS_j X_i) = delta_ij.
double unbiasedness_residual(const StatisticalModel& m, const EstimatorSet& xs);

// Gram matrix Z_ij = tr(S X_j X_i): PSD, Re Z symmetric, Im Z antisymmetric.
Matrix z_matrix(const StatisticalModel& m, const EstimatorSet& xs);

// tr(W Re Z) + trabs(sqrt(W) Im Z sqrt(W)). For two parameters and W = I this
// is tr{S(X^2 + Y^2)} + |tr A| with A = i sqrt(S) [X,Y] sqrt(S).
double holevo_function(const StatisticalModel& m, const EstimatorSet& xs,
                       const RealMatrix& w);
double holevo_function(const StatisticalModel& m, const EstimatorSet& xs);

// Two parameters only: tr{S(X^2 + Y^2)} + trabs(sqrt(S) i[X,Y] sqrt(S)),
// replacing |tr A| with the full trace norm of A. Never below the Holevo
// function. Raises WrongArityError otherwise.
double nagaoka_function(const StatisticalModel& m, const EstimatorSet& xs);

// sum_i tr(S X_i^2) = tr(Re Z).
double sld_function(const StatisticalModel& m, const EstimatorSet& xs);

// Outcome of one bound computation. The optimizer is assembled from the
// solver coordinates over the estimator basis and re-symmetrized; its
// residual of the locally-unbiased conditions is reported in unbiasedness.
struct BoundResult {
  std::string bound;
  double value = 0.0;
  int copies = 1;
  double gap = 0.0;  // solver duality gap; 0 for closed forms
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
  EstimatorSet optimizer;
  double unbiasedness = 0.0;
};

// SLDCRB tr(W J^-1) packaged with its attaining estimators
// X_i = sum_j (J^-1)_ji L_j.
BoundResult sld_bound(const StatisticalModel& m);
BoundResult sld_bound(const StatisticalModel& m, const RealMatrix& w);

// Holevo bound: minimizes tr(W V) over real symmetric V and estimator
// coordinates subject to local unbiasedness and [[V, F*],[F, I]] >= 0 with
// F stacking the support rows of sqrt(S) X_i, so that Z = F* F.
BoundResult hcrb(const StatisticalModel& m, const RealMatrix& w,
                 const SolverSettings& settings = {});
BoundResult hcrb(const StatisticalModel& m);

// Nagaoka bound, two parameters: minimizes tr T11 + tr T22 + tr(P + Q) over
// the Gram lift [[T, L],[L*, I]] with L = [sqrt(S) X; sqrt(S) Y] and PSD
// support blocks P - Q = i(T12 - T21). At the optimum T is the Gram matrix
// of the lift and the program value equals the Nagaoka function. A weight
// matrix is absorbed by reparameterize(); the optimizer then belongs to the
// reparameterized model. Raises WrongArityError for n != 2.
BoundResult ncrb(const StatisticalModel& m, const SolverSettings& settings = {});
BoundResult ncrb(const StatisticalModel& m, const RealMatrix& w,
                 const SolverSettings& settings = {});

// Nagaoka-Hayashi bound, any n >= 2: minimizes Tr{W (x) S . LL} over
// block-symmetric LL (Hermitian d x d blocks, LL_ij = LL_ji) and locally
// unbiased X with [[LL, Xhat],[Xhat*, I_d]] >= 0, Xhat stacking the X_i.
BoundResult nhcrb(const StatisticalModel& m, const RealMatrix& w,
                  const SolverSettings& settings = {});
BoundResult nhcrb(const StatisticalModel& m);

// Inner Nagaoka-Hayashi problem at fixed estimators: the minimum over LL
// alone. nh_split returns (tr{W Re Z}, A-) where A- is the minimum of
// Tr{V} over block-symmetric V dominating the antisymmetrized, state-
// sandwiched commutator block matrix; the parts sum to nh_function.
double nh_function(const StatisticalModel& m, const EstimatorSet& xs,
                   const RealMatrix& w, const SolverSettings& settings = {});
std::pair<double, double> nh_split(const StatisticalModel& m,
                                   const EstimatorSet& xs, const RealMatrix& w,
                                   const SolverSettings& settings = {});

// Qubit two-parameter closed form (tr J^-1/2)^2. Raises WrongArityError for
// n != 2 and DomainError for d != 2.
double gill_massar_ncrb(const StatisticalModel& m);

// Measurement MSE matrix V_ij = sum_k e_i(k) e_j(k) tr(S Pi_k) for a POVM
// {Pi_k} with per-outcome estimate deviations e(k) (the true parameter sits
// at zero). Completeness and positivity of the POVM are enforced; local
// unbiasedness of the pair is only measured, written to *unbiasedness when
// given.
RealMatrix mse_matrix(const std::vector<Matrix>& povm,
                      const std::vector<RealVector>& estimates,
                      const StatisticalModel& m,
                      double* unbiasedness = nullptr);

}  // namespace qmetro
