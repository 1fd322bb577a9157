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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmetro/bounds.hpp"
#include "qmetro/linalg.hpp"
#include "qmetro/model.hpp"

namespace qmetro {

// Lift single-copy estimators to the M-copy model: each observable becomes
// the average of its single-slot embeddings, X_{i,M} = (1/M) sum_k
// I (x) ... (x) X_i (x) ... (x) I. Preserves local unbiasedness on the
// tensor-power model and divides the Holevo, Nagaoka and SLD functions by M.
EstimatorSet mcopy_estimators(const EstimatorSet& xs, int copies,
                              int dim_cap = kDimCap);

// Incompatibility matrix of a two-parameter estimator pair,
// A(X) = i sqrt(S) [X, Y] sqrt(S). Hermitian; its positive and negative
// parts control the Nagaoka-vs-Holevo excess. Raises WrongArityError unless
// the model and the estimator set both carry exactly two parameters.
Matrix a_matrix(const StatisticalModel& m, const EstimatorSet& xs);

// The exact equality criterion for the two functions at fixed estimators:
// F_N(X) - F_H(X) = 2 min(tr A+, tr A-), so they coincide precisely when
// one of the signed parts of A(X) has zero trace.
struct EqualityCondition {
  bool equal = false;
  double tr_plus = 0.0;
  double tr_minus = 0.0;
};
EqualityCondition equality_condition(const StatisticalModel& m,
                                     const EstimatorSet& xs,
                                     double tol = 1e-8);

// Frobenius residual of the two-copy factorization
// A(X_2) = (A(X) (x) S + S (x) A(X)) / 4 under the averaged lift.
// Zero to numerical precision for every model and estimator pair.
double two_copy_a_decomposition_check(const StatisticalModel& m,
                                      const EstimatorSet& xs,
                                      int dim_cap = kDimCap);

// Bound pairs whose difference the gap experiments track.
enum class BoundPair { NcrbHcrb, NhcrbSldcrb, NhcrbHcrb, HcrbSldcrb };
const char* to_string(BoundPair pair);

enum class GapVerdict { Persists, Closes, BelowTolerance };
const char* to_string(GapVerdict verdict);

// One row of a gap report: both bound values on the M-copy model, their
// difference, and the M-rescaled values that are comparable across M.
struct GapPoint {
  int copies = 1;
  double first = 0.0;
  double second = 0.0;
  double delta = 0.0;         // first - second
  double scaled_first = 0.0;  // copies * first
  double scaled_second = 0.0;
  SolveStatus first_status = SolveStatus::Optimal;
  SolveStatus second_status = SolveStatus::Optimal;
  bool usable = true;
  std::string note;  // failure description when not usable
};

struct GapReport {
  BoundPair pair = BoundPair::NcrbHcrb;
  std::string first;   // name of the larger bound of the pair
  std::string second;  // name of the smaller bound
  std::string model;
  double threshold = 1e-6;
  std::vector<GapPoint> points;
  GapVerdict verdict = GapVerdict::BelowTolerance;
};

// Evaluates both bounds of the pair on the M-copy models for every M in
// copies_list and classifies the gap: Persists when the base gap and every
// later gap exceed the threshold, Closes when the base gap exceeds it but
// some later gap does not, BelowTolerance when already the base gap is
// within it. Solver trouble at one M is recorded in that point and skipped
// by the verdict; only a report with no usable point at all raises
// NumericalError.
GapReport gap_report(const StatisticalModel& m, BoundPair pair,
                     const std::vector<int>& copies_list,
                     const SolverSettings& settings = {});

// Closed-form lower bound on the M-copy Nagaoka function at lifted
// estimators:
//   B_M = tr{S (X^2 + Y^2)}/M + d^(M-1) / (M^2 ||S^-1||_*^M) ||[X, Y]||_*.
// No tensor power is ever built, so M in the hundreds is fine. Requires a
// full-rank state (SingularStateError) and two parameters (WrongArityError).
double bm_lower_bound(const StatisticalModel& m, const EstimatorSet& xs,
                      int copies);

// B_M - reference/M without forming the near-equal sum.  The commutator
// term decays like (d / ||S^-1||_*)^M and falls below one ulp of the
// leading term within a few dozen copies; subtracting first and adding the
// commutator term last keeps the sign of the margin meaningful at any M.
double bm_lower_bound_excess(const StatisticalModel& m, const EstimatorSet& xs,
                             int copies, double reference);

// trAbs{S^(x)M sum_i sigma_z^(i)} for the qubit state diag((1+s_z)/2,
// (1-s_z)/2), by the binomial sum 2 sum_j C(M,j) |M/2 - j| p^j q^(M-j).
// Per copy the sum approaches |s_z| from above as M grows.
double trabs_sz_sum(double s_z, int copies);

// The attainable M-copy Nagaoka value at lifted optimal estimators for the
// s_z model: 2/M + (2/M^2) trabs_sz_sum. M times this decreases toward the
// single-copy Holevo bound 2 + 2|s_z|.
double sz_ncrb_upper(double s_z, int copies);

// Seeded random-model ensemble: states G G^dag / tr with G a dim x rank
// complex Gaussian matrix, derivatives independent Gaussian Hermitian
// traceless matrices with the kernel-kernel block projected out. Trials are
// seeded individually from (seed, trial), so any subset reproduces exactly.
struct RandomModelSpec {
  int dim = 2;
  int rank = 2;
  int params = 2;
  int trials = 1;
  std::uint64_t seed = 0;
};

std::vector<StatisticalModel> random_model(const RandomModelSpec& spec);
StatisticalModel random_model_trial(const RandomModelSpec& spec, int trial);

// One trial of the two-copy persistence experiment: half the single-copy
// NHCRB-vs-HCRB gap against the full two-copy gap.
struct ScatterRow {
  int trial = 0;
  int dim = 0;
  int rank = 0;
  int params = 0;
  double gap1_half = 0.0;
  double gap2 = 0.0;
  SolveStatus status1 = SolveStatus::Optimal;
  SolveStatus status2 = SolveStatus::Optimal;
};

// Runs the experiment over an explicit model list or a random ensemble.
// Rows report, they never assert: a trial whose solves fail is dropped
// (partial tables allowed), everything else is kept verbatim.
std::vector<ScatterRow> persistence_scatter(
    const std::vector<StatisticalModel>& models, int copies = 2,
    const SolverSettings& settings = {});
std::vector<ScatterRow> persistence_scatter(const RandomModelSpec& spec,
                                            int copies = 2,
                                            const SolverSettings& settings = {});

// One row of the experiment, empty when a solve fails. The batch function is
// a loop over this, so a sharded caller reproduces its table row for row.
std::optional<ScatterRow> persistence_scatter_trial(
    const StatisticalModel& m, int trial, int copies = 2,
    const SolverSettings& settings = {});

// One trial of the single-copy NCRB-vs-HCRB ratio experiment;
// rel_gap = (ncrb - hcrb) / hcrb, inside (0, 1] for full-rank models.
struct RandomGapRow {
  int trial = 0;
  int dim = 0;
  double ncrb = 0.0;
  double hcrb = 0.0;
  double rel_gap = 0.0;
  SolveStatus status = SolveStatus::Optimal;
};

std::vector<RandomGapRow> random_gap_study(const RandomModelSpec& spec,
                                           const SolverSettings& settings = {});

// One row of the study, empty when a solve fails; same sharding contract as
// persistence_scatter_trial.
std::optional<RandomGapRow> random_gap_trial(const RandomModelSpec& spec,
                                             int trial,
                                             const SolverSettings& settings = {});

}  // namespace qmetro
