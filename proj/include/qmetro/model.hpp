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
#include <string>
#include <vector>

#include "qmetro/linalg.hpp"

namespace qmetro {

// Eigenstructure of a density matrix with the support listed first.
struct SupportDecomposition {
  RealVector eigenvalues;  // descending
  Matrix basis;            // unitary, support columns first
  int rank = 0;
};

SupportDecomposition support_decomposition(const Matrix& s,
                                           double rank_tol = kRankTol);

// A finite-dimensional parametric density-matrix model at a fixed parameter
// point: the state S and one Hermitian traceless derivative per parameter.
//
// Construction symmetrizes all matrices and validates:
//   - S is PSD (NotPsdError) with unit trace (DomainError),
//   - derivatives are traceless and dimensionally consistent (DomainError),
//   - derivatives are linearly independent (ModelInconsistentError).
//
// A derivative component inside the kernel-kernel block of S is recorded
// (kernel_leak) rather than rejected; bound computations that cannot handle
// it raise ModelInconsistentError at their own call sites.
class StatisticalModel {
 public:
  StatisticalModel(Matrix state, std::vector<Matrix> derivs,
                   std::string label = "");

  int dim() const { return static_cast<int>(state_.rows()); }
  int params() const { return static_cast<int>(derivs_.size()); }
  int rank() const { return support_.rank; }
  bool full_rank() const { return support_.rank == dim(); }
  bool kernel_leak() const { return kernel_leak_; }

  const Matrix& state() const { return state_; }
  const std::vector<Matrix>& derivs() const { return derivs_; }
  const Matrix& deriv(int i) const;
  const std::string& label() const { return label_; }
  const SupportDecomposition& support() const { return support_; }

 private:
  Matrix state_;
  std::vector<Matrix> derivs_;
  std::string label_;
  SupportDecomposition support_;
  bool kernel_leak_ = false;
};

// Hermitian operator basis for estimator observables on a (possibly
// rank-deficient) state: the support-support block, the mixed
// support-kernel blocks and, when include_kernel_block is set, the
// kernel-kernel block. Elements are orthonormal under tr(AB) and given in
// the original (unrotated) basis. For a full-rank state this is the plain
// Hermitian basis of size d^2.
struct QuotientBasis {
  std::vector<Matrix> elements;
  int ss_count = 0;
  int sk_count = 0;
  int kk_count = 0;
};

QuotientBasis quotient_basis(const StatisticalModel& m,
                             bool include_kernel_block = false);

// Symmetric logarithmic derivatives: Hermitian L_i with
// (S L_i + L_i S)/2 = dS_i, kernel-kernel block zero. Raises
// ModelInconsistentError when a derivative leaks into the kernel-kernel
// block and NumericalError when the Lyapunov residual exceeds 1e-8.
std::vector<Matrix> sld_operators(const StatisticalModel& m);

// SLD Fisher information J_ij = tr(dS_i L_j), symmetrized. Raises
// SingularFisherError when J is numerically singular.
RealMatrix sld_fisher(const StatisticalModel& m);

// tr(W J^-1) for a PSD weight W (identity by default).
double sldcrb(const StatisticalModel& m);
double sldcrb(const StatisticalModel& m, const RealMatrix& w);

// The M-copy model: state S^(x)M, derivatives by the product rule.
StatisticalModel tensor_power_model(const StatisticalModel& m, int copies,
                                    int dim_cap = kDimCap);

// Linear reparameterization: derivatives dS'_i = sum_j t_ij dS_j for a
// nonsingular real matrix t.
StatisticalModel parameter_map(const StatisticalModel& m, const RealMatrix& t);

// Weight absorption: returns the model whose identity-weight bounds equal the
// w-weighted bounds of m (applies the w^(-1/2) Jacobian). w must be symmetric
// positive definite.
StatisticalModel reparameterize(const StatisticalModel& m, const RealMatrix& w);

// True when the state and all derivatives commute pairwise, so the model is
// a classical probability model in disguise.
bool is_quasiclassical(const StatisticalModel& m, double tol = 1e-10);

// Five-point central differences (error O(h^4)) of a matrix family, one
// derivative per parameter.
std::vector<Matrix> finite_difference_derivs(
    const std::function<Matrix(const RealVector&)>& family,
    const RealVector& theta0, double step);

}  // namespace qmetro
