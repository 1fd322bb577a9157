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
#include <string>
#include <vector>

#include "qmetro/linalg.hpp"

namespace qmetro {

// Conic programs in block form:
//
//   minimize    c . x
//   subject to  A x = b,   x in  Free(n_1) x ... x Psd(d_1) x ... ,
//
// where each PSD block contributes an orthonormal vectorization of a real
// symmetric or complex Hermitian matrix to the coordinate vector x.

enum class BlockField { RealSymmetric, ComplexHermitian };

struct ConeBlock {
  enum class Kind { Free, Psd };
  Kind kind = Kind::Free;
  int dim = 0;  // Free: coordinate count; Psd: matrix dimension
  BlockField field = BlockField::ComplexHermitian;

  int vec_dim() const;
};

ConeBlock free_block(int n);
ConeBlock psd_block(int d, BlockField field = BlockField::ComplexHermitian);

// Solver-native cone description for a d-dimensional complex Hermitian PSD
// constraint. The solver works on the Hermitian cone directly; the real
// 2d-dimensional embedding [[Re A, -Im A],[Im A, Re A]] is available through
// real_embedding() for cross-checks.
ConeBlock embed_hermitian_cone(int d);
RealMatrix real_embedding(const Matrix& a);

// Coordinate layout of a PSD block. Columns are walked left to right, rows
// top to bottom within the upper triangle. A diagonal entry contributes one
// coordinate A(r,r); an off-diagonal entry contributes sqrt(2) Re A(r,c) and,
// for complex blocks, sqrt(2) Im A(r,c). The layout makes the Euclidean dot
// of two coordinate vectors equal tr(A B).
class SvecLayout {
 public:
  SvecLayout(int d, BlockField field);

  int matdim() const { return d_; }
  int dim() const;
  int diag(int r) const;
  int re(int r, int c) const;  // requires r < c
  int im(int r, int c) const;  // requires r < c and a complex block

  RealVector vec(const Matrix& m) const;
  Matrix unvec(const RealVector& v) const;
  Matrix unvec(const double* v) const;

 private:
  int d_;
  BlockField field_;
};

struct SparseRow {
  std::vector<int> cols;
  std::vector<double> vals;
};

struct ConicProgram {
  std::vector<ConeBlock> blocks;
  RealVector c;
  std::vector<SparseRow> rows;  // A, one sparse row per equality
  RealVector b;

  int total_dim() const;
  int block_offset(int k) const;
  void validate() const;  // throws DomainError on structural problems
};

struct SolverSettings {
  double gap_tol = 1e-9;
  double feas_tol = 1e-9;
  int max_iter = 200;
  double step_frac = 0.98;    // fraction-to-boundary
  double init_scale = 1.0;    // s = z = init_scale * I
  std::uint64_t init_perturb_seed = 0;  // 0: exact central-ray start
  bool presolve = true;
  bool verbose = false;
};

enum class SolveStatus { Optimal, MaxIter, Infeasible, NumericalFailure };
const char* to_string(SolveStatus s);

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  RealVector x;  // all block coordinates
  RealVector y;  // one multiplier per equality row
  RealVector z;  // dual cone coordinates, zero on Free blocks
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;      // complementarity <s, z>
  double rel_gap = 0.0;  // gap / max(1, |primal_obj|)
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::string message;
};

// Primal-dual interior-point solve: Nesterov-Todd scaling, Mehrotra
// predictor-corrector, dense symmetric-indefinite KKT systems with one step
// of iterative refinement. Equality rows whose pivot coordinate appears in no
// other row are eliminated by the presolve; the remaining rows pass through a
// rank-revealing filter (tolerance 1e-10). Primal infeasibility is detected
// through a Farkas certificate and reported as Infeasible; an unbounded
// primal (dual infeasible) reports NumericalFailure with a message saying so.
// Deterministic: identical inputs and settings produce identical iterates.
ConicSolution solve(const ConicProgram& p, const SolverSettings& settings = {});

}  // namespace qmetro
