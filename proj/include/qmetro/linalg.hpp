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

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "qmetro/errors.hpp"

namespace qmetro {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Relative rank cutoff used uniformly across the library.
inline constexpr double kRankTol = 1e-10;

// Default cap on tensor-product dimensions.
inline constexpr int kDimCap = 4096;

// Hermitian matrix with the symmetrization A -> (A + A^dagger)/2 applied on
// construction. Entries must be finite.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(Matrix a);

  const Matrix& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

struct EigenDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // columns, orthonormal
};

struct HermitianBasis {
  int dim = 0;
  std::vector<Matrix> elements;  // d^2 orthonormal Hermitian matrices
};

// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
EigenDecomposition eigh(const Matrix& a);
EigenDecomposition eigh(const HermitianMatrix& a);

// Principal square root of a PSD matrix. Eigenvalues below rank_tol times the
// largest magnitude are clamped to zero; eigenvalues below -rank_tol times the
// largest magnitude raise NotPsdError.
Matrix matrix_sqrt_psd(const Matrix& a, double rank_tol = kRankTol);

// Trace norm. Hermitian input (detected within 1e-12) uses |eigenvalues|;
// general square input uses singular values.
double trabs(const Matrix& a);

// trabs(sqrt(S) A sqrt(S)) for PSD S and Hermitian A.
double sandwich_trabs(const Matrix& s, const Matrix& a, double rank_tol = kRankTol);

// Kronecker product, row cap on the result dimension.
Matrix kron(const Matrix& a, const Matrix& b, int dim_cap = kDimCap);

// M-fold tensor power A^{(x)M}.
Matrix tensor_power(const Matrix& a, int copies, int dim_cap = kDimCap);

// I^{(x)k} (x) A (x) I^{(x)(copies-1-k)}, slot k in [0, copies).
Matrix embed_at(const Matrix& a, int slot, int copies, int dim_cap = kDimCap);

// Decomposition A = P - N with P, N PSD and PN = 0.
std::pair<Matrix, Matrix> pos_neg_split(const Matrix& a);

// Orthonormal Hermitian basis of size d^2: I/sqrt(d), the generalized
// Gell-Mann off-diagonal pairs, then the diagonal ladder elements.
HermitianBasis hermitian_basis(int d);

}  // namespace qmetro
