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
#include "qmetro/linalg.hpp"

#include <cmath>
#include <sstream>

namespace qmetro {

namespace {

void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << who << ": expected a nonempty square matrix, got " << a.rows() << "x" << a.cols();
    throw DomainError(os.str());
  }
}

bool is_hermitian(const Matrix& a, double tol) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

HermitianMatrix::HermitianMatrix(Matrix a) {
  require_square(a, "HermitianMatrix");
  if (!a.allFinite()) throw DomainError("HermitianMatrix: non-finite entries");
  m_ = 0.5 * (a + a.adjoint().eval());
}

EigenDecomposition eigh(const Matrix& a) {
  require_square(a, "eigh");
  Matrix h = 0.5 * (a + a.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigh: eigensolver failed on a " << a.rows() << "x" << a.cols()
       << " matrix (max |entry| = " << h.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(os.str());
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenDecomposition eigh(const HermitianMatrix& a) { return eigh(a.mat()); }

Matrix matrix_sqrt_psd(const Matrix& a, double rank_tol) {
  EigenDecomposition ed = eigh(a);
  const double scale = ed.eigenvalues.cwiseAbs().maxCoeff();
  RealVector lam = ed.eigenvalues;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] < -rank_tol * scale) {
      std::ostringstream os;
      os << "matrix_sqrt_psd: negative eigenvalue " << lam[i] << " (scale " << scale << ")";
      throw NotPsdError(os.str());
    }
    lam[i] = lam[i] > rank_tol * scale ? std::sqrt(lam[i]) : 0.0;
  }
  return ed.eigenvectors * lam.asDiagonal() * ed.eigenvectors.adjoint();
}

double trabs(const Matrix& a) {
  require_square(a, "trabs");
  const double scale = a.cwiseAbs().maxCoeff();
  if (is_hermitian(a, 1e-12 * (1.0 + scale))) {
    return eigh(a).eigenvalues.cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

double sandwich_trabs(const Matrix& s, const Matrix& a, double rank_tol) {
  require_square(a, "sandwich_trabs");
  if (s.rows() != a.rows()) throw DomainError("sandwich_trabs: dimension mismatch");
  Matrix r = matrix_sqrt_psd(s, rank_tol);
  Matrix sandwiched = r * a * r;
  return trabs(0.5 * (sandwiched + sandwiched.adjoint().eval()));
}

Matrix kron(const Matrix& a, const Matrix& b, int dim_cap) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > dim_cap || cols > dim_cap) {
    std::ostringstream os;
    os << "kron: result " << rows << "x" << cols << " exceeds cap " << dim_cap;
    throw SizeLimitError(os.str());
  }
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix tensor_power(const Matrix& a, int copies, int dim_cap) {
  require_square(a, "tensor_power");
  if (copies < 1) throw DomainError("tensor_power: copies must be >= 1");
  double dim = 1.0;
  for (int k = 0; k < copies; ++k) {
    dim *= static_cast<double>(a.rows());
    if (dim > dim_cap) {
      std::ostringstream os;
      os << "tensor_power: " << a.rows() << "^" << copies << " exceeds cap " << dim_cap;
      throw SizeLimitError(os.str());
    }
  }
  Matrix out = a;
  for (int k = 1; k < copies; ++k) out = kron(out, a, dim_cap);
  return out;
}

Matrix embed_at(const Matrix& a, int slot, int copies, int dim_cap) {
  require_square(a, "embed_at");
  if (copies < 1 || slot < 0 || slot >= copies) {
    throw DomainError("embed_at: slot must lie in [0, copies)");
  }
  const Eigen::Index d = a.rows();
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 0; k < copies; ++k) {
    out = kron(out, k == slot ? a : Matrix(Matrix::Identity(d, d)), dim_cap);
  }
  return out;
}

std::pair<Matrix, Matrix> pos_neg_split(const Matrix& a) {
  EigenDecomposition ed = eigh(a);
  RealVector pos = ed.eigenvalues.cwiseMax(0.0);
  RealVector neg = (-ed.eigenvalues).cwiseMax(0.0);
  Matrix p = ed.eigenvectors * pos.asDiagonal() * ed.eigenvectors.adjoint();
  Matrix n = ed.eigenvectors * neg.asDiagonal() * ed.eigenvectors.adjoint();
  return {p, n};
}

HermitianBasis hermitian_basis(int d) {
  if (d < 1) throw DomainError("hermitian_basis: d must be >= 1");
  HermitianBasis basis;
  basis.dim = d;
  basis.elements.reserve(static_cast<size_t>(d) * d);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  basis.elements.push_back(inv_sqrt_d * Matrix::Identity(d, d));
  const double s = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      Matrix sym = Matrix::Zero(d, d);
      sym(a, b) = s;
      sym(b, a) = s;
      basis.elements.push_back(sym);
      Matrix asym = Matrix::Zero(d, d);
      asym(a, b) = Complex(0.0, -s);
      asym(b, a) = Complex(0.0, s);
      basis.elements.push_back(asym);
    }
  }
  for (int k = 1; k < d; ++k) {
    Matrix diag = Matrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
    for (int j = 0; j < k; ++j) diag(j, j) = norm;
    diag(k, k) = -static_cast<double>(k) * norm;
    basis.elements.push_back(diag);
  }
  return basis;
}

}  // namespace qmetro
