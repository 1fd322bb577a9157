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

#include "qmetro/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "qmetro/errors.hpp"

namespace qmetro {

SupportDecomposition support_decomposition(const Matrix& s, double rank_tol) {
  const auto ed = eigh(s);
  const int d = static_cast<int>(s.rows());
  SupportDecomposition out;
  out.eigenvalues = ed.eigenvalues.reverse();
  out.basis = ed.eigenvectors.rowwise().reverse();
  const double lmax = std::max(out.eigenvalues(0), 0.0);
  out.rank = 0;
  for (int i = 0; i < d; ++i)
    if (out.eigenvalues(i) > rank_tol * std::max(lmax, 1e-300)) ++out.rank;
  return out;
}

StatisticalModel::StatisticalModel(Matrix state, std::vector<Matrix> derivs,
                                   std::string label)
    : label_(std::move(label)) {
  const int d = static_cast<int>(state.rows());
  if (d < 2) throw DomainError("StatisticalModel: dimension must be at least 2");
  if (state.cols() != d)
    throw DomainError("StatisticalModel: state must be square");
  if (derivs.empty())
    throw DomainError("StatisticalModel: at least one parameter is required");

  state_ = HermitianMatrix(std::move(state)).mat();
  if (std::abs(state_.trace().real() - 1.0) > 1e-10 ||
      std::abs(state_.trace().imag()) > 1e-10)
    throw DomainError("StatisticalModel: state trace must be 1");

  support_ = support_decomposition(state_);
  if (support_.eigenvalues.minCoeff() <
      -kRankTol * std::max(support_.eigenvalues(0), 1e-300))
    throw NotPsdError("StatisticalModel: state is not positive semidefinite");
  if (support_.rank == 0)
    throw NotPsdError("StatisticalModel: state has empty support");

  derivs_.reserve(derivs.size());
  for (size_t i = 0; i < derivs.size(); ++i) {
    if (derivs[i].rows() != d || derivs[i].cols() != d) {
      std::ostringstream msg;
      msg << "StatisticalModel: derivative " << i << " has wrong shape";
      throw DomainError(msg.str());
    }
    Matrix h = HermitianMatrix(std::move(derivs[i])).mat();
    const double scale = std::max(1.0, h.norm());
    if (std::abs(h.trace().real()) > 1e-10 * scale ||
        std::abs(h.trace().imag()) > 1e-10 * scale) {
      std::ostringstream msg;
      msg << "StatisticalModel: derivative " << i << " is not traceless";
      throw DomainError(msg.str());
    }
    derivs_.push_back(std::move(h));
  }

  // Linear independence of the derivatives.
  const int n = static_cast<int>(derivs_.size());
  RealMatrix gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      gram(i, j) = (derivs_[i] * derivs_[j]).trace().real();
      gram(j, i) = gram(i, j);
    }
  Eigen::SelfAdjointEigenSolver<RealMatrix> ges(gram);
  const double gmax = std::max(ges.eigenvalues().maxCoeff(), 0.0);
  if (gmax <= 0.0 || ges.eigenvalues().minCoeff() < 1e-12 * gmax)
    throw ModelInconsistentError(
        "StatisticalModel: derivatives are linearly dependent");

  // Kernel-kernel leakage of the derivatives.
  const int r = support_.rank;
  if (r < d) {
    const Matrix uk = support_.basis.rightCols(d - r);
    for (const Matrix& ds : derivs_) {
      const Matrix kk = uk.adjoint() * ds * uk;
      if (kk.norm() > 1e-10 * std::max(1.0, ds.norm())) {
        kernel_leak_ = true;
        break;
      }
    }
  }
}

const Matrix& StatisticalModel::deriv(int i) const {
  if (i < 0 || i >= params())
    throw DomainError("StatisticalModel::deriv: index out of range");
  return derivs_[static_cast<size_t>(i)];
}

QuotientBasis quotient_basis(const StatisticalModel& m,
                             bool include_kernel_block) {
  const int d = m.dim();
  const int r = m.rank();
  const Matrix& u = m.support().basis;
  QuotientBasis out;

  const auto push_rotated = [&](const Matrix& e) {
    out.elements.push_back(u * e * u.adjoint());
  };

  // Support-support block.
  {
    const auto base = hermitian_basis(r);
    for (const Matrix& e : base.elements) {
      Matrix full = Matrix::Zero(d, d);
      full.topLeftCorner(r, r) = e;
      push_rotated(full);
    }
    out.ss_count = r * r;
  }
  // Support-kernel blocks.
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < r; ++s) {
    for (int k = r; k < d; ++k) {
      Matrix re = Matrix::Zero(d, d);
      re(s, k) = inv_sqrt2;
      re(k, s) = inv_sqrt2;
      push_rotated(re);
      Matrix im = Matrix::Zero(d, d);
      im(s, k) = Complex(0, -inv_sqrt2);
      im(k, s) = Complex(0, inv_sqrt2);
      push_rotated(im);
      out.sk_count += 2;
    }
  }
  // Kernel-kernel block on request.
  if (include_kernel_block && r < d) {
    const auto base = hermitian_basis(d - r);
    for (const Matrix& e : base.elements) {
      Matrix full = Matrix::Zero(d, d);
      full.bottomRightCorner(d - r, d - r) = e;
      push_rotated(full);
    }
    out.kk_count = (d - r) * (d - r);
  }
  return out;
}

std::vector<Matrix> sld_operators(const StatisticalModel& m) {
  if (m.kernel_leak())
    throw ModelInconsistentError(
        "sld_operators: a derivative leaks into the kernel-kernel block");
  const int d = m.dim();
  const Matrix& u = m.support().basis;
  const RealVector& lam = m.support().eigenvalues;
  const double cutoff = kRankTol * std::max(lam(0), 1e-300);

  std::vector<Matrix> out;
  out.reserve(m.params());
  for (const Matrix& ds : m.derivs()) {
    const Matrix dt = u.adjoint() * ds * u;
    Matrix lt = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        const double den = lam(a) + lam(b);
        if (den > cutoff)
          lt(a, b) = 2.0 * dt(a, b) / den;
        else
          lt(a, b) = 0.0;  // kernel-kernel: unconstrained, pinned to zero
      }
    }
    Matrix l = u * lt * u.adjoint();
    l = 0.5 * (l + l.adjoint().eval());
    const Matrix resid = 0.5 * (m.state() * l + l * m.state()) - ds;
    if (resid.norm() > 1e-8 * (1.0 + ds.norm()))
      throw NumericalError("sld_operators: Lyapunov residual too large");
    out.push_back(std::move(l));
  }
  return out;
}

RealMatrix sld_fisher(const StatisticalModel& m) {
  const auto slds = sld_operators(m);
  const int n = m.params();
  RealMatrix j(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      const double v = (m.deriv(a) * slds[b]).trace().real();
      j(a, b) = v;
      j(b, a) = v;
    }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(j);
  const double jmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (jmax <= 0.0 || es.eigenvalues().minCoeff() < 1e-12 * std::max(jmax, 1.0))
    throw SingularFisherError("sld_fisher: information matrix is singular");
  return j;
}

double sldcrb(const StatisticalModel& m) {
  return sldcrb(m, RealMatrix::Identity(m.params(), m.params()));
}

double sldcrb(const StatisticalModel& m, const RealMatrix& w) {
  const int n = m.params();
  if (w.rows() != n || w.cols() != n)
    throw DomainError("sldcrb: weight matrix has wrong shape");
  if ((w - w.transpose()).norm() > 1e-10 * (1.0 + w.norm()))
    throw DomainError("sldcrb: weight matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<RealMatrix> wes(w);
  if (wes.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, w.norm()))
    throw NotPsdError("sldcrb: weight matrix must be positive semidefinite");

  const RealMatrix j = sld_fisher(m);
  const RealMatrix jinv_w = j.ldlt().solve(w);
  return jinv_w.trace();
}

StatisticalModel tensor_power_model(const StatisticalModel& m, int copies,
                                    int dim_cap) {
  if (copies < 1)
    throw DomainError("tensor_power_model: copies must be positive");
  if (copies == 1) return m;

  const Matrix big_state = tensor_power(m.state(), copies, dim_cap);

  // Prefix powers S^(x)k for k = 0..copies-1.
  std::vector<Matrix> prefix(copies);
  prefix[0] = Matrix::Identity(1, 1);
  for (int k = 1; k < copies; ++k)
    prefix[k] = kron(prefix[k - 1], m.state(), dim_cap);

  std::vector<Matrix> big_derivs;
  big_derivs.reserve(m.params());
  for (const Matrix& ds : m.derivs()) {
    Matrix acc = Matrix::Zero(big_state.rows(), big_state.cols());
    for (int k = 0; k < copies; ++k) {
      const Matrix& left = prefix[k];
      const Matrix& right = prefix[copies - 1 - k];
      acc += kron(kron(left, ds, dim_cap), right, dim_cap);
    }
    big_derivs.push_back(std::move(acc));
  }

  std::ostringstream label;
  label << m.label() << "^" << copies;
  return StatisticalModel(big_state, std::move(big_derivs), label.str());
}

StatisticalModel parameter_map(const StatisticalModel& m, const RealMatrix& t) {
  const int n = m.params();
  if (t.rows() != n || t.cols() != n)
    throw DomainError("parameter_map: matrix has wrong shape");
  const Eigen::JacobiSVD<RealMatrix> svd(t);
  if (svd.singularValues().minCoeff() <
      1e-12 * std::max(svd.singularValues().maxCoeff(), 1.0))
    throw DomainError("parameter_map: matrix is singular");

  std::vector<Matrix> derivs;
  derivs.reserve(n);
  for (int i = 0; i < n; ++i) {
    Matrix acc = Matrix::Zero(m.dim(), m.dim());
    for (int j = 0; j < n; ++j)
      if (t(i, j) != 0.0) acc += t(i, j) * m.deriv(j);
    derivs.push_back(std::move(acc));
  }
  return StatisticalModel(m.state(), std::move(derivs),
                          m.label() + " (reparameterized)");
}

StatisticalModel reparameterize(const StatisticalModel& m, const RealMatrix& w) {
  const int n = m.params();
  if (w.rows() != n || w.cols() != n)
    throw DomainError("reparameterize: weight has wrong shape");
  if ((w - w.transpose()).norm() > 1e-10 * std::max(1.0, w.norm()))
    throw DomainError("reparameterize: weight is not symmetric");
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(w);
  const RealVector ev = es.eigenvalues();
  if (ev.minCoeff() < 1e-12 * std::max(ev.maxCoeff(), 1.0))
    throw DomainError("reparameterize: weight is not positive definite");
  const RealMatrix t = es.eigenvectors() *
                       ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                       es.eigenvectors().transpose();
  return parameter_map(m, t);
}

bool is_quasiclassical(const StatisticalModel& m, double tol) {
  const auto comm_small = [&](const Matrix& a, const Matrix& b) {
    const Matrix c = a * b - b * a;
    return c.norm() <= tol * (1.0 + a.norm() * b.norm());
  };
  for (int i = 0; i < m.params(); ++i) {
    if (!comm_small(m.state(), m.deriv(i))) return false;
    for (int j = i + 1; j < m.params(); ++j)
      if (!comm_small(m.deriv(i), m.deriv(j))) return false;
  }
  return true;
}

std::vector<Matrix> finite_difference_derivs(
    const std::function<Matrix(const RealVector&)>& family,
    const RealVector& theta0, double step) {
  if (step <= 0.0)
    throw DomainError("finite_difference_derivs: step must be positive");
  const int n = static_cast<int>(theta0.size());
  std::vector<Matrix> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    RealVector th = theta0;
    const auto eval = [&](double offset) {
      th(i) = theta0(i) + offset;
      return family(th);
    };
    const Matrix d = (-eval(2 * step) + 8 * eval(step) - 8 * eval(-step) +
                      eval(-2 * step)) /
                     (12.0 * step);
    out.push_back(d);
  }
  return out;
}

}  // namespace qmetro
