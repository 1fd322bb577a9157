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
#include "qmetro/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "qmetro/errors.hpp"

namespace qmetro {
namespace {

constexpr double kRt2 = std::numbers::sqrt2;

void check_estimators(const StatisticalModel& m, const EstimatorSet& xs) {
  if (xs.params() != m.params())
    throw WrongArityError("estimator count does not match the model");
  for (const auto& x : xs.x)
    if (x.rows() != m.dim() || x.cols() != m.dim())
      throw DomainError("estimator dimension does not match the model");
}

RealMatrix checked_weight(const RealMatrix& w, int n) {
  if (w.rows() != n || w.cols() != n)
    throw DomainError("weight matrix has wrong shape");
  if ((w - w.transpose()).norm() > 1e-10 * std::max(1.0, w.norm()))
    throw DomainError("weight matrix is not symmetric");
  RealMatrix sym = 0.5 * (w + w.transpose());
  const Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym);
  if (es.eigenvalues().minCoeff() <
      -1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw NotPsdError("weight matrix is not positive semidefinite");
  return sym;
}

// Estimator coordinates run over the quotient basis of the model, extended
// by the kernel-kernel block when a derivative leaks into it. The basis is
// kept both in the original frame (optimizer assembly, unbiasedness rows)
// and rotated to the eigenbasis of S, where sqrt(S) is diagonal and the
// Gram factor rows of the SDPs are cheap to write down.
struct EstimatorSpace {
  int d = 0, r = 0, n = 0, nb = 0;
  Matrix u;
  RealVector lam;       // support eigenvalues, length r
  RealVector sqrt_lam;  // elementwise square root
  std::vector<Matrix> rot;
  std::vector<Matrix> orig;
  RealVector tr_s;    // tr(S E_k)
  RealMatrix tr_ds;   // tr(dS_j E_k)
};

EstimatorSpace estimator_space(const StatisticalModel& m) {
  EstimatorSpace sp;
  sp.d = m.dim();
  sp.r = m.rank();
  sp.n = m.params();
  sp.u = m.support().basis;
  sp.lam = m.support().eigenvalues.head(sp.r).cwiseMax(0.0);
  sp.sqrt_lam = sp.lam.cwiseSqrt();

  auto qb = quotient_basis(m, m.kernel_leak());
  sp.orig = std::move(qb.elements);
  sp.nb = static_cast<int>(sp.orig.size());
  sp.rot.reserve(sp.orig.size());
  for (const auto& e : sp.orig) sp.rot.push_back(sp.u.adjoint() * e * sp.u);

  sp.tr_s = RealVector(sp.nb);
  sp.tr_ds = RealMatrix(sp.n, sp.nb);
  for (int k = 0; k < sp.nb; ++k) {
    sp.tr_s(k) = (m.state() * sp.orig[k]).trace().real();
    for (int j = 0; j < sp.n; ++j)
      sp.tr_ds(j, k) = (m.deriv(j) * sp.orig[k]).trace().real();
  }
  return sp;
}

void push_row(ConicProgram* prog, std::vector<double>* rhs, SparseRow row,
              double value) {
  prog->rows.push_back(std::move(row));
  rhs->push_back(value);
}

// tr(S X_i) = 0 and tr(dS_j X_i) = delta_ij over estimator coordinates
// starting at x0. A parameter direction with no overlap on the estimator
// basis cannot be unbiased at all.
void add_unbiased_rows(const EstimatorSpace& sp, int x0, ConicProgram* prog,
                       std::vector<double>* rhs) {
  for (int i = 0; i < sp.n; ++i) {
    SparseRow row;
    for (int k = 0; k < sp.nb; ++k) {
      if (std::abs(sp.tr_s(k)) > 1e-14) {
        row.cols.push_back(x0 + i * sp.nb + k);
        row.vals.push_back(sp.tr_s(k));
      }
    }
    if (!row.cols.empty()) push_row(prog, rhs, std::move(row), 0.0);
  }
  for (int i = 0; i < sp.n; ++i) {
    for (int j = 0; j < sp.n; ++j) {
      SparseRow row;
      for (int k = 0; k < sp.nb; ++k) {
        if (std::abs(sp.tr_ds(j, k)) > 1e-14) {
          row.cols.push_back(x0 + i * sp.nb + k);
          row.vals.push_back(sp.tr_ds(j, k));
        }
      }
      if (row.cols.empty()) {
        if (i == j)
          throw ModelInconsistentError(
              "derivative has no overlap with the estimator basis");
        continue;
      }
      push_row(prog, rhs, std::move(row), i == j ? 1.0 : 0.0);
    }
  }
}

void finish_rhs(ConicProgram* prog, const std::vector<double>& rhs) {
  prog->b = Eigen::Map<const RealVector>(rhs.data(),
                                         static_cast<Eigen::Index>(rhs.size()));
}

EstimatorSet extract_estimators(const EstimatorSpace& sp, const RealVector& x,
                                int x0) {
  EstimatorSet out;
  out.x.reserve(sp.n);
  for (int i = 0; i < sp.n; ++i) {
    Matrix acc = Matrix::Zero(sp.d, sp.d);
    for (int k = 0; k < sp.nb; ++k) acc += x(x0 + i * sp.nb + k) * sp.orig[k];
    Matrix herm = 0.5 * (acc + acc.adjoint().eval());
    out.x.push_back(std::move(herm));
  }
  return out;
}

BoundResult assemble(const StatisticalModel& m, const EstimatorSpace& sp,
                     const char* name, const ConicSolution& sol, int x0) {
  BoundResult res;
  res.bound = name;
  res.value = sol.primal_obj;
  res.gap = sol.gap;
  res.status = sol.status;
  res.iterations = sol.iterations;
  res.optimizer = extract_estimators(sp, sol.x, x0);
  res.unbiasedness = unbiasedness_residual(m, res.optimizer);
  return res;
}

// Pins the bottom-right identity corner of a PSD block: rows id0..id0+d-1 of
// the block equal I.
void pin_identity_corner(const SvecLayout& lay, int cone0, int id0, int d,
                         ConicProgram* prog, std::vector<double>* rhs) {
  for (int a = 0; a < d; ++a) {
    push_row(prog, rhs, {{cone0 + lay.diag(id0 + a)}, {1.0}}, 1.0);
    for (int b = a + 1; b < d; ++b) {
      push_row(prog, rhs, {{cone0 + lay.re(id0 + a, id0 + b)}, {1.0}}, 0.0);
      push_row(prog, rhs, {{cone0 + lay.im(id0 + a, id0 + b)}, {1.0}}, 0.0);
    }
  }
}

// Aliases the (row0 + p, col0 + c) entry of a PSD block, an upper-triangle
// position holding sum_k coeff_k(p, c) x_{ik}, to the estimator coordinates.
// The coefficient of basis element k is scale(p) * rot_k(src(p), c).
void alias_block_entry(const SvecLayout& lay, int cone0, int row, int col,
                       const EstimatorSpace& sp, int x0, int param, int a,
                       int c, double scale, ConicProgram* prog,
                       std::vector<double>* rhs) {
  SparseRow re_row, im_row;
  re_row.cols.push_back(cone0 + lay.re(row, col));
  re_row.vals.push_back(1.0);
  im_row.cols.push_back(cone0 + lay.im(row, col));
  im_row.vals.push_back(1.0);
  for (int k = 0; k < sp.nb; ++k) {
    const Complex g = scale * sp.rot[k](a, c);
    if (std::abs(g.real()) > 1e-15) {
      re_row.cols.push_back(x0 + param * sp.nb + k);
      re_row.vals.push_back(-kRt2 * g.real());
    }
    if (std::abs(g.imag()) > 1e-15) {
      im_row.cols.push_back(x0 + param * sp.nb + k);
      im_row.vals.push_back(-kRt2 * g.imag());
    }
  }
  push_row(prog, rhs, std::move(re_row), 0.0);
  push_row(prog, rhs, std::move(im_row), 0.0);
}

}  // namespace

double unbiasedness_residual(const StatisticalModel& m,
                             const EstimatorSet& xs) {
  check_estimators(m, xs);
  double worst = 0.0;
  for (int i = 0; i < m.params(); ++i) {
    worst = std::max(worst, std::abs((m.state() * xs.x[i]).trace()));
    for (int j = 0; j < m.params(); ++j) {
      const double want = i == j ? 1.0 : 0.0;
      worst =
          std::max(worst, std::abs((m.deriv(j) * xs.x[i]).trace() - want));
    }
  }
  return worst;
}

Matrix z_matrix(const StatisticalModel& m, const EstimatorSet& xs) {
  check_estimators(m, xs);
  const int n = m.params();
  Matrix z(n, n);
  std::vector<Matrix> sx(n);
  for (int j = 0; j < n; ++j) sx[j] = m.state() * xs.x[j];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = (sx[j] * xs.x[i]).trace();
  Matrix herm = 0.5 * (z + z.adjoint().eval());
  return herm;
}

double holevo_function(const StatisticalModel& m, const EstimatorSet& xs,
                       const RealMatrix& w) {
  const RealMatrix wsym = checked_weight(w, m.params());
  const Matrix z = z_matrix(m, xs);
  const RealMatrix rez = z.real();
  const RealMatrix imz = z.imag();
  const double first = wsym.cwiseProduct(rez).sum();

  const Eigen::SelfAdjointEigenSolver<RealMatrix> es(wsym);
  const RealMatrix whalf = es.eigenvectors() *
                           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose();
  const RealMatrix sandwiched = whalf * imz * whalf;
  return first + trabs(Complex(0.0, 1.0) * sandwiched.cast<Complex>());
}

double holevo_function(const StatisticalModel& m, const EstimatorSet& xs) {
  return holevo_function(m, xs,
                         RealMatrix::Identity(m.params(), m.params()));
}

double nagaoka_function(const StatisticalModel& m, const EstimatorSet& xs) {
  if (m.params() != 2)
    throw WrongArityError("nagaoka_function needs exactly two parameters");
  check_estimators(m, xs);
  const Matrix z = z_matrix(m, xs);
  const Matrix comm = xs.x[0] * xs.x[1] - xs.x[1] * xs.x[0];
  const Matrix a = Complex(0.0, 1.0) * comm;
  return z.real().trace() + sandwich_trabs(m.state(), a);
}

double sld_function(const StatisticalModel& m, const EstimatorSet& xs) {
  return z_matrix(m, xs).real().trace();
}

BoundResult sld_bound(const StatisticalModel& m, const RealMatrix& w) {
  const RealMatrix wsym = checked_weight(w, m.params());
  const auto slds = sld_operators(m);
  const double value = sldcrb(m, wsym);
  const RealMatrix j = sld_fisher(m);
  const RealMatrix jinv = j.ldlt().solve(RealMatrix::Identity(m.params(),
                                                              m.params()));
  BoundResult res;
  res.bound = "sld";
  res.value = value;
  res.optimizer.x.reserve(m.params());
  for (int i = 0; i < m.params(); ++i) {
    Matrix acc = Matrix::Zero(m.dim(), m.dim());
    for (int k = 0; k < m.params(); ++k) acc += jinv(k, i) * slds[k];
    res.optimizer.x.push_back(std::move(acc));
  }
  res.unbiasedness = unbiasedness_residual(m, res.optimizer);
  return res;
}

BoundResult sld_bound(const StatisticalModel& m) {
  return sld_bound(m, RealMatrix::Identity(m.params(), m.params()));
}

BoundResult hcrb(const StatisticalModel& m, const RealMatrix& w,
                 const SolverSettings& settings) {
  const RealMatrix wsym = checked_weight(w, m.params());
  const auto sp = estimator_space(m);
  const int n = sp.n, d = sp.d, r = sp.r;
  const int q = n + r * d;

  ConicProgram prog;
  prog.blocks = {free_block(n * sp.nb), psd_block(q)};
  const int x0 = 0;
  const int cone0 = prog.block_offset(1);
  const SvecLayout lay(q, BlockField::ComplexHermitian);
  std::vector<double> rhs;

  prog.c = RealVector::Zero(prog.total_dim());
  for (int i = 0; i < n; ++i) {
    prog.c(cone0 + lay.diag(i)) = wsym(i, i);
    for (int j = i + 1; j < n; ++j)
      prog.c(cone0 + lay.re(i, j)) = kRt2 * wsym(i, j);
  }

  // V real symmetric: kill the imaginary parts of the corner.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      push_row(&prog, &rhs, {{cone0 + lay.im(i, j)}, {1.0}}, 0.0);

  // The factor block F, stored through its adjoint in the upper triangle:
  // M(i, n + p) = conj(F_{p,i}) with F_{p,i} = sqrt_lam_a rot(a, c),
  // p = a * d + c. Conjugation flips the imaginary-row sign, folded in by
  // aliasing against -g.imag() through scale handling below.
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < r; ++a) {
      for (int c = 0; c < d; ++c) {
        const int col = n + a * d + c;
        SparseRow re_row, im_row;
        re_row.cols.push_back(cone0 + lay.re(i, col));
        re_row.vals.push_back(1.0);
        im_row.cols.push_back(cone0 + lay.im(i, col));
        im_row.vals.push_back(1.0);
        for (int k = 0; k < sp.nb; ++k) {
          const Complex g = sp.sqrt_lam(a) * sp.rot[k](a, c);
          if (std::abs(g.real()) > 1e-15) {
            re_row.cols.push_back(x0 + i * sp.nb + k);
            re_row.vals.push_back(-kRt2 * g.real());
          }
          if (std::abs(g.imag()) > 1e-15) {
            im_row.cols.push_back(x0 + i * sp.nb + k);
            im_row.vals.push_back(kRt2 * g.imag());
          }
        }
        push_row(&prog, &rhs, std::move(re_row), 0.0);
        push_row(&prog, &rhs, std::move(im_row), 0.0);
      }
    }
  }

  pin_identity_corner(lay, cone0, n, r * d, &prog, &rhs);
  add_unbiased_rows(sp, x0, &prog, &rhs);
  finish_rhs(&prog, rhs);

  const ConicSolution sol = solve(prog, settings);
  return assemble(m, sp, "holevo", sol, x0);
}

BoundResult hcrb(const StatisticalModel& m) {
  return hcrb(m, RealMatrix::Identity(m.params(), m.params()));
}

BoundResult ncrb(const StatisticalModel& m, const SolverSettings& settings) {
  if (m.params() != 2)
    throw WrongArityError("ncrb needs exactly two parameters");
  const auto sp = estimator_space(m);
  const int d = sp.d, r = sp.r;
  const int q = 2 * r + d;

  ConicProgram prog;
  prog.blocks = {free_block(2 * sp.nb), psd_block(q), psd_block(r),
                 psd_block(r)};
  const int x0 = 0;
  const int cone0 = prog.block_offset(1);
  const int p0 = prog.block_offset(2);
  const int q0 = prog.block_offset(3);
  const SvecLayout lay(q, BlockField::ComplexHermitian);
  const SvecLayout sup(r, BlockField::ComplexHermitian);
  std::vector<double> rhs;

  prog.c = RealVector::Zero(prog.total_dim());
  for (int p = 0; p < 2 * r; ++p) prog.c(cone0 + lay.diag(p)) = 1.0;
  for (int a = 0; a < r; ++a) {
    prog.c(p0 + sup.diag(a)) = 1.0;
    prog.c(q0 + sup.diag(a)) = 1.0;
  }

  // Lift factor rows: M(i r + a, 2r + c) = sqrt_lam_a rot(a, c) coordinates
  // of X_i, always in the upper triangle.
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < r; ++a)
      for (int c = 0; c < d; ++c)
        alias_block_entry(lay, cone0, i * r + a, 2 * r + c, sp, x0, i, a, c,
                          sp.sqrt_lam(a), &prog, &rhs);

  pin_identity_corner(lay, cone0, 2 * r, d, &prog, &rhs);

  // P - Q = i(T12 - T21) on the support block.
  for (int a = 0; a < r; ++a) {
    push_row(&prog, &rhs,
             {{p0 + sup.diag(a), q0 + sup.diag(a), cone0 + lay.im(a, r + a)},
              {1.0, -1.0, kRt2}},
             0.0);
    for (int b = a + 1; b < r; ++b) {
      push_row(&prog, &rhs,
               {{p0 + sup.re(a, b), q0 + sup.re(a, b),
                 cone0 + lay.im(a, r + b), cone0 + lay.im(b, r + a)},
                {1.0, -1.0, 1.0, 1.0}},
               0.0);
      push_row(&prog, &rhs,
               {{p0 + sup.im(a, b), q0 + sup.im(a, b),
                 cone0 + lay.re(a, r + b), cone0 + lay.re(b, r + a)},
                {1.0, -1.0, -1.0, 1.0}},
               0.0);
    }
  }

  add_unbiased_rows(sp, x0, &prog, &rhs);
  finish_rhs(&prog, rhs);

  const ConicSolution sol = solve(prog, settings);
  return assemble(m, sp, "nagaoka", sol, x0);
}

BoundResult ncrb(const StatisticalModel& m, const RealMatrix& w,
                 const SolverSettings& settings) {
  return ncrb(reparameterize(m, w), settings);
}

namespace {

// Rows forcing block (i, j), i < j, of an (n+1) d PSD variable to be block
// symmetric: M_ij Hermitian entrywise, which together with Hermiticity of
// the whole matrix gives M_ji = M_ij. An optional Hermitian offset matrix K
// (the variable then being C = M - K) moves the mismatch to the right-hand
// side.
void block_symmetry_rows(const SvecLayout& lay, int cone0, int i, int j,
                         int d, const Matrix* k_off, ConicProgram* prog,
                         std::vector<double>* rhs) {
  for (int a = 0; a < d; ++a) {
    const int ia = i * d + a, ja = j * d + a;
    double diag_rhs = 0.0;
    if (k_off != nullptr) diag_rhs = -kRt2 * std::imag((*k_off)(ia, ja));
    push_row(prog, rhs, {{cone0 + lay.im(ia, ja)}, {1.0}}, diag_rhs);
    for (int b = a + 1; b < d; ++b) {
      const int ib = i * d + b, jb = j * d + b;
      double re_rhs = 0.0, im_rhs = 0.0;
      if (k_off != nullptr) {
        re_rhs = kRt2 * (std::real((*k_off)(ib, ja)) -
                         std::real((*k_off)(ia, jb)));
        im_rhs = -kRt2 * (std::imag((*k_off)(ia, jb)) +
                          std::imag((*k_off)(ib, ja)));
      }
      push_row(prog, rhs,
               {{cone0 + lay.re(ia, jb), cone0 + lay.re(ib, ja)}, {1.0, -1.0}},
               re_rhs);
      push_row(prog, rhs,
               {{cone0 + lay.im(ia, jb), cone0 + lay.im(ib, ja)}, {1.0, 1.0}},
               im_rhs);
    }
  }
}

// Objective coefficients of Tr{(W (x) S) LL} over the leading n d rows of
// the PSD block, in the eigenbasis of S.
void nh_objective(const SvecLayout& lay, int cone0, const RealMatrix& w,
                  const EstimatorSpace& sp, RealVector* c) {
  for (int i = 0; i < sp.n; ++i) {
    for (int a = 0; a < sp.r; ++a) {
      (*c)(cone0 + lay.diag(i * sp.d + a)) += w(i, i) * sp.lam(a);
      for (int j = i + 1; j < sp.n; ++j)
        (*c)(cone0 + lay.re(i * sp.d + a, j * sp.d + a)) +=
            kRt2 * w(i, j) * sp.lam(a);
    }
  }
}

}  // namespace

BoundResult nhcrb(const StatisticalModel& m, const RealMatrix& w,
                  const SolverSettings& settings) {
  if (m.params() < 2)
    throw WrongArityError("nhcrb needs at least two parameters");
  const RealMatrix wsym = checked_weight(w, m.params());
  const auto sp = estimator_space(m);
  const int n = sp.n, d = sp.d;
  const int q = (n + 1) * d;

  ConicProgram prog;
  prog.blocks = {free_block(n * sp.nb), psd_block(q)};
  const int x0 = 0;
  const int cone0 = prog.block_offset(1);
  const SvecLayout lay(q, BlockField::ComplexHermitian);
  std::vector<double> rhs;

  prog.c = RealVector::Zero(prog.total_dim());
  nh_objective(lay, cone0, wsym, sp, &prog.c);

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      block_symmetry_rows(lay, cone0, i, j, d, nullptr, &prog, &rhs);

  // Xhat block: M(i d + a, n d + c) = (X_i)_{a c} in the rotated frame.
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < d; ++c)
        alias_block_entry(lay, cone0, i * d + a, n * d + c, sp, x0, i, a, c,
                          1.0, &prog, &rhs);

  pin_identity_corner(lay, cone0, n * d, d, &prog, &rhs);
  add_unbiased_rows(sp, x0, &prog, &rhs);
  finish_rhs(&prog, rhs);

  const ConicSolution sol = solve(prog, settings);
  return assemble(m, sp, "nagaoka-hayashi", sol, x0);
}

BoundResult nhcrb(const StatisticalModel& m) {
  return nhcrb(m, RealMatrix::Identity(m.params(), m.params()));
}

double nh_function(const StatisticalModel& m, const EstimatorSet& xs,
                   const RealMatrix& w, const SolverSettings& settings) {
  if (m.params() < 2)
    throw WrongArityError("nh_function needs at least two parameters");
  check_estimators(m, xs);
  const RealMatrix wsym = checked_weight(w, m.params());
  const auto sp = estimator_space(m);
  const int n = sp.n, d = sp.d;
  const int q = (n + 1) * d;

  ConicProgram prog;
  prog.blocks = {psd_block(q)};
  const int cone0 = 0;
  const SvecLayout lay(q, BlockField::ComplexHermitian);
  std::vector<double> rhs;

  prog.c = RealVector::Zero(prog.total_dim());
  nh_objective(lay, cone0, wsym, sp, &prog.c);

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      block_symmetry_rows(lay, cone0, i, j, d, nullptr, &prog, &rhs);

  for (int i = 0; i < n; ++i) {
    const Matrix xr = sp.u.adjoint() * xs.x[i] * sp.u;
    for (int a = 0; a < d; ++a) {
      for (int c = 0; c < d; ++c) {
        const int row = i * d + a, col = n * d + c;
        push_row(&prog, &rhs, {{cone0 + lay.re(row, col)}, {1.0}},
                 kRt2 * std::real(xr(a, c)));
        push_row(&prog, &rhs, {{cone0 + lay.im(row, col)}, {1.0}},
                 kRt2 * std::imag(xr(a, c)));
      }
    }
  }

  pin_identity_corner(lay, cone0, n * d, d, &prog, &rhs);
  finish_rhs(&prog, rhs);

  const ConicSolution sol = solve(prog, settings);
  if (sol.status != SolveStatus::Optimal)
    throw NumericalError(std::string("nh_function solve failed: ") +
                         to_string(sol.status));
  return sol.primal_obj;
}

std::pair<double, double> nh_split(const StatisticalModel& m,
                                   const EstimatorSet& xs, const RealMatrix& w,
                                   const SolverSettings& settings) {
  if (m.params() < 2)
    throw WrongArityError("nh_split needs at least two parameters");
  check_estimators(m, xs);
  const RealMatrix wsym = checked_weight(w, m.params());
  const int n = m.params(), d = m.dim();

  const Matrix z = z_matrix(m, xs);
  const double first = wsym.cwiseProduct(RealMatrix(z.real())).sum();

  // K = (W^1/2 (x) sqrt S) a(X X^T) (W^1/2 (x) sqrt S) with
  // a(X X^T)_{ij} = [X_i, X_j] / 2.
  const Eigen::SelfAdjointEigenSolver<RealMatrix> es(wsym);
  const RealMatrix whalf = es.eigenvectors() *
                           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose();
  const Matrix sq = matrix_sqrt_psd(m.state());
  Matrix anti = Matrix::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      anti.block(i * d, j * d, d, d) =
          0.5 * (xs.x[i] * xs.x[j] - xs.x[j] * xs.x[i]);
  const Matrix factor = kron(whalf.cast<Complex>(), sq);
  const Matrix k_off = factor * anti * factor;

  ConicProgram prog;
  prog.blocks = {psd_block(n * d)};
  const SvecLayout lay(n * d, BlockField::ComplexHermitian);
  std::vector<double> rhs;

  prog.c = RealVector::Zero(prog.total_dim());
  for (int p = 0; p < n * d; ++p) prog.c(lay.diag(p)) = 1.0;

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      block_symmetry_rows(lay, 0, i, j, d, &k_off, &prog, &rhs);
  finish_rhs(&prog, rhs);

  const ConicSolution sol = solve(prog, settings);
  if (sol.status != SolveStatus::Optimal)
    throw NumericalError(std::string("nh_split solve failed: ") +
                         to_string(sol.status));
  return {first, sol.primal_obj};
}

double gill_massar_ncrb(const StatisticalModel& m) {
  if (m.params() != 2)
    throw WrongArityError("gill_massar_ncrb needs exactly two parameters");
  if (m.dim() != 2)
    throw DomainError("gill_massar_ncrb applies to qubit models only");
  const RealMatrix j = sld_fisher(m);
  const Eigen::SelfAdjointEigenSolver<RealMatrix> es(j);
  if (es.eigenvalues().minCoeff() <
      1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw SingularFisherError("gill_massar_ncrb: Fisher matrix is singular");
  const double s = es.eigenvalues().cwiseSqrt().cwiseInverse().sum();
  return s * s;
}

RealMatrix mse_matrix(const std::vector<Matrix>& povm,
                      const std::vector<RealVector>& estimates,
                      const StatisticalModel& m, double* unbiasedness) {
  const int n = m.params(), d = m.dim();
  if (povm.empty() || povm.size() != estimates.size())
    throw DomainError("mse_matrix: POVM and estimate counts differ");
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& pi : povm) {
    if (pi.rows() != d || pi.cols() != d)
      throw DomainError("mse_matrix: POVM element has wrong shape");
    const RealVector eig = eigh(pi).eigenvalues;
    if (eig.minCoeff() < -1e-10 * std::max(1.0, eig.maxCoeff()))
      throw NotPsdError("mse_matrix: POVM element is not PSD");
    sum += pi;
  }
  if ((sum - Matrix::Identity(d, d)).norm() > 1e-8)
    throw DomainError("mse_matrix: POVM does not sum to the identity");
  for (const auto& e : estimates) {
    if (e.size() != n)
      throw DomainError("mse_matrix: estimate vector has wrong length");
    if (!e.allFinite()) throw DomainError("mse_matrix: estimate not finite");
  }

  const int outcomes = static_cast<int>(povm.size());
  RealVector prob(outcomes);
  for (int k = 0; k < outcomes; ++k)
    prob(k) = (m.state() * povm[k]).trace().real();

  RealMatrix v = RealMatrix::Zero(n, n);
  for (int k = 0; k < outcomes; ++k)
    v += prob(k) * (estimates[k] * estimates[k].transpose());
  v = 0.5 * (v + v.transpose()).eval();

  if (unbiasedness != nullptr) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      double mean = 0.0;
      for (int k = 0; k < outcomes; ++k) mean += estimates[k](i) * prob(k);
      worst = std::max(worst, std::abs(mean));
      for (int j = 0; j < n; ++j) {
        double resp = 0.0;
        for (int k = 0; k < outcomes; ++k)
          resp += estimates[k](i) * (m.deriv(j) * povm[k]).trace().real();
        worst = std::max(worst, std::abs(resp - (i == j ? 1.0 : 0.0)));
      }
    }
    *unbiasedness = worst;
  }
  return v;
}

}  // namespace qmetro
