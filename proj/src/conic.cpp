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
//
// Primal-dual interior-point solver for linear programs over products of
// free and PSD cones.  The public problem
//
//     min c.x   s.t.  rows: a_r.x = b_r,   PSD-block coordinates form
//                     Hermitian (or real symmetric) PSD matrices
//
// is lowered to the standard conic form
//
//     min c.x   s.t.  A x = b,   G x + s = h,   s in K
//
// where x keeps one scalar per live public coordinate and K is the product
// of the PSD blocks in svec coordinates.  A singleton-occurrence presolve
// eliminates equality rows whose pivot coordinate appears in no other
// equality row, which removes the linking rows that program builders emit
// in bulk (pins, aliases, and affine definitions of block entries).
// Eliminated coordinates and their multipliers are reconstructed exactly
// after the solve, so callers see full-size x, y, z regardless of presolve.
//
// The interior-point iteration is a Mehrotra predictor-corrector with
// Nesterov-Todd scaling.  Newton systems are reduced to the symmetric
// quasidefinite form [[B'B, A'], [A, 0]] with B = W^-T G and factored by
// LAPACK's Bunch-Kaufman routines plus one step of iterative refinement.

#include "qmetro/conic.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmetro/errors.hpp"
#include "qmetro/rng.hpp"

namespace qmetro {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

int ConeBlock::vec_dim() const {
  if (kind == Kind::Free) return dim;
  if (field == BlockField::ComplexHermitian) return dim * dim;
  return dim * (dim + 1) / 2;
}

ConeBlock free_block(int n) {
  if (n < 1) throw DomainError("free_block: dimension must be positive");
  return ConeBlock{ConeBlock::Kind::Free, n, BlockField::RealSymmetric};
}

ConeBlock psd_block(int d, BlockField field) {
  if (d < 1) throw DomainError("psd_block: dimension must be positive");
  return ConeBlock{ConeBlock::Kind::Psd, d, field};
}

ConeBlock embed_hermitian_cone(int d) {
  return psd_block(d, BlockField::ComplexHermitian);
}

RealMatrix real_embedding(const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  if (a.cols() != d) throw DomainError("real_embedding: matrix must be square");
  RealMatrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = a.real();
  out.topRightCorner(d, d) = -a.imag();
  out.bottomLeftCorner(d, d) = a.imag();
  out.bottomRightCorner(d, d) = a.real();
  return out;
}

SvecLayout::SvecLayout(int matdim, BlockField field)
    : d_(matdim), field_(field) {
  if (matdim < 1) throw DomainError("SvecLayout: dimension must be positive");
}

int SvecLayout::dim() const {
  return field_ == BlockField::ComplexHermitian
             ? d_ * d_
             : d_ * (d_ + 1) / 2;
}

int SvecLayout::diag(int r) const {
  if (r < 0 || r >= d_)
    throw DomainError("SvecLayout::diag: index out of range");
  return field_ == BlockField::ComplexHermitian ? r * r + 2 * r
                                                : r * (r + 1) / 2 + r;
}

int SvecLayout::re(int r, int c) const {
  if (c < r) std::swap(r, c);
  if (r < 0 || c >= d_)
    throw DomainError("SvecLayout::re: index out of range");
  return field_ == BlockField::ComplexHermitian ? c * c + 2 * r
                                                : c * (c + 1) / 2 + r;
}

int SvecLayout::im(int r, int c) const {
  if (field_ != BlockField::ComplexHermitian)
    throw DomainError(
        "SvecLayout::im: real symmetric blocks have no imaginary parts");
  if (c < r) std::swap(r, c);
  if (r == c) throw DomainError("SvecLayout::im: diagonal entries are real");
  if (r < 0 || c >= d_)
    throw DomainError("SvecLayout::im: index out of range");
  return c * c + 2 * r + 1;
}

RealVector SvecLayout::vec(const Matrix& a) const {
  if (a.rows() != d_ || a.cols() != d_)
    throw DomainError("SvecLayout::vec: shape mismatch");
  RealVector v(dim());
  for (int c = 0; c < d_; ++c) {
    for (int r = 0; r < c; ++r) {
      v(re(r, c)) = kSqrt2 * a(r, c).real();
      if (field_ == BlockField::ComplexHermitian)
        v(im(r, c)) = kSqrt2 * a(r, c).imag();
    }
    v(diag(c)) = a(c, c).real();
  }
  return v;
}

Matrix SvecLayout::unvec(const RealVector& v) const {
  if (v.size() != dim()) throw DomainError("SvecLayout::unvec: size mismatch");
  return unvec(v.data());
}

Matrix SvecLayout::unvec(const double* v) const {
  Matrix a(d_, d_);
  for (int c = 0; c < d_; ++c) {
    for (int r = 0; r < c; ++r) {
      const double x = v[re(r, c)] / kSqrt2;
      const double y = field_ == BlockField::ComplexHermitian
                           ? v[im(r, c)] / kSqrt2
                           : 0.0;
      a(r, c) = Complex(x, y);
      a(c, r) = Complex(x, -y);
    }
    a(c, c) = Complex(v[diag(c)], 0.0);
  }
  return a;
}

int ConicProgram::total_dim() const {
  int n = 0;
  for (const auto& blk : blocks) n += blk.vec_dim();
  return n;
}

int ConicProgram::block_offset(int k) const {
  if (k < 0 || k >= static_cast<int>(blocks.size()))
    throw DomainError("ConicProgram::block_offset: block index out of range");
  int off = 0;
  for (int i = 0; i < k; ++i) off += blocks[i].vec_dim();
  return off;
}

void ConicProgram::validate() const {
  if (blocks.empty()) throw DomainError("ConicProgram: no variable blocks");
  const int n = total_dim();
  if (static_cast<int>(c.size()) != n)
    throw DomainError(
        "ConicProgram: objective length does not match variable dimension");
  if (rows.size() != b.size())
    throw DomainError("ConicProgram: row/rhs count mismatch");
  for (const auto& row : rows) {
    if (row.cols.size() != row.vals.size())
      throw DomainError("ConicProgram: ragged sparse row");
    for (int j : row.cols)
      if (j < 0 || j >= n)
        throw DomainError("ConicProgram: column index out of range");
    for (double v : row.vals)
      if (!std::isfinite(v))
        throw DomainError("ConicProgram: non-finite coefficient");
  }
  for (double v : c)
    if (!std::isfinite(v)) throw DomainError("ConicProgram: non-finite objective");
  for (double v : b)
    if (!std::isfinite(v)) throw DomainError("ConicProgram: non-finite rhs");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

// ---------------------------------------------------------------------------
// Lowering and presolve.

struct CoordInfo {
  bool is_psd = false;
  int block = -1;  // index into the PSD shape list
  int local = -1;  // svec index within the block
};

struct Definition {
  // Resolved form: x_k = constant + sum coef_j * x_{live j}.
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;
  int pivot_row = -1;
  double pivot_coef = 0.0;
  // As read off the pivot row, over original coordinate ids.
  std::vector<std::pair<int, double>> raw_terms;
};

struct PsdBlockShape {
  int d = 0;
  BlockField field = BlockField::ComplexHermitian;
  int coord0 = 0;  // offset in the original coordinate vector
  int cone0 = 0;   // offset in the stacked cone svec vector
};

struct Lowered {
  int n_orig = 0;
  std::vector<CoordInfo> info;

  std::vector<int> live;         // original ids, increasing
  std::vector<int> live_index;   // orig -> live idx, -1 if eliminated
  std::vector<char> eliminated;  // orig -> flag
  std::vector<Definition> defs;  // orig -> definition (valid if eliminated)
  std::vector<int> elim_order;   // original ids in elimination order

  RealVector c;  // over live coords
  double c0 = 0.0;

  RealMatrix a;  // p_kept x m
  RealVector b;
  std::vector<int> kept_rows;  // original row ids

  std::vector<PsdBlockShape> psd;
  int ncone = 0;
  RealVector h0;  // s = h0 + sum coef * x_live
  std::vector<std::vector<std::pair<int, double>>> scols;

  bool infeasible = false;
  bool unbounded = false;
  std::string message;
};

struct RowData {
  std::vector<int> cols;
  std::vector<double> vals;
  double rhs = 0.0;
  bool active = true;
};

Lowered lower_program(const ConicProgram& prog, const SolverSettings& settings) {
  Lowered low;
  low.n_orig = prog.total_dim();
  low.info.assign(low.n_orig, CoordInfo{});

  int cone_off = 0;
  {
    int coord = 0;
    for (const auto& blk : prog.blocks) {
      if (blk.kind == ConeBlock::Kind::Psd) {
        PsdBlockShape shape;
        shape.d = blk.dim;
        shape.field = blk.field;
        shape.coord0 = coord;
        shape.cone0 = cone_off;
        low.psd.push_back(shape);
        for (int k = 0; k < blk.vec_dim(); ++k) {
          low.info[coord + k].is_psd = true;
          low.info[coord + k].block = static_cast<int>(low.psd.size()) - 1;
          low.info[coord + k].local = k;
        }
        cone_off += blk.vec_dim();
      }
      coord += blk.vec_dim();
    }
  }
  low.ncone = cone_off;

  // Copy rows, merging duplicate columns and dropping exact zeros.
  const int p = static_cast<int>(prog.rows.size());
  std::vector<RowData> rows(p);
  for (int r = 0; r < p; ++r) {
    std::vector<std::pair<int, double>> ents;
    ents.reserve(prog.rows[r].cols.size());
    for (size_t t = 0; t < prog.rows[r].cols.size(); ++t)
      ents.emplace_back(prog.rows[r].cols[t], prog.rows[r].vals[t]);
    std::sort(ents.begin(), ents.end());
    for (const auto& [j, v] : ents) {
      if (!rows[r].cols.empty() && rows[r].cols.back() == j)
        rows[r].vals.back() += v;
      else {
        rows[r].cols.push_back(j);
        rows[r].vals.push_back(v);
      }
    }
    size_t w = 0;
    for (size_t t = 0; t < rows[r].cols.size(); ++t) {
      if (rows[r].vals[t] != 0.0) {
        rows[r].cols[w] = rows[r].cols[t];
        rows[r].vals[w] = rows[r].vals[t];
        ++w;
      }
    }
    rows[r].cols.resize(w);
    rows[r].vals.resize(w);
    rows[r].rhs = prog.b[r];
  }

  low.eliminated.assign(low.n_orig, 0);
  low.defs.assign(low.n_orig, Definition{});

  std::vector<int> occ(low.n_orig, 0);
  for (const auto& row : rows)
    for (int j : row.cols) ++occ[j];

  if (settings.presolve) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (int r = 0; r < p; ++r) {
        auto& row = rows[r];
        if (!row.active) continue;
        double row_scale = 0.0;
        for (size_t t = 0; t < row.vals.size(); ++t)
          if (!low.eliminated[row.cols[t]])
            row_scale = std::max(row_scale, std::abs(row.vals[t]));
        if (row_scale == 0.0) continue;  // left to the rank filter
        int pivot = -1;
        double pivot_val = 0.0;
        for (size_t t = 0; t < row.cols.size(); ++t) {
          const int j = row.cols[t];
          if (low.eliminated[j] || occ[j] != 1) continue;
          if (std::abs(row.vals[t]) > std::abs(pivot_val) &&
              std::abs(row.vals[t]) > 1e-12 * row_scale) {
            pivot = j;
            pivot_val = row.vals[t];
          }
        }
        if (pivot < 0) continue;

        Definition def;
        def.pivot_row = r;
        def.pivot_coef = pivot_val;
        def.constant = row.rhs / pivot_val;
        for (size_t t = 0; t < row.cols.size(); ++t) {
          const int j = row.cols[t];
          if (j == pivot) continue;
          def.raw_terms.emplace_back(j, -row.vals[t] / pivot_val);
        }
        low.defs[pivot] = std::move(def);
        low.eliminated[pivot] = 1;
        low.elim_order.push_back(pivot);
        row.active = false;
        for (int j : row.cols) --occ[j];
        progress = true;
      }
    }
  }

  // Resolve definitions over the surviving coordinates.  A pivot row cannot
  // contain a coordinate eliminated before its own pivot (that coordinate
  // had a single active row, its own pivot row), so raw terms reference only
  // survivors or coordinates eliminated later; reverse order resolves both.
  // Terms stay on original ids until the live set is known.
  for (auto it = low.elim_order.rbegin(); it != low.elim_order.rend(); ++it) {
    Definition& def = low.defs[*it];
    std::vector<std::pair<int, double>> expanded;
    for (const auto& [j, coef] : def.raw_terms) {
      if (!low.eliminated[j]) {
        expanded.emplace_back(j, coef);
      } else {
        const Definition& inner = low.defs[j];
        def.constant += coef * inner.constant;
        for (const auto& [oj, ocoef] : inner.terms)
          expanded.emplace_back(oj, coef * ocoef);
      }
    }
    std::sort(expanded.begin(), expanded.end());
    def.terms.clear();
    for (const auto& [oj, coef] : expanded) {
      if (!def.terms.empty() && def.terms.back().first == oj)
        def.terms.back().second += coef;
      else
        def.terms.emplace_back(oj, coef);
    }
  }

  // Objective folded onto survivors, and the survivors that still
  // parameterize a cone block through an eliminated entry's definition.
  RealVector c_eff = RealVector::Zero(low.n_orig);
  for (int j = 0; j < low.n_orig; ++j)
    if (!low.eliminated[j]) c_eff(j) = prog.c[j];
  std::vector<char> feeds_cone(low.n_orig, 0);
  for (int k : low.elim_order) {
    const Definition& def = low.defs[k];
    if (prog.c[k] != 0.0) {
      low.c0 += prog.c[k] * def.constant;
      for (const auto& [oj, coef] : def.terms) c_eff(oj) += prog.c[k] * coef;
    }
    if (low.info[k].is_psd)
      for (const auto& [oj, coef] : def.terms) feeds_cone[oj] = 1;
  }

  // Live coordinates.  A free coordinate in no active row still matters when
  // an eliminated cone entry depends on it; only with no rows, no cone
  // references and no folded objective weight is it irrelevant (pin to
  // zero), and a folded weight on such a coordinate certifies an unbounded
  // objective.
  low.live_index.assign(low.n_orig, -1);
  for (int j = 0; j < low.n_orig; ++j) {
    if (low.eliminated[j]) continue;
    if (!low.info[j].is_psd && occ[j] == 0 && !feeds_cone[j]) {
      if (c_eff(j) != 0.0) {
        low.unbounded = true;
        low.message =
            "unbounded: free coordinate with objective weight appears in no "
            "constraint";
        return low;
      }
      low.defs[j] = Definition{};  // x_j = 0, no pivot row
      low.eliminated[j] = 1;
      low.elim_order.push_back(j);
      continue;
    }
    low.live_index[j] = static_cast<int>(low.live.size());
    low.live.push_back(j);
  }

  // Remap definition terms to live indices; references to coordinates pinned
  // above carry value zero and drop out.
  for (int k : low.elim_order) {
    Definition& def = low.defs[k];
    size_t w = 0;
    for (const auto& [oj, coef] : def.terms) {
      if (low.eliminated[oj]) continue;
      def.terms[w] = {low.live_index[oj], coef};
      ++w;
    }
    def.terms.resize(w);
  }

  const int m = static_cast<int>(low.live.size());

  // Objective over live coordinates (eliminated ones already folded).
  low.c = RealVector::Zero(m);
  for (int j = 0; j < low.n_orig; ++j)
    if (!low.eliminated[j]) low.c(low.live_index[j]) = c_eff(j);

  // Cone affine map.
  low.h0 = RealVector::Zero(low.ncone);
  low.scols.assign(m, {});
  for (const auto& shape : low.psd) {
    const SvecLayout lay(shape.d, shape.field);
    for (int k = 0; k < lay.dim(); ++k) {
      const int coord = shape.coord0 + k;
      const int cone_idx = shape.cone0 + k;
      if (!low.eliminated[coord]) {
        low.scols[low.live_index[coord]].emplace_back(cone_idx, 1.0);
      } else {
        const Definition& def = low.defs[coord];
        low.h0(cone_idx) += def.constant;
        for (const auto& [lj, coef] : def.terms)
          low.scols[lj].emplace_back(cone_idx, coef);
      }
    }
  }

  // Surviving equality rows reference only live coordinates by construction.
  std::vector<int> active_rows;
  for (int r = 0; r < p; ++r)
    if (rows[r].active) active_rows.push_back(r);

  const int pa = static_cast<int>(active_rows.size());
  RealMatrix a_full = RealMatrix::Zero(pa, m);
  RealVector b_full(pa);
  for (int i = 0; i < pa; ++i) {
    const RowData& row = rows[active_rows[i]];
    b_full(i) = row.rhs;
    for (size_t t = 0; t < row.cols.size(); ++t) {
      const int lj = low.live_index[row.cols[t]];
      if (lj < 0)
        throw NumericalError(
            "presolve invariant violated: eliminated coordinate in active row");
      a_full(i, lj) += row.vals[t];
    }
  }

  // Rank filter: drop dependent rows, flagging inconsistent ones.  Skipped
  // for very tall systems; presolve keeps the surviving row count small.
  if (pa > 0 && pa <= 1500) {
    Eigen::ColPivHouseholderQR<RealMatrix> qr(a_full.transpose());
    const RealMatrix& qrm = qr.matrixQR();
    const int kmax = std::min<int>(m, pa);
    const double r00 = kmax > 0 ? std::abs(qrm(0, 0)) : 0.0;
    int rank = 0;
    for (int k = 0; k < kmax; ++k) {
      if (std::abs(qrm(k, k)) > 1e-10 * std::max(r00, 1e-300))
        ++rank;
      else
        break;
    }
    if (rank < pa) {
      std::vector<char> keep(pa, 0);
      for (int k = 0; k < rank; ++k)
        keep[qr.colsPermutation().indices()(k)] = 1;
      std::vector<int> kept, dropped;
      for (int i = 0; i < pa; ++i) (keep[i] ? kept : dropped).push_back(i);

      RealMatrix ak(static_cast<int>(kept.size()), m);
      RealVector bk(static_cast<int>(kept.size()));
      for (size_t i = 0; i < kept.size(); ++i) {
        ak.row(static_cast<int>(i)) = a_full.row(kept[i]);
        bk(static_cast<int>(i)) = b_full(kept[i]);
      }
      Eigen::ColPivHouseholderQR<RealMatrix> qrk(ak.transpose());
      const double bscale = 1.0 + b_full.cwiseAbs().maxCoeff();
      for (int i : dropped) {
        const RealVector lam = qrk.solve(a_full.row(i).transpose());
        if (std::abs(lam.dot(bk) - b_full(i)) > 1e-8 * bscale) {
          low.infeasible = true;
          low.message = "presolve: inconsistent dependent equality row";
          return low;
        }
      }
      low.a = std::move(ak);
      low.b = std::move(bk);
      for (int i : kept) low.kept_rows.push_back(active_rows[i]);
      return low;
    }
  }
  low.a = std::move(a_full);
  low.b = std::move(b_full);
  low.kept_rows = std::move(active_rows);
  return low;
}

// ---------------------------------------------------------------------------
// Interior-point machinery.

struct SvecEntry {
  int r, c;
  int kind;  // 0 diag, 1 real off-diagonal, 2 imaginary off-diagonal
};

std::vector<SvecEntry> decode_table(const SvecLayout& lay, int d,
                                    BlockField field) {
  std::vector<SvecEntry> tab(lay.dim());
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < c; ++r) {
      tab[lay.re(r, c)] = SvecEntry{r, c, 1};
      if (field == BlockField::ComplexHermitian)
        tab[lay.im(r, c)] = SvecEntry{r, c, 2};
    }
    tab[lay.diag(c)] = SvecEntry{c, c, 0};
  }
  return tab;
}

struct BlockWork {
  SvecLayout lay;
  int d = 0;
  BlockField field = BlockField::ComplexHermitian;
  int off = 0;
  std::vector<SvecEntry> table;

  Matrix s, z;
  Matrix r, rti;  // NT scaling: r^H Z r = rti^H S rti = diag(sig)
  RealVector sig;
  Eigen::LLT<Matrix> ls, lz;

  explicit BlockWork(const PsdBlockShape& shape)
      : lay(shape.d, shape.field),
        d(shape.d),
        field(shape.field),
        off(shape.cone0) {
    table = decode_table(lay, d, field);
  }
};

Matrix smat_from(const BlockWork& blk, const RealVector& stacked) {
  return blk.lay.unvec(stacked.data() + blk.off);
}

void vec_into(const BlockWork& blk, const Matrix& a, RealVector* stacked) {
  const RealVector v = blk.lay.vec(a);
  stacked->segment(blk.off, v.size()) = v;
}

// Congruence rti^H M rti where M is given by a sparse svec column.  Each
// svec entry is an elementary Hermitian matrix, so the congruence is a sum
// of outer products of rows of rti: O(entries * d^2) instead of O(d^3).
Matrix sparse_congruence(const BlockWork& blk,
                         const std::vector<std::pair<int, double>>& col,
                         double sign) {
  Matrix out = Matrix::Zero(blk.d, blk.d);
  for (const auto& [cone_idx, coef] : col) {
    const SvecEntry& e = blk.table[cone_idx - blk.off];
    const double w = sign * coef;
    const Vector ur = blk.rti.row(e.r).adjoint();
    if (e.kind == 0) {
      out.noalias() += w * (ur * ur.adjoint());
    } else {
      const Vector uc = blk.rti.row(e.c).adjoint();
      if (e.kind == 1) {
        const double a = w / kSqrt2;
        out.noalias() += a * (ur * uc.adjoint());
        out.noalias() += a * (uc * ur.adjoint());
      } else {
        const Complex a(0.0, w / kSqrt2);
        out.noalias() += a * (ur * uc.adjoint());
        out.noalias() -= a * (uc * ur.adjoint());
      }
    }
  }
  return out;
}

// Largest t with S + t D psd, given the Cholesky factor of S.
double max_step(const Eigen::LLT<Matrix>& chol, const Matrix& d_mat) {
  const Matrix e = chol.matrixL().solve(d_mat);
  const Matrix m = chol.matrixL().solve(e.adjoint()).adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()),
                                           Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return kInf;
  return 1.0 / (-lmin);
}

struct KktFactor {
  int dim = 0;
  int split = 0;  // rows below split get the opposite regularization sign
  RealMatrix mat;
  RealMatrix copy;
  std::vector<lapack_int> ipiv;

  bool factor(double reg) {
    mat = copy;
    if (reg > 0.0) {
      for (int i = 0; i < dim; ++i) mat(i, i) += (i < split ? reg : -reg);
    }
    ipiv.assign(std::max(dim, 1), 0);
    const lapack_int info =
        LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', dim, mat.data(), dim, ipiv.data());
    return info == 0;
  }

  RealVector solve(const RealVector& rhs) const {
    RealVector x = rhs;
    LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', dim, 1, mat.data(), dim, ipiv.data(),
                   x.data(), dim);
    // Refine against the unregularized matrix until the residual stops
    // shrinking; the static regularization and the squared conditioning of
    // the reduced system both land here.
    RealVector resid = rhs;
    resid.noalias() -= copy.selfadjointView<Eigen::Lower>() * x;
    double rnorm = resid.cwiseAbs().maxCoeff();
    for (int round = 0; round < 4 && rnorm > 0.0; ++round) {
      RealVector corr = resid;
      LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', dim, 1, mat.data(), dim,
                     ipiv.data(), corr.data(), dim);
      const RealVector next = x + corr;
      RealVector nresid = rhs;
      nresid.noalias() -= copy.selfadjointView<Eigen::Lower>() * next;
      const double nnorm = nresid.cwiseAbs().maxCoeff();
      if (nnorm >= rnorm) break;
      x = next;
      resid.swap(nresid);
      const bool progressing = nnorm < 0.5 * rnorm;
      rnorm = nnorm;
      if (!progressing) break;
    }
    return x;
  }
};

struct IpmResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  RealVector x, y;        // over live coords / kept rows (internal y sign)
  RealVector zvec, svec;  // stacked cone vectors
  double pobj = 0.0, dobj = 0.0, gap = 0.0, rel_gap = 0.0;
  double pres = 0.0, dres = 0.0;
  int iterations = 0;
  std::string message;
};

IpmResult run_ipm(const Lowered& low, const SolverSettings& settings) {
  IpmResult out;
  const int m = static_cast<int>(low.live.size());
  const int p = static_cast<int>(low.b.size());

  std::vector<BlockWork> blocks;
  blocks.reserve(low.psd.size());
  int nu = 0;
  for (const auto& shape : low.psd) {
    blocks.emplace_back(shape);
    nu += shape.d;
  }

  // No cone left: a pure equality-constrained linear objective.
  if (blocks.empty() || low.ncone == 0) {
    out.zvec = RealVector::Zero(0);
    out.svec = RealVector::Zero(0);
    if (p == 0) {
      if (m > 0 && low.c.cwiseAbs().maxCoeff() > 0.0) {
        out.message = "unbounded: unconstrained objective";
        return out;
      }
      out.status = SolveStatus::Optimal;
      out.x = RealVector::Zero(m);
      out.y = RealVector::Zero(0);
      out.pobj = out.dobj = low.c0;
      return out;
    }
    Eigen::ColPivHouseholderQR<RealMatrix> qr(low.a);
    const RealVector x = qr.solve(low.b);
    if ((low.a * x - low.b).cwiseAbs().maxCoeff() >
        1e-8 * (1.0 + low.b.cwiseAbs().maxCoeff())) {
      out.status = SolveStatus::Infeasible;
      out.message = "equality system has no solution";
      return out;
    }
    Eigen::ColPivHouseholderQR<RealMatrix> qrt(low.a.transpose());
    const RealVector y = qrt.solve(low.c);
    if ((low.a.transpose() * y - low.c).cwiseAbs().maxCoeff() >
        1e-8 * (1.0 + low.c.cwiseAbs().maxCoeff())) {
      out.message = "unbounded: objective escapes along the equality manifold";
      return out;
    }
    out.status = SolveStatus::Optimal;
    out.x = x;
    out.y = -y;
    out.pobj = out.dobj = low.c.dot(x) + low.c0;
    return out;
  }

  RealVector x = RealVector::Zero(m);
  RealVector y = RealVector::Zero(p);
  Rng perturb_rng(splitmix64(settings.init_perturb_seed));
  for (auto& blk : blocks) {
    blk.s = Matrix::Identity(blk.d, blk.d) * settings.init_scale;
    blk.z = Matrix::Identity(blk.d, blk.d) * settings.init_scale;
    if (settings.init_perturb_seed != 0) {
      for (int i = 0; i < blk.d; ++i) {
        const double f = 1.0 + 0.25 * perturb_rng.uniform();
        blk.s(i, i) *= f;
        blk.z(i, i) *= f;
      }
    }
  }

  const double bnorm = 1.0 + (p > 0 ? low.b.cwiseAbs().maxCoeff() : 0.0);
  const double hnorm = 1.0 + low.h0.cwiseAbs().maxCoeff();
  const double cnorm = 1.0 + (m > 0 ? low.c.cwiseAbs().maxCoeff() : 0.0);

  RealVector svec(low.ncone), zvec(low.ncone);
  RealMatrix bmat(low.ncone, m);
  KktFactor kkt;
  kkt.dim = m + p;
  kkt.split = m;
  kkt.copy = RealMatrix::Zero(kkt.dim, kkt.dim);

  const auto stack_cone = [&](RealVector* sv, RealVector* zv) {
    for (const auto& blk : blocks) {
      vec_into(blk, blk.s, sv);
      vec_into(blk, blk.z, zv);
    }
  };

  const auto cone_map = [&](const RealVector& xv) {
    RealVector sx = low.h0;
    for (int j = 0; j < m; ++j) {
      const double xj = xv(j);
      if (xj == 0.0) continue;
      for (const auto& [k, coef] : low.scols[j]) sx(k) += coef * xj;
    }
    return sx;
  };

  const auto gt_apply = [&](const RealVector& v) {
    RealVector gv = RealVector::Zero(m);
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (const auto& [k, coef] : low.scols[j]) acc += coef * v(k);
      gv(j) = -acc;
    }
    return gv;
  };

  // Per-variable column pieces grouped by block, fixed across iterations.
  std::vector<std::vector<std::vector<std::pair<int, double>>>> cols_by_block(
      blocks.size());
  for (size_t bi = 0; bi < blocks.size(); ++bi)
    cols_by_block[bi].assign(m, {});
  for (int j = 0; j < m; ++j) {
    for (const auto& [k, coef] : low.scols[j]) {
      for (size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto& blk = blocks[bi];
        if (k >= blk.off && k < blk.off + blk.lay.dim()) {
          cols_by_block[bi][j].emplace_back(k, coef);
          break;
        }
      }
    }
  }

  for (int iter = 0; iter <= settings.max_iter; ++iter) {
    stack_cone(&svec, &zvec);

    RealVector rd = low.c + gt_apply(zvec);
    if (p > 0) rd.noalias() += low.a.transpose() * y;
    RealVector rp;
    if (p > 0) rp = low.a * x - low.b;
    const RealVector rg = svec - cone_map(x);

    const double gap = svec.dot(zvec);
    const double mu = gap / nu;
    const double pobj = low.c.dot(x) + low.c0;
    const double dobj = -(p > 0 ? low.b.dot(y) : 0.0) - low.h0.dot(zvec) + low.c0;

    double pres = rg.cwiseAbs().maxCoeff() / hnorm;
    if (p > 0) pres = std::max(pres, rp.cwiseAbs().maxCoeff() / bnorm);
    const double dres = m > 0 ? rd.cwiseAbs().maxCoeff() / cnorm : 0.0;
    const double rel_gap = gap / std::max(1.0, std::abs(pobj));

    out.iterations = iter;
    out.pobj = pobj;
    out.dobj = dobj;
    out.gap = gap;
    out.rel_gap = rel_gap;
    out.pres = pres;
    out.dres = dres;

    if (settings.verbose)
      std::fprintf(stderr,
                   "it %3d  pobj % .12e  relgap %.3e  pres %.3e  dres %.3e\n",
                   iter, pobj, rel_gap, pres, dres);

    const auto snapshot = [&] {
      out.x = x;
      out.y = y;
      out.svec = svec;
      out.zvec = zvec;
    };

    if (pres <= settings.feas_tol && dres <= settings.feas_tol &&
        (rel_gap <= settings.gap_tol ||
         std::abs(pobj - dobj) <=
             settings.gap_tol * std::max(1.0, std::abs(pobj)))) {
      out.status = SolveStatus::Optimal;
      out.message = "converged";
      snapshot();
      return out;
    }

    // Farkas certificate of primal infeasibility: A'y + G'z ~ 0 with
    // -b.y - h.z > 0 and z in the cone.
    {
      const double den = -(p > 0 ? low.b.dot(y) : 0.0) - low.h0.dot(zvec);
      if (den > settings.feas_tol) {
        const RealVector cert = rd - low.c;
        const double certres = m > 0 ? cert.cwiseAbs().maxCoeff() : 0.0;
        const double scale = std::max(
            1.0, std::max(zvec.cwiseAbs().maxCoeff(),
                          p > 0 ? y.cwiseAbs().maxCoeff() : 0.0));
        if (certres / den <= settings.feas_tol && den >= 1e-10 * scale) {
          out.status = SolveStatus::Infeasible;
          out.message = "primal infeasibility certificate found";
          snapshot();
          return out;
        }
      }
    }
    // Improving-ray certificate of an unbounded objective.
    if (pobj - low.c0 < -1.0) {
      const RealVector sray = cone_map(x) - low.h0;
      double ray_min = 0.0;
      for (const auto& blk : blocks) {
        const Matrix sm = smat_from(blk, sray);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sm, Eigen::EigenvaluesOnly);
        ray_min = std::min(ray_min, es.eigenvalues().minCoeff());
      }
      const double xn = x.cwiseAbs().maxCoeff();
      const double aresid = p > 0 ? (low.a * x).cwiseAbs().maxCoeff() : 0.0;
      if (xn > 1.0 && aresid <= settings.feas_tol * xn &&
          ray_min >= -settings.feas_tol * xn &&
          pobj - low.c0 < -1e8 * settings.gap_tol) {
        out.status = SolveStatus::NumericalFailure;
        out.message = "unbounded: improving ray detected";
        snapshot();
        return out;
      }
    }
    if (!std::isfinite(gap) || x.hasNaN() ||
        (m > 0 && x.cwiseAbs().maxCoeff() > 1e14)) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "iterates diverged";
      snapshot();
      return out;
    }
    if (iter == settings.max_iter) break;

    // Nesterov-Todd scaling per block.
    bool scaling_ok = true;
    for (auto& blk : blocks) {
      blk.ls.compute(blk.s);
      blk.lz.compute(blk.z);
      if (blk.ls.info() != Eigen::Success || blk.lz.info() != Eigen::Success) {
        scaling_ok = false;
        break;
      }
      const Matrix lsm = blk.ls.matrixL();
      const Matrix lzm = blk.lz.matrixL();
      Eigen::JacobiSVD<Matrix> svd(lzm.adjoint() * lsm,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
      blk.sig = svd.singularValues();
      if (blk.sig.minCoeff() <= 0.0) {
        scaling_ok = false;
        break;
      }
      const RealVector isq = blk.sig.cwiseSqrt().cwiseInverse();
      blk.r = lsm * svd.matrixV() * isq.asDiagonal();
      blk.rti = lzm * svd.matrixU() * isq.asDiagonal();
    }
    if (!scaling_ok) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "scaling failed: iterate lost positive definiteness";
      snapshot();
      return out;
    }

    // B = W^-T G, one svec column per live variable.
    bmat.setZero();
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& blk = blocks[bi];
      for (int j = 0; j < m; ++j) {
        const auto& col = cols_by_block[bi][j];
        if (col.empty()) continue;
        const Matrix cm = sparse_congruence(blk, col, -1.0);
        bmat.block(blk.off, j, blk.lay.dim(), 1) = blk.lay.vec(cm);
      }
    }

    kkt.copy.setZero();
    kkt.copy.topLeftCorner(m, m)
        .selfadjointView<Eigen::Lower>()
        .rankUpdate(bmat.transpose());
    kkt.copy.topLeftCorner(m, m) = RealMatrix(
        kkt.copy.topLeftCorner(m, m).selfadjointView<Eigen::Lower>());
    if (p > 0) {
      kkt.copy.bottomLeftCorner(p, m) = low.a;
      kkt.copy.topRightCorner(m, p) = low.a.transpose();
    }

    bool factored = kkt.factor(0.0);
    if (!factored) {
      const double scale = 1.0 + kkt.copy.cwiseAbs().maxCoeff();
      for (double trial : {1e-13, 1e-10, 1e-7}) {
        if ((factored = kkt.factor(trial * scale))) break;
      }
    }
    if (!factored) {
      out.status = SolveStatus::NumericalFailure;
      out.message = "KKT factorization failed";
      snapshot();
      return out;
    }

    // Newton direction for a Jordan-inverted complementarity target u
    // (so u = lambda^-1 o g_c):
    //   dx, dy from [[B'B, A'], [A, 0]] [dx; dy] = [-r_d - B'(u + W^-T r_g); -r_p]
    //   ds = -(r_g + G dx),  dz = W^-1(u + W^-T(r_g + G dx)).
    const auto newton = [&](const std::vector<Matrix>& u_target,
                            RealVector* dx, RealVector* dy,
                            std::vector<Matrix>* dz_out,
                            std::vector<Matrix>* ds_out) {
      RealVector t1(low.ncone);
      for (size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto& blk = blocks[bi];
        const Matrix rgm = smat_from(blk, rg);
        const Matrix w = blk.rti.adjoint() * rgm * blk.rti;
        const Matrix tot = u_target[bi] + 0.5 * (w + w.adjoint());
        vec_into(blk, tot, &t1);
      }
      RealVector rhs(m + p);
      rhs.head(m) = -rd;
      rhs.head(m).noalias() -= bmat.transpose() * t1;
      if (p > 0) rhs.tail(p) = -rp;

      const RealVector sol = kkt.solve(rhs);
      *dx = sol.head(m);
      *dy = p > 0 ? RealVector(sol.tail(p)) : RealVector::Zero(0);

      RealVector u = rg;
      for (int j = 0; j < m; ++j) {
        const double dxj = (*dx)(j);
        if (dxj == 0.0) continue;
        for (const auto& [k, coef] : low.scols[j]) u(k) -= coef * dxj;
      }
      dz_out->resize(blocks.size());
      ds_out->resize(blocks.size());
      for (size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto& blk = blocks[bi];
        const Matrix um = smat_from(blk, u);
        const Matrix w = blk.rti.adjoint() * um * blk.rti;
        const Matrix inner = u_target[bi] + 0.5 * (w + w.adjoint());
        Matrix dz = blk.rti * inner * blk.rti.adjoint();
        (*dz_out)[bi] = 0.5 * (dz + dz.adjoint());
        (*ds_out)[bi] = -um;
      }
    };

    // Predictor: u = -Lambda.
    std::vector<Matrix> u_aff(blocks.size());
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      u_aff[bi] = Matrix::Zero(blocks[bi].d, blocks[bi].d);
      u_aff[bi].diagonal() = (-blocks[bi].sig).cast<Complex>();
    }
    RealVector dx_aff, dy_aff;
    std::vector<Matrix> dz_aff, ds_aff;
    newton(u_aff, &dx_aff, &dy_aff, &dz_aff, &ds_aff);

    double alpha_aff = 1.0;
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      alpha_aff = std::min(alpha_aff, max_step(blocks[bi].ls, ds_aff[bi]));
      alpha_aff = std::min(alpha_aff, max_step(blocks[bi].lz, dz_aff[bi]));
    }

    double gap_aff = 0.0;
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& blk = blocks[bi];
      gap_aff += ((blk.s + alpha_aff * ds_aff[bi]).adjoint() *
                  (blk.z + alpha_aff * dz_aff[bi]))
                     .real()
                     .trace();
    }
    const double mu_aff = std::max(gap_aff / nu, 0.0);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    // Corrector target: lambda o (ds~ + dz~) = sigma mu e - lambda^2 - ds~ o dz~,
    // Jordan-inverted against Lambda entrywise.
    std::vector<Matrix> u_comb(blocks.size());
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& blk = blocks[bi];
      const Matrix ds_t = blk.rti.adjoint() * ds_aff[bi] * blk.rti;
      const Matrix dz_t = blk.r.adjoint() * dz_aff[bi] * blk.r;
      Matrix rhs_m = -0.5 * (ds_t * dz_t + dz_t * ds_t);
      for (int i = 0; i < blk.d; ++i)
        rhs_m(i, i) += sigma * mu - blk.sig(i) * blk.sig(i);
      Matrix g(blk.d, blk.d);
      for (int a = 0; a < blk.d; ++a)
        for (int b = 0; b < blk.d; ++b)
          g(a, b) = 2.0 * rhs_m(a, b) / (blk.sig(a) + blk.sig(b));
      u_comb[bi] = 0.5 * (g + g.adjoint());
    }
    RealVector dx, dy;
    std::vector<Matrix> dz, ds;
    newton(u_comb, &dx, &dy, &dz, &ds);

    double alpha = 1.0;
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      alpha = std::min(alpha, settings.step_frac * max_step(blocks[bi].ls, ds[bi]));
      alpha = std::min(alpha, settings.step_frac * max_step(blocks[bi].lz, dz[bi]));
    }
    if (!std::isfinite(alpha) || alpha <= 1e-13) {
      out.status = SolveStatus::MaxIter;
      out.message = "stalled: step length collapsed";
      snapshot();
      return out;
    }

    x += alpha * dx;
    if (p > 0) y += alpha * dy;
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      auto& blk = blocks[bi];
      blk.s += alpha * ds[bi];
      blk.z += alpha * dz[bi];
      blk.s = 0.5 * (blk.s + blk.s.adjoint().eval());
      blk.z = 0.5 * (blk.z + blk.z.adjoint().eval());
    }
  }

  out.status = SolveStatus::MaxIter;
  out.message = "iteration limit reached";
  out.x = x;
  out.y = y;
  stack_cone(&svec, &zvec);
  out.svec = svec;
  out.zvec = zvec;
  return out;
}

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolverSettings& settings) {
  prog.validate();

  ConicSolution sol;
  const Lowered low = lower_program(prog, settings);
  const int n = low.n_orig;
  const int p_orig = static_cast<int>(prog.rows.size());

  if (low.infeasible) {
    sol.status = SolveStatus::Infeasible;
    sol.message = low.message;
    sol.x = RealVector::Zero(n);
    sol.y = RealVector::Zero(p_orig);
    sol.z = RealVector::Zero(n);
    return sol;
  }
  if (low.unbounded) {
    sol.status = SolveStatus::NumericalFailure;
    sol.message = low.message;
    sol.x = RealVector::Zero(n);
    sol.y = RealVector::Zero(p_orig);
    sol.z = RealVector::Zero(n);
    return sol;
  }

  // Rows touching each coordinate, for multiplier reconstruction.
  std::vector<std::vector<std::pair<int, double>>> coord_rows(n);
  for (int r = 0; r < p_orig; ++r) {
    const auto& row = prog.rows[r];
    for (size_t t = 0; t < row.cols.size(); ++t)
      coord_rows[row.cols[t]].emplace_back(r, row.vals[t]);
  }

  // Reconstructs multipliers of consumed rows from dual stationarity at
  // their pivot coordinates, in elimination order: when coordinate k is
  // eliminated it appears only in its pivot row and in rows consumed (or
  // kept) earlier, whose multipliers are already known.
  const auto reconstruct_consumed = [&](RealVector* y_full,
                                        const RealVector& z_full) {
    for (int k : low.elim_order) {
      const Definition& def = low.defs[k];
      if (def.pivot_row < 0) continue;
      double other = 0.0;
      for (const auto& [r, val] : coord_rows[k])
        if (r != def.pivot_row) other += val * (*y_full)(r);
      (*y_full)(def.pivot_row) =
          (prog.c[k] - z_full(k) - other) / def.pivot_coef;
    }
  };

  // Fully presolved program: every coordinate is pinned by constants.
  if (low.live.empty() && low.b.size() == 0) {
    RealVector x_full(n);
    for (int j = 0; j < n; ++j)
      x_full(j) = low.eliminated[j] ? low.defs[j].constant : 0.0;
    bool feasible = true;
    for (const auto& shape : low.psd) {
      const SvecLayout lay(shape.d, shape.field);
      RealVector seg(lay.dim());
      for (int k = 0; k < lay.dim(); ++k) seg(k) = x_full(shape.coord0 + k);
      Eigen::SelfAdjointEigenSolver<Matrix> es(lay.unvec(seg),
                                               Eigen::EigenvaluesOnly);
      const double lmax = std::abs(es.eigenvalues().maxCoeff());
      if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + lmax)) feasible = false;
    }
    sol.x = x_full;
    sol.y = RealVector::Zero(p_orig);
    sol.z = RealVector::Zero(n);
    if (!feasible) {
      sol.status = SolveStatus::Infeasible;
      sol.message = "pinned cone block is not positive semidefinite";
      return sol;
    }
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += prog.c[j] * x_full(j);
    sol.status = SolveStatus::Optimal;
    sol.primal_obj = sol.dual_obj = obj;
    sol.message = "solved in presolve";
    reconstruct_consumed(&sol.y, sol.z);
    return sol;
  }

  const IpmResult res = run_ipm(low, settings);

  sol.status = res.status;
  sol.message = res.message;
  sol.iterations = res.iterations;
  sol.gap = res.gap;
  sol.rel_gap = res.rel_gap;
  sol.primal_residual = res.pres;
  sol.dual_residual = res.dres;
  sol.primal_obj = res.pobj;
  sol.dual_obj = res.dobj;

  if (res.x.size() == 0) {
    sol.x = RealVector::Zero(n);
    sol.y = RealVector::Zero(p_orig);
    sol.z = RealVector::Zero(n);
    return sol;
  }

  RealVector x_full(n);
  for (int j = 0; j < n; ++j) {
    if (!low.eliminated[j]) {
      x_full(j) = res.x(low.live_index[j]);
    } else {
      const Definition& def = low.defs[j];
      double v = def.constant;
      for (const auto& [lj, coef] : def.terms) v += coef * res.x(lj);
      x_full(j) = v;
    }
  }

  RealVector z_full = RealVector::Zero(n);
  for (const auto& shape : low.psd) {
    const SvecLayout lay(shape.d, shape.field);
    for (int k = 0; k < lay.dim(); ++k)
      z_full(shape.coord0 + k) = res.zvec(shape.cone0 + k);
  }

  // Kept rows carry the sign-flipped internal duals (public convention is
  // z = c - A'y on top of z in the dual cone).
  RealVector y_full = RealVector::Zero(p_orig);
  for (size_t i = 0; i < low.kept_rows.size(); ++i)
    y_full(low.kept_rows[i]) = -res.y(static_cast<int>(i));
  reconstruct_consumed(&y_full, z_full);

  sol.x = x_full;
  sol.y = y_full;
  sol.z = z_full;
  return sol;
}

}  // namespace qmetro
