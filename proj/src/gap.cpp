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
#include "qmetro/gap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>

#include "qmetro/errors.hpp"
#include "qmetro/rng.hpp"

namespace qmetro {

namespace {

void require_two_estimators(const StatisticalModel& m, const EstimatorSet& xs,
                            const char* where) {
  if (m.params() != 2 || xs.params() != 2) {
    std::ostringstream msg;
    msg << where << ": two parameters required, model has " << m.params()
        << " and estimator set has " << xs.params();
    throw WrongArityError(msg.str());
  }
  if (xs.dim() != m.dim()) {
    std::ostringstream msg;
    msg << where << ": estimator dimension " << xs.dim()
        << " does not match model dimension " << m.dim();
    throw DomainError(msg.str());
  }
}

int severity(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return 0;
    case SolveStatus::MaxIter:
      return 1;
    case SolveStatus::Infeasible:
      return 2;
    case SolveStatus::NumericalFailure:
      return 3;
  }
  return 3;
}

SolveStatus worse(SolveStatus a, SolveStatus b) {
  return severity(a) >= severity(b) ? a : b;
}

BoundResult eval_bound(const StatisticalModel& m, const std::string& name,
                       const SolverSettings& settings) {
  const RealMatrix w = RealMatrix::Identity(m.params(), m.params());
  if (name == "ncrb") return ncrb(m, settings);
  if (name == "hcrb") return hcrb(m, w, settings);
  if (name == "nhcrb") return nhcrb(m, w, settings);
  return sld_bound(m);
}

}  // namespace

EstimatorSet mcopy_estimators(const EstimatorSet& xs, int copies,
                              int dim_cap) {
  if (copies < 1) throw DomainError("mcopy_estimators: copies must be >= 1");
  if (xs.x.empty()) {
    throw DomainError("mcopy_estimators: empty estimator set");
  }
  if (copies == 1) return xs;
  EstimatorSet lifted;
  lifted.x.reserve(xs.x.size());
  const double inv = 1.0 / static_cast<double>(copies);
  for (const Matrix& xi : xs.x) {
    Matrix acc = embed_at(xi, 0, copies, dim_cap);
    for (int k = 1; k < copies; ++k) acc += embed_at(xi, k, copies, dim_cap);
    lifted.x.push_back((inv * acc).eval());
  }
  return lifted;
}

Matrix a_matrix(const StatisticalModel& m, const EstimatorSet& xs) {
  require_two_estimators(m, xs, "a_matrix");
  const Matrix rt = matrix_sqrt_psd(m.state());
  const Matrix comm = xs.x[0] * xs.x[1] - xs.x[1] * xs.x[0];
  const Matrix a = Complex(0.0, 1.0) * (rt * comm * rt);
  return (0.5 * (a + a.adjoint().eval())).eval();
}

EqualityCondition equality_condition(const StatisticalModel& m,
                                     const EstimatorSet& xs, double tol) {
  const Matrix a = a_matrix(m, xs);
  const auto [pos, neg] = pos_neg_split(a);
  EqualityCondition cond;
  cond.tr_plus = pos.trace().real();
  cond.tr_minus = neg.trace().real();
  cond.equal = std::min(cond.tr_plus, cond.tr_minus) <= tol;
  return cond;
}

double two_copy_a_decomposition_check(const StatisticalModel& m,
                                      const EstimatorSet& xs, int dim_cap) {
  require_two_estimators(m, xs, "two_copy_a_decomposition_check");
  const StatisticalModel m2 = tensor_power_model(m, 2, dim_cap);
  const Matrix lhs = a_matrix(m2, mcopy_estimators(xs, 2, dim_cap));
  const Matrix a = a_matrix(m, xs);
  const Matrix rhs =
      0.25 * (kron(a, m.state(), dim_cap) + kron(m.state(), a, dim_cap));
  return (lhs - rhs).norm();
}

const char* to_string(BoundPair pair) {
  switch (pair) {
    case BoundPair::NcrbHcrb:
      return "ncrb-hcrb";
    case BoundPair::NhcrbSldcrb:
      return "nhcrb-sldcrb";
    case BoundPair::NhcrbHcrb:
      return "nhcrb-hcrb";
    case BoundPair::HcrbSldcrb:
      return "hcrb-sldcrb";
  }
  return "unknown";
}

const char* to_string(GapVerdict verdict) {
  switch (verdict) {
    case GapVerdict::Persists:
      return "persists";
    case GapVerdict::Closes:
      return "closes";
    case GapVerdict::BelowTolerance:
      return "below-tolerance";
  }
  return "unknown";
}

GapReport gap_report(const StatisticalModel& m, BoundPair pair,
                     const std::vector<int>& copies_list,
                     const SolverSettings& settings) {
  if (copies_list.empty()) {
    throw DomainError("gap_report: empty copies list");
  }
  GapReport report;
  report.pair = pair;
  report.model = m.label();
  switch (pair) {
    case BoundPair::NcrbHcrb:
      report.first = "ncrb";
      report.second = "hcrb";
      break;
    case BoundPair::NhcrbSldcrb:
      report.first = "nhcrb";
      report.second = "sldcrb";
      break;
    case BoundPair::NhcrbHcrb:
      report.first = "nhcrb";
      report.second = "hcrb";
      break;
    case BoundPair::HcrbSldcrb:
      report.first = "hcrb";
      report.second = "sldcrb";
      break;
  }

  for (int copies : copies_list) {
    if (copies < 1) throw DomainError("gap_report: copies must be >= 1");
    GapPoint pt;
    pt.copies = copies;
    try {
      const StatisticalModel mm =
          copies == 1 ? m : tensor_power_model(m, copies);
      const BoundResult a = eval_bound(mm, report.first, settings);
      const BoundResult b = eval_bound(mm, report.second, settings);
      pt.first = a.value;
      pt.second = b.value;
      pt.delta = a.value - b.value;
      pt.scaled_first = copies * a.value;
      pt.scaled_second = copies * b.value;
      pt.first_status = a.status;
      pt.second_status = b.status;
      pt.usable = severity(worse(a.status, b.status)) <= severity(SolveStatus::MaxIter);
    } catch (const Error& e) {
      pt.usable = false;
      pt.note = e.what();
      pt.first_status = SolveStatus::NumericalFailure;
      pt.second_status = SolveStatus::NumericalFailure;
    }
    report.points.push_back(std::move(pt));
  }

  const GapPoint* base = nullptr;
  for (const GapPoint& pt : report.points) {
    if (pt.usable && (base == nullptr || pt.copies < base->copies)) base = &pt;
  }
  if (base == nullptr) {
    throw NumericalError("gap_report: no usable bound evaluations");
  }
  if (base->delta <= report.threshold) {
    report.verdict = GapVerdict::BelowTolerance;
  } else {
    report.verdict = GapVerdict::Persists;
    for (const GapPoint& pt : report.points) {
      if (!pt.usable || &pt == base) continue;
      if (pt.delta <= report.threshold) report.verdict = GapVerdict::Closes;
    }
  }
  return report;
}

namespace {

struct BmParts {
  double first1 = 0.0;    // tr{S (X^2 + Y^2)} at one copy
  double comm_nuc = 0.0;  // ||i [X, Y]||_*
  double log_coef = 0.0;  // log of d^(M-1) / (M^2 ||S^-1||_*^M)
};

BmParts bm_parts(const StatisticalModel& m, const EstimatorSet& xs, int copies,
                 const char* where) {
  require_two_estimators(m, xs, where);
  if (copies < 1) {
    std::ostringstream msg;
    msg << where << ": copies must be >= 1";
    throw DomainError(msg.str());
  }
  if (!m.full_rank()) {
    std::ostringstream msg;
    msg << where << ": state must be full rank so ||S^-1||_* is finite";
    throw SingularStateError(msg.str());
  }
  const Matrix& x = xs.x[0];
  const Matrix& y = xs.x[1];
  const double mc = static_cast<double>(copies);
  BmParts parts;
  parts.first1 = (m.state() * (x * x + y * y)).trace().real();
  parts.comm_nuc = trabs(Complex(0.0, 1.0) * (x * y - y * x));
  const double tr_sinv = m.support().eigenvalues.cwiseInverse().sum();
  parts.log_coef = (mc - 1.0) * std::log(static_cast<double>(m.dim())) -
                   mc * std::log(tr_sinv) - 2.0 * std::log(mc);
  return parts;
}

}  // namespace

double bm_lower_bound(const StatisticalModel& m, const EstimatorSet& xs,
                      int copies) {
  const BmParts parts = bm_parts(m, xs, copies, "bm_lower_bound");
  return parts.first1 / copies + std::exp(parts.log_coef) * parts.comm_nuc;
}

double bm_lower_bound_excess(const StatisticalModel& m, const EstimatorSet& xs,
                             int copies, double reference) {
  const BmParts parts = bm_parts(m, xs, copies, "bm_lower_bound_excess");
  return (parts.first1 - reference) / copies +
         std::exp(parts.log_coef) * parts.comm_nuc;
}

double trabs_sz_sum(double s_z, int copies) {
  if (!(std::abs(s_z) <= 1.0)) {
    throw DomainError("trabs_sz_sum: |s_z| must be <= 1");
  }
  if (copies < 1) throw DomainError("trabs_sz_sum: copies must be >= 1");
  const double p = 0.5 * (1.0 + s_z);
  const double q = 0.5 * (1.0 - s_z);
  const double half_m = 0.5 * copies;
  double sum = 0.0;
  if (copies <= 60) {
    for (int j = 0; j <= copies; ++j) {
      double coef = 1.0;
      for (int i = 1; i <= j; ++i) {
        coef *= static_cast<double>(copies - j + i) / i;
      }
      sum += coef * std::pow(p, j) * std::pow(q, copies - j) *
             std::abs(half_m - j);
    }
  } else {
    // Binomial weights overflow doubles long before M = 100; accumulate the
    // log of each term instead.
    const double lp = p > 0.0 ? std::log(p) : 0.0;
    const double lq = q > 0.0 ? std::log(q) : 0.0;
    const double lgm = std::lgamma(copies + 1.0);
    for (int j = 0; j <= copies; ++j) {
      if ((p == 0.0 && j > 0) || (q == 0.0 && j < copies)) continue;
      const double lw = lgm - std::lgamma(j + 1.0) -
                        std::lgamma(copies - j + 1.0) + j * lp +
                        (copies - j) * lq;
      sum += std::exp(lw) * std::abs(half_m - j);
    }
  }
  return 2.0 * sum;
}

double sz_ncrb_upper(double s_z, int copies) {
  const double mc = static_cast<double>(copies);
  return 2.0 / mc + 2.0 / (mc * mc) * trabs_sz_sum(s_z, copies);
}

namespace {

Matrix gaussian_hermitian(Rng& rng, int d) {
  Matrix h(d, d);
  for (int r = 0; r < d; ++r) {
    h(r, r) = rng.gaussian();
    for (int c = r + 1; c < d; ++c) {
      const Complex z = rng.cgaussian();
      h(r, c) = z;
      h(c, r) = std::conj(z);
    }
  }
  return h;
}

// Removes the kernel-kernel block and restores tracelessness on the support
// diagonal, keeping the draw a valid derivative of the rank-deficient state.
Matrix consistency_project(const Matrix& h, const SupportDecomposition& sd) {
  const int d = static_cast<int>(h.rows());
  const int r = sd.rank;
  if (r == d) {
    return (h - (h.trace() / static_cast<double>(d)) *
                    Matrix::Identity(d, d))
        .eval();
  }
  const Matrix u = sd.basis.leftCols(r);
  const Matrix v = sd.basis.rightCols(d - r);
  Matrix out = h - v * (v.adjoint() * h * v) * v.adjoint();
  out -= (out.trace() / static_cast<double>(r)) * (u * u.adjoint());
  return out;
}

}  // namespace

StatisticalModel random_model_trial(const RandomModelSpec& spec, int trial) {
  if (spec.dim < 2) throw DomainError("random_model: dim must be >= 2");
  if (spec.rank < 1 || spec.rank > spec.dim) {
    throw DomainError("random_model: rank must lie in [1, dim]");
  }
  if (spec.params < 1 || spec.params > spec.dim * spec.dim - 1) {
    throw DomainError("random_model: params must lie in [1, dim^2 - 1]");
  }
  if (trial < 0) throw DomainError("random_model: trial must be >= 0");

  Rng rng(splitmix64(splitmix64(spec.seed) +
                     static_cast<std::uint64_t>(trial)));
  Matrix g(spec.dim, spec.rank);
  for (int r = 0; r < spec.dim; ++r) {
    for (int c = 0; c < spec.rank; ++c) g(r, c) = rng.cgaussian();
  }
  Matrix state = g * g.adjoint();
  state /= state.trace().real();
  const SupportDecomposition sd = support_decomposition(state);

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Matrix> derivs;
    derivs.reserve(spec.params);
    for (int i = 0; i < spec.params; ++i) {
      derivs.push_back(consistency_project(gaussian_hermitian(rng, spec.dim), sd));
    }
    RealMatrix gram(spec.params, spec.params);
    for (int i = 0; i < spec.params; ++i) {
      for (int j = i; j < spec.params; ++j) {
        gram(i, j) = (derivs[i] * derivs[j]).trace().real();
        gram(j, i) = gram(i, j);
      }
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> ges(gram);
    const double gmax = ges.eigenvalues().maxCoeff();
    if (gmax <= 0.0 || ges.eigenvalues().minCoeff() <= 1e-10 * gmax) continue;

    std::ostringstream label;
    label << "random(d=" << spec.dim << ",r=" << spec.rank
          << ",n=" << spec.params << ",seed=" << spec.seed
          << ",trial=" << trial << ")";
    return StatisticalModel(std::move(state), std::move(derivs), label.str());
  }
  throw NumericalError(
      "random_model: 100 redraws exhausted without independent derivatives");
}

std::vector<StatisticalModel> random_model(const RandomModelSpec& spec) {
  if (spec.trials < 0) throw DomainError("random_model: trials must be >= 0");
  std::vector<StatisticalModel> models;
  models.reserve(spec.trials);
  for (int t = 0; t < spec.trials; ++t) {
    models.push_back(random_model_trial(spec, t));
  }
  return models;
}

std::optional<ScatterRow> persistence_scatter_trial(
    const StatisticalModel& m, int trial, int copies,
    const SolverSettings& settings) {
  if (copies < 2) throw DomainError("persistence_scatter: copies must be >= 2");
  ScatterRow row;
  row.trial = trial;
  row.dim = m.dim();
  row.rank = m.rank();
  row.params = m.params();
  const RealMatrix w = RealMatrix::Identity(m.params(), m.params());
  try {
    const BoundResult nh1 = nhcrb(m, w, settings);
    const BoundResult h1 = hcrb(m, w, settings);
    const StatisticalModel m2 = tensor_power_model(m, copies);
    const BoundResult nh2 = nhcrb(m2, w, settings);
    const BoundResult h2 = hcrb(m2, w, settings);
    row.gap1_half = 0.5 * (nh1.value - h1.value);
    row.gap2 = nh2.value - h2.value;
    row.status1 = worse(nh1.status, h1.status);
    row.status2 = worse(nh2.status, h2.status);
  } catch (const Error&) {
    return std::nullopt;
  }
  return row;
}

std::vector<ScatterRow> persistence_scatter(
    const std::vector<StatisticalModel>& models, int copies,
    const SolverSettings& settings) {
  if (copies < 2) throw DomainError("persistence_scatter: copies must be >= 2");
  std::vector<ScatterRow> rows;
  rows.reserve(models.size());
  for (size_t t = 0; t < models.size(); ++t) {
    const std::optional<ScatterRow> row = persistence_scatter_trial(
        models[t], static_cast<int>(t), copies, settings);
    if (row) rows.push_back(*row);
  }
  return rows;
}

std::vector<ScatterRow> persistence_scatter(const RandomModelSpec& spec,
                                            int copies,
                                            const SolverSettings& settings) {
  return persistence_scatter(random_model(spec), copies, settings);
}

std::optional<RandomGapRow> random_gap_trial(const RandomModelSpec& spec,
                                             int trial,
                                             const SolverSettings& settings) {
  if (spec.params != 2) {
    throw WrongArityError("random_gap_study: the Nagaoka bound needs n = 2");
  }
  RandomGapRow row;
  row.trial = trial;
  row.dim = spec.dim;
  try {
    const StatisticalModel m = random_model_trial(spec, trial);
    const BoundResult n = ncrb(m, settings);
    const BoundResult h =
        hcrb(m, RealMatrix::Identity(m.params(), m.params()), settings);
    row.ncrb = n.value;
    row.hcrb = h.value;
    row.rel_gap = (n.value - h.value) / h.value;
    row.status = worse(n.status, h.status);
  } catch (const Error&) {
    return std::nullopt;
  }
  return row;
}

std::vector<RandomGapRow> random_gap_study(const RandomModelSpec& spec,
                                           const SolverSettings& settings) {
  std::vector<RandomGapRow> rows;
  rows.reserve(spec.trials);
  for (int t = 0; t < spec.trials; ++t) {
    const std::optional<RandomGapRow> row = random_gap_trial(spec, t, settings);
    if (row) rows.push_back(*row);
  }
  return rows;
}

}  // namespace qmetro
