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
// The fourteen acceptance criteria. Each criterion is a pure function of
// fixed seeds and the library under test; the runner times them, catches
// library errors into failures, and optionally shards across threads.

#include "qmetro/acceptance.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qmetro/bounds.hpp"
#include "qmetro/catalog.hpp"
#include "qmetro/conic.hpp"
#include "qmetro/errors.hpp"
#include "qmetro/gap.hpp"
#include "qmetro/linalg.hpp"
#include "qmetro/model.hpp"
#include "qmetro/rng.hpp"

namespace qmetro {

namespace {

constexpr double kPi = std::numbers::pi;

struct Ctx {
  AcceptanceLevel level = AcceptanceLevel::Fast;
  bool perturb = false;
};

using Verdict = std::pair<bool, std::string>;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

StatisticalModel seeded_model(int d, int r, int n, std::uint64_t seed) {
  RandomModelSpec spec;
  spec.dim = d;
  spec.rank = r;
  spec.params = n;
  spec.trials = 1;
  spec.seed = seed;
  return random_model_trial(spec, 0);
}

Matrix random_hermitian(Rng& rng, int d) {
  Matrix h(d, d);
  for (int r = 0; r < d; ++r) {
    h(r, r) = rng.gaussian();
    for (int c = r + 1; c < d; ++c) {
      h(r, c) = rng.cgaussian();
      h(c, r) = std::conj(h(r, c));
    }
  }
  return h;
}

// 1. Closed forms for the diffusion probe against the SDP values on a
// 10 x 10 parameter grid.
Verdict phase_diffusion_oracle_agreement(const Ctx&) {
  double dev_h = 0.0;
  double dev_n = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double lambda = 0.2 + i * (kPi - 0.4) / 9.0;
    for (int j = 0; j < 10; ++j) {
      const double delta = 0.05 + j * 0.95 / 9.0;
      const StatisticalModel m = phase_diffusion(lambda, 0.0, delta);
      dev_h = std::max(dev_h,
                       std::abs(hcrb(m).value -
                                phase_diffusion_hcrb_oracle(lambda, delta)));
      dev_n = std::max(dev_n,
                       std::abs(ncrb(m).value -
                                phase_diffusion_ncrb_oracle(lambda, delta)));
    }
  }
  std::ostringstream detail;
  detail << "hcrb dev " << sci(dev_h) << ", ncrb dev " << sci(dev_n)
         << " over 100 grid points";
  return {dev_h <= 1e-5 && dev_n <= 1e-5, detail.str()};
}

// 2. Known-polarization qubit value 2 + 2|s_z|.
Verdict qubit_sz_hcrb_value(const Ctx& ctx) {
  double dev = 0.0;
  for (const double s : {0.2, -0.2, 0.5, -0.5, 0.9, -0.9}) {
    const double target =
        2.0 + 2.0 * std::abs(s) + (ctx.perturb ? 1e-3 : 0.0);
    dev = std::max(dev, std::abs(hcrb(qubit_sz(s)).value - target));
  }
  std::ostringstream detail;
  detail << "max dev " << sci(dev) << " across six polarizations";
  if (ctx.perturb) detail << " (reference deliberately shifted)";
  return {dev <= 1e-6, detail.str()};
}

// 3. Entangled-pair closed forms and the bound coincidence.
Verdict bell_damping_closed_forms(const Ctx&) {
  double dev_h = 0.0;
  double dev_nh = 0.0;
  double dev_eq = 0.0;
  for (const double eps : {0.1, 0.3, 0.5, 0.7}) {
    const StatisticalModel m = bell_phase_damping(eps);
    const double hc = hcrb(m).value;
    const double inv = 1.0 / ((1.0 - eps) * (1.0 - eps));
    dev_h = std::max(dev_h, std::abs(hc - (2.0 + inv)));
    dev_nh =
        std::max(dev_nh, std::abs(nhcrb(m).value - (4.0 / (2.0 - eps) + inv)));
    dev_eq = std::max(dev_eq, std::abs(hc - sldcrb(m)));
  }
  std::ostringstream detail;
  detail << "hcrb dev " << sci(dev_h) << ", nhcrb dev " << sci(dev_nh)
         << ", |hcrb - sldcrb| " << sci(dev_eq);
  return {dev_h <= 1e-5 && dev_nh <= 1e-5 && dev_eq <= 1e-7, detail.str()};
}

// 4. sldcrb <= hcrb <= ncrb and nhcrb on the catalog and 200 random models.
Verdict bound_ordering_chain(const Ctx&) {
  const double slack = 1e-7;
  double worst = 0.0;  // most negative margin seen
  int models = 0;
  const auto check = [&](const StatisticalModel& m) {
    const double sld = sldcrb(m);
    const double h = hcrb(m).value;
    worst = std::min(worst, h - sld);
    worst = std::min(worst, nhcrb(m).value - h);
    if (m.params() == 2) worst = std::min(worst, ncrb(m).value - h);
    ++models;
  };
  for (const CatalogEntry& entry : catalog()) {
    std::vector<double> args;
    for (const CatalogParam& p : entry.params) args.push_back(p.fallback);
    check(entry.make(args));
  }
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 3;
    const int n = 2 + (t / 3) % 2;
    const int r = d >= 3 && t % 2 == 1 ? d - 1 : d;
    check(seeded_model(d, r, n, 9000 + t));
  }
  std::ostringstream detail;
  detail << models << " models, worst margin " << sci(worst);
  return {worst >= -slack, detail.str()};
}

// 5. Two-copy additivity of the Holevo value, subadditivity of the Nagaoka
// value, on 20 random qubit models.
Verdict additivity_and_subadditivity(const Ctx&) {
  double rel_dev = 0.0;
  double sub_violation = 0.0;
  for (int t = 0; t < 20; ++t) {
    const StatisticalModel m = seeded_model(2, 2, 2, 9100 + t);
    const StatisticalModel m2 = tensor_power_model(m, 2);
    const double h1 = hcrb(m).value;
    const double h2 = hcrb(m2).value;
    rel_dev = std::max(rel_dev, std::abs(2.0 * h2 - h1) / h1);
    const double n1 = ncrb(m).value;
    const double n2 = ncrb(m2).value;
    sub_violation = std::max(sub_violation, 2.0 * n2 - n1);
  }
  std::ostringstream detail;
  detail << "additivity rel dev " << sci(rel_dev) << ", subadditivity excess "
         << sci(sub_violation);
  return {rel_dev <= 1e-5 && sub_violation <= 1e-6, detail.str()};
}

// 6. Nagaoka equals Holevo on pure states.
Verdict pure_state_equality(const Ctx&) {
  double dev = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int d = t < 10 ? 2 : 3;
    const StatisticalModel m = seeded_model(d, 1, 2, 9200 + t);
    dev = std::max(dev, std::abs(ncrb(m).value - hcrb(m).value));
  }
  std::ostringstream detail;
  detail << "max |ncrb - hcrb| " << sci(dev) << " on 20 pure models";
  return {dev <= 1e-6, detail.str()};
}

// 7. The function gap |F_N - F_H| <= 1e-8 agrees with the split criterion
// min(tr A+, tr A-) <= 1e-8 on 200 (model, estimator) pairs.
Verdict equality_criterion_equivalence(const Ctx&) {
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 2;
    const int r = t % 4 == 3 ? d - 1 : d;
    const StatisticalModel m = seeded_model(d, r, 2, 9300 + t);
    EstimatorSet xs;
    if (t % 5 == 4) {
      Matrix x = Matrix::Zero(d, d);
      Matrix y = Matrix::Zero(d, d);
      for (int k = 0; k < d; ++k) {
        x(k, k) = 0.4 + 0.3 * k;
        y(k, k) = 1.0 - 0.5 * k;
      }
      xs.x = {x, y};
    } else {
      Rng rng(splitmix64(9300 + t));
      xs.x = {random_hermitian(rng, d), random_hermitian(rng, d)};
    }
    const double gap = nagaoka_function(m, xs) - holevo_function(m, xs);
    const EqualityCondition cond = equality_condition(m, xs);
    const bool by_gap = std::abs(gap) <= 1e-8;
    const bool by_split = std::min(cond.tr_plus, cond.tr_minus) <= 1e-8;
    if (by_gap != by_split) ++mismatches;
  }
  std::ostringstream detail;
  detail << mismatches << " predicate mismatches in 200 pairs";
  return {mismatches == 0, detail.str()};
}

// 8. Gaps persist at two copies where they should and stay closed where
// they must.
Verdict gap_persistence_two_copies(const Ctx& ctx) {
  const GapReport pd = gap_report(phase_diffusion(0.3, 0.0, 0.3),
                                  BoundPair::NcrbHcrb, {1, 2});
  const bool pd_ok = pd.points[0].usable && pd.points[1].usable &&
                     pd.points[0].delta > 1e-3 && pd.points[1].delta > 1e-6;

  const StatisticalModel cls = classical_diagonal(
      (RealVector(3) << 0.5, 0.3, 0.2).finished(),
      {(RealVector(3) << 0.5, -0.5, 0.0).finished(),
       (RealVector(3) << 0.0, 0.5, -0.5).finished()});
  const GapReport cl = gap_report(cls, BoundPair::NcrbHcrb, {1, 2});
  const bool cl_ok = cl.points[0].usable && cl.points[1].usable &&
                     std::abs(cl.points[0].delta) <= 1e-7 &&
                     std::abs(cl.points[1].delta) <= 1e-7;

  const bool full = ctx.level == AcceptanceLevel::Full;
  const std::vector<int> bell_copies = full ? std::vector<int>{1, 2}
                                            : std::vector<int>{1};
  const GapReport bell = gap_report(bell_phase_damping(0.5),
                                    BoundPair::NhcrbSldcrb, bell_copies);
  bool bell_ok = bell.points[0].usable && bell.points[0].delta > 0.1;
  if (full)
    bell_ok = bell_ok && bell.points[1].usable && bell.points[1].delta > 1e-6;

  std::ostringstream detail;
  detail << "diffusion " << sci(pd.points[0].delta) << "/"
         << sci(pd.points[1].delta) << ", classical "
         << sci(std::abs(cl.points[0].delta)) << "/"
         << sci(std::abs(cl.points[1].delta)) << ", pair "
         << sci(bell.points[0].delta);
  if (full)
    detail << "/" << sci(bell.points[1].delta);
  else
    detail << " (two-copy pair study runs at full level)";
  return {pd_ok && cl_ok && bell_ok, detail.str()};
}

// 9. The closed-form copy bound exceeds the Holevo rate at every copy count
// and never beats the directly evaluated tensor-power Nagaoka function.
Verdict bm_bound_positivity(const Ctx&) {
  const StatisticalModel m = phase_diffusion(kPi / 2, 0.0, 1.0);
  const BoundResult h = hcrb(m);
  const double oracle = phase_diffusion_hcrb_oracle(kPi / 2, 1.0);
  if (std::abs(h.value - oracle) > 1e-6)
    return {false, "holevo solve disagrees with its closed form"};
  double min_excess = std::numeric_limits<double>::infinity();
  for (int copies = 1; copies <= 100; ++copies) {
    min_excess =
        std::min(min_excess, bm_lower_bound_excess(m, h.optimizer, copies, oracle));
  }
  double worst_slack = 0.0;
  for (int copies = 1; copies <= 4; ++copies) {
    const double direct =
        nagaoka_function(tensor_power_model(m, copies),
                         mcopy_estimators(h.optimizer, copies));
    worst_slack = std::max(
        worst_slack, bm_lower_bound(m, h.optimizer, copies) - direct);
  }
  std::ostringstream detail;
  detail << "min excess " << sci(min_excess) << " over 100 copy counts, "
         << "direct-function slack " << sci(worst_slack);
  return {min_excess > 0.0 && worst_slack <= 1e-9, detail.str()};
}

// 10. The binomial trace sum against an independent brute force, its M = 50
// per-copy value, and the monotone approach of the scaled upper bound.
Verdict z_family_asymptotics(const Ctx&) {
  double brute_dev = 0.0;
  for (const double s : {0.0, 0.3, -0.3, 0.6, 0.9, -0.9}) {
    const double p = 0.5 * (1.0 + s);
    const double q = 0.5 * (1.0 - s);
    for (int copies = 1; copies <= 10; ++copies) {
      double brute = 0.0;
      for (unsigned mask = 0; mask < (1u << copies); ++mask) {
        const int ones = std::popcount(mask);
        brute += std::pow(p, copies - ones) * std::pow(q, ones) *
                 std::abs(static_cast<double>(copies - 2 * ones));
      }
      brute_dev =
          std::max(brute_dev, std::abs(trabs_sz_sum(s, copies) - brute));
    }
  }

  double per_copy_dev = 0.0;
  bool monotone = true;
  bool above = true;
  double final_gap = 0.0;
  for (const double s : {0.3, 0.6, 0.9}) {
    per_copy_dev =
        std::max(per_copy_dev, std::abs(trabs_sz_sum(s, 50) / 50.0 - s));
    const double limit = 2.0 + 2.0 * s;
    double prev = std::numeric_limits<double>::infinity();
    for (const int copies : {2, 4, 10, 60}) {
      const double scaled = copies * sz_ncrb_upper(s, copies);
      monotone = monotone && scaled < prev;
      above = above && scaled > limit;
      prev = scaled;
    }
    final_gap = std::max(final_gap, prev - limit);
  }
  std::ostringstream detail;
  detail << "brute dev " << sci(brute_dev) << ", M=50 dev "
         << sci(per_copy_dev) << ", scaled bound gap at M=60 "
         << sci(final_gap);
  const bool pass = brute_dev <= 1e-12 && per_copy_dev <= 0.05 && monotone &&
                    above && final_gap <= 0.2;
  return {pass, detail.str()};
}

// 11. Relative Nagaoka-Holevo gaps of random full-rank models stay inside
// (0, 1].
Verdict random_gap_interval(const Ctx&) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  int rows_total = 0;
  for (const int d : {2, 3, 4}) {
    RandomModelSpec spec;
    spec.dim = d;
    spec.rank = d;
    spec.params = 2;
    spec.trials = 500;
    spec.seed = 13000 + d;
    const std::vector<RandomGapRow> rows = random_gap_study(spec);
    rows_total += static_cast<int>(rows.size());
    for (const RandomGapRow& row : rows) {
      lo = std::min(lo, row.rel_gap);
      hi = std::max(hi, row.rel_gap);
    }
  }
  std::ostringstream detail;
  detail << rows_total << " trials, rel gap in [" << sci(lo) << ", "
         << sci(hi) << "]";
  return {rows_total == 1500 && lo > 0.0 && hi <= 1.0, detail.str()};
}

// 12. The Holevo optimizer is unique in the quotient: perturbed solver
// starts land on the same value and the same sandwiched estimators.
Verdict optimizer_uniqueness(const Ctx&) {
  double value_dev = 0.0;
  double opt_dev = 0.0;
  for (int t = 0; t < 20; ++t) {
    const StatisticalModel m = t < 10 ? seeded_model(3, 2, 2, 14000 + t)
                                      : seeded_model(2, 1, 2, 14000 + t);
    const BoundResult a = hcrb(m);
    SolverSettings perturbed;
    perturbed.init_perturb_seed = 97;
    perturbed.init_scale = 1.3;
    const BoundResult b = hcrb(m, RealMatrix::Identity(2, 2), perturbed);
    value_dev = std::max(value_dev, std::abs(a.value - b.value));
    const Matrix rt = matrix_sqrt_psd(m.state());
    for (int i = 0; i < 2; ++i) {
      opt_dev = std::max(
          opt_dev,
          (rt * (a.optimizer.x[i] - b.optimizer.x[i]) * rt).norm());
    }
  }
  std::ostringstream detail;
  detail << "value dev " << sci(value_dev) << ", sandwiched optimizer dev "
         << sci(opt_dev) << " on 20 rank-deficient models";
  return {value_dev <= 1e-7 && opt_dev <= 1e-5, detail.str()};
}

// 13. The small-diffusion ratio limit and its disappearance under the
// variance parameterization.
Verdict small_delta_limit(const Ctx&) {
  const StatisticalModel m = phase_diffusion(kPi / 2, 0.0, 1e-3);
  const double ratio = ncrb(m).value / hcrb(m).value;
  const double ratio_target = 1.0 + 2.0 * std::sqrt(2.0) / 3.0;
  const double ratio_dev = std::abs(ratio - ratio_target);

  double tilde_dev = 0.0;
  for (const double lambda : {kPi / 2, 1.0}) {
    const StatisticalModel mt = phase_diffusion_reparam_tilde(lambda, 0.0, 0.0);
    const double target = 1.0 / (std::sin(lambda) * std::sin(lambda));
    tilde_dev = std::max(tilde_dev, std::abs(hcrb(mt).value - target));
    tilde_dev = std::max(tilde_dev, std::abs(ncrb(mt).value - target));
  }
  std::ostringstream detail;
  detail << "ratio dev " << sci(ratio_dev) << ", zero-variance dev "
         << sci(tilde_dev);
  return {ratio_dev <= 1e-3 && tilde_dev <= 1e-5, detail.str()};
}

// min tr(P + Q) s.t. P - Q = A over psd P, Q; optimum trabs(A).
ConicProgram trace_norm_program(const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  ConicProgram prog;
  prog.blocks.push_back(psd_block(d));
  prog.blocks.push_back(psd_block(d));
  const SvecLayout lay(d, BlockField::ComplexHermitian);
  const int off_p = prog.block_offset(0);
  const int off_q = prog.block_offset(1);
  prog.c = RealVector::Zero(prog.total_dim());
  for (int i = 0; i < d; ++i) {
    prog.c(off_p + lay.diag(i)) = 1.0;
    prog.c(off_q + lay.diag(i)) = 1.0;
  }
  const RealVector av = lay.vec(a);
  prog.b = RealVector(lay.dim());
  for (int k = 0; k < lay.dim(); ++k) {
    SparseRow row;
    row.cols = {off_p + k, off_q + k};
    row.vals = {1.0, -1.0};
    prog.rows.push_back(row);
    prog.b(k) = av(k);
  }
  return prog;
}

// min tr V over real symmetric V >= G; optimum tr Re G + trabs(Im G).
ConicProgram gram_program(const Matrix& g) {
  const int d = static_cast<int>(g.rows());
  ConicProgram prog;
  const SvecLayout rlay(d, BlockField::RealSymmetric);
  const SvecLayout clay(d, BlockField::ComplexHermitian);
  prog.blocks.push_back(free_block(rlay.dim()));
  prog.blocks.push_back(psd_block(d));
  const int off_v = prog.block_offset(0);
  const int off_t = prog.block_offset(1);
  prog.c = RealVector::Zero(prog.total_dim());
  for (int i = 0; i < d; ++i) prog.c(off_v + rlay.diag(i)) = 1.0;
  std::vector<double> rhs;
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < c; ++r) {
      SparseRow re_row;
      re_row.cols = {off_t + clay.re(r, c), off_v + rlay.re(r, c)};
      re_row.vals = {1.0, -1.0};
      prog.rows.push_back(re_row);
      rhs.push_back(-std::sqrt(2.0) * g(r, c).real());
      SparseRow im_row;
      im_row.cols = {off_t + clay.im(r, c)};
      im_row.vals = {1.0};
      prog.rows.push_back(im_row);
      rhs.push_back(-std::sqrt(2.0) * g(r, c).imag());
    }
    SparseRow diag_row;
    diag_row.cols = {off_t + clay.diag(c), off_v + rlay.diag(c)};
    diag_row.vals = {1.0, -1.0};
    prog.rows.push_back(diag_row);
    rhs.push_back(-g(c, c).real());
  }
  prog.b = Eigen::Map<RealVector>(rhs.data(), static_cast<int>(rhs.size()));
  return prog;
}

// 14. The solver reproduces the two closed-form norm identities.
Verdict solver_norm_identities(const Ctx&) {
  double trace_dev = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 15;
    Rng rng(splitmix64(15000 + t));
    const Matrix a = random_hermitian(rng, d);
    const auto sol = solve(trace_norm_program(a));
    if (sol.status != SolveStatus::Optimal)
      return {false, "trace-norm solve not optimal at trial " +
                         std::to_string(t)};
    trace_dev = std::max(trace_dev, std::abs(sol.primal_obj - trabs(a)));
  }
  double gram_dev = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 7;
    Rng rng(splitmix64(15100 + t));
    Matrix f(d + 1, d);
    for (int r = 0; r < d + 1; ++r)
      for (int c = 0; c < d; ++c) f(r, c) = rng.cgaussian();
    const Matrix g = (f.adjoint() * f).eval();
    const Matrix imag_part = (g - g.conjugate()) / Complex(0.0, 2.0);
    const double target =
        g.trace().real() + trabs(Complex(0.0, 1.0) * imag_part);
    const auto sol = solve(gram_program(g));
    if (sol.status != SolveStatus::Optimal)
      return {false,
              "gram solve not optimal at trial " + std::to_string(t)};
    gram_dev = std::max(gram_dev, std::abs(sol.primal_obj - target));
  }
  std::ostringstream detail;
  detail << "trace-norm dev " << sci(trace_dev) << ", gram dev "
         << sci(gram_dev) << " over 100 + 100 programs";
  return {trace_dev <= 1e-8 && gram_dev <= 1e-8, detail.str()};
}

struct Criterion {
  int number;
  const char* name;
  Verdict (*run)(const Ctx&);
};

constexpr Criterion kCriteria[] = {
    {1, "phase-diffusion-oracle-agreement", phase_diffusion_oracle_agreement},
    {2, "qubit-sz-hcrb-value", qubit_sz_hcrb_value},
    {3, "bell-damping-closed-forms", bell_damping_closed_forms},
    {4, "bound-ordering-chain", bound_ordering_chain},
    {5, "additivity-and-subadditivity", additivity_and_subadditivity},
    {6, "pure-state-equality", pure_state_equality},
    {7, "equality-criterion-equivalence", equality_criterion_equivalence},
    {8, "gap-persistence-two-copies", gap_persistence_two_copies},
    {9, "bm-bound-positivity", bm_bound_positivity},
    {10, "z-family-asymptotics", z_family_asymptotics},
    {11, "random-gap-interval", random_gap_interval},
    {12, "optimizer-uniqueness", optimizer_uniqueness},
    {13, "small-delta-limit", small_delta_limit},
    {14, "solver-norm-identities", solver_norm_identities},
};

CriterionResult run_one(const Criterion& c, const Ctx& ctx) {
  CriterionResult result;
  result.number = c.number;
  result.name = c.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Verdict v = c.run(ctx);
    result.pass = v.first;
    result.detail = v.second;
  } catch (const Error& e) {
    result.pass = false;
    result.detail = std::string("error: ") + e.what();
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  if (opts.jobs < 1) throw DomainError("run_acceptance: jobs must be >= 1");
  Ctx ctx;
  ctx.level = opts.level;
  ctx.perturb = opts.perturb_reference;

  std::vector<const Criterion*> selected;
  for (const Criterion& c : kCriteria) {
    if (opts.only.empty() ||
        std::find(opts.only.begin(), opts.only.end(), c.number) !=
            opts.only.end()) {
      selected.push_back(&c);
    }
  }

  std::vector<CriterionResult> results(selected.size());
  if (opts.jobs == 1 || selected.size() <= 1) {
    for (size_t i = 0; i < selected.size(); ++i)
      results[i] = run_one(*selected[i], ctx);
    return results;
  }

  std::atomic<size_t> next{0};
  const int workers =
      std::min<int>(opts.jobs, static_cast<int>(selected.size()));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < selected.size();
           i = next.fetch_add(1)) {
        results[i] = run_one(*selected[i], ctx);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  return results;
}

void print_acceptance(const std::vector<CriterionResult>& results,
                      std::ostream& out) {
  int passed = 0;
  double total = 0.0;
  for (const CriterionResult& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "[%s] %02d %-34s %s (%.1fs)",
                  r.pass ? "PASS" : "FAIL", r.number, r.name.c_str(),
                  r.detail.c_str(), r.seconds);
    out << line << "\n";
    passed += r.pass ? 1 : 0;
    total += r.seconds;
  }
  char summary[80];
  std::snprintf(summary, sizeof summary, "%d/%zu criteria passed (%.1fs)",
                passed, results.size(), total);
  out << summary << "\n";
}

bool acceptance_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CriterionResult& r) { return r.pass; });
}

}  // namespace qmetro
