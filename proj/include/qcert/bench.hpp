#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qcert/dnn.hpp"

namespace qcert {

// ---------------------------------------------------------------------------
// Bundled worked examples. Example 4.1 is the parametric univariate family
//   min u^2  s.t.  (u - alpha)(u - 4) <= 0,  -(u - 2)(u - 3) <= 0,
// whose closed-form minimizer, multipliers and relaxation optimum are known
// piecewise in alpha. 4.2 is an asymptotically attained infimum (no
// minimizer, relaxation unbounded), 4.3 adds a redundant cut that restores
// strong duality without exactness, and 4.4 has an exact relaxation with a
// duality gap. The closed forms are only encoded for alpha in [0, 6]; below 0
// the "u = alpha" branch stops being the minimizer.
// ---------------------------------------------------------------------------

struct ValueOrInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool is_interval = false;

  static ValueOrInterval exact(double v) { return {v, v, false}; }
  static ValueOrInterval interval(double lo, double hi) { return {lo, hi, true}; }
  bool contains(double v, double tol) const { return v >= lo - tol && v <= hi + tol; }
};

struct AffineRule {  // value = c0 + c1 * y1
  double c0 = 0.0;
  double c1 = 0.0;
  double at(double y1) const { return c0 + c1 * y1; }
};

struct ExpectedRow {
  double alpha = 0.0;
  double u_star = 0.0;
  double zeta = 0.0;
  bool kkt_holds = true;
  ValueOrInterval y1;
  AffineRule y2;
  AffineRule hess;
  Eigen::Matrix2d X;
  double eta_p = 0.0;
};

inline QcqpInstance example41_instance(double alpha) {
  QuadraticForm q0{MatrixXd::Constant(1, 1, 1.0), VectorXd::Zero(1), 0.0};
  QuadraticForm q1{MatrixXd::Constant(1, 1, 1.0),
                   VectorXd::Constant(1, -(4.0 + alpha) / 2.0), 4.0 * alpha};
  QuadraticForm q2{MatrixXd::Constant(1, 1, -1.0), VectorXd::Constant(1, 2.5), -6.0};
  return make_instance(1, q0, {{q1, Sense::Leq}, {q2, Sense::Leq}});
}

inline std::pair<QcqpInstance, ExpectedRow> example41(double alpha) {
  if (alpha < 0.0 || alpha > 6.0) {
    throw std::invalid_argument("example41: alpha must lie in [0, 6]");
  }
  ExpectedRow r;
  r.alpha = alpha;
  auto rank1_X = [](double u) {
    Eigen::Matrix2d X;
    X << 1.0, u, u, u * u;
    return X;
  };
  if (alpha < 2.0) {
    r.u_star = alpha;
    r.zeta = alpha * alpha;
    r.y1 = ValueOrInterval::exact(2.0 * alpha / (4.0 - alpha));
    r.y2 = {0.0, 0.0};
    r.hess = {(2.0 * alpha + 8.0) / (4.0 - alpha), 0.0};
    r.X = rank1_X(alpha);
    r.eta_p = alpha * alpha;
  } else if (alpha == 2.0) {
    r.u_star = 2.0;
    r.zeta = 4.0;
    r.y1 = ValueOrInterval::interval(2.0, 5.0);
    r.y2 = {-4.0, 2.0};
    r.hess = {10.0, -2.0};
    r.X = rank1_X(2.0);
    r.eta_p = 4.0;
  } else if (alpha < 3.0) {
    r.u_star = 3.0;
    r.zeta = 9.0;
    r.y1 = ValueOrInterval::exact(0.0);
    r.y2 = {6.0, 0.0};
    r.hess = {-10.0, 0.0};
    r.X << 1.0, (4.0 * alpha - 6.0) / (alpha - 1.0), (4.0 * alpha - 6.0) / (alpha - 1.0),
        (14.0 * alpha - 24.0) / (alpha - 1.0);
    r.eta_p = (14.0 * alpha - 24.0) / (alpha - 1.0);
  } else if (alpha == 3.0) {
    r.u_star = 3.0;
    r.zeta = 9.0;
    r.y1 = ValueOrInterval::interval(2.5, 6.0);
    r.y2 = {6.0, -1.0};
    r.hess = {-10.0, 4.0};
    r.X = rank1_X(3.0);
    r.eta_p = 9.0;
  } else if (alpha < 4.0) {
    r.u_star = alpha;
    r.zeta = alpha * alpha;
    r.y1 = ValueOrInterval::exact(2.0 * alpha / (4.0 - alpha));
    r.y2 = {0.0, 0.0};
    r.hess = {(2.0 * alpha + 8.0) / (4.0 - alpha), 0.0};
    r.X = rank1_X(alpha);
    r.eta_p = alpha * alpha;
  } else if (alpha == 4.0) {
    r.u_star = 4.0;
    r.zeta = 16.0;
    r.kkt_holds = false;
    r.X = rank1_X(4.0);
    r.eta_p = 16.0;
  } else {
    r.u_star = 4.0;
    r.zeta = 16.0;
    r.y1 = ValueOrInterval::exact(8.0 / (alpha - 4.0));
    r.y2 = {0.0, 0.0};
    r.hess = {2.0 * alpha / (alpha - 4.0), 0.0};
    r.X = rank1_X(4.0);
    r.eta_p = 16.0;
  }
  return {example41_instance(alpha), r};
}

// Expected condition verdicts per alpha (the row classification).
struct ExpectedStatuses {
  CheckStatus A, B, C, D, E, F;
};

inline ExpectedStatuses example41_statuses(double alpha) {
  const auto all = [](CheckStatus s) { return ExpectedStatuses{s, s, s, s, s, s}; };
  if (alpha > 2.0 && alpha < 3.0) return all(CheckStatus::Fails);
  if (alpha == 4.0) {
    return {CheckStatus::Fails, CheckStatus::Fails, CheckStatus::Holds,
            CheckStatus::Holds, CheckStatus::Holds, CheckStatus::Holds};
  }
  return all(CheckStatus::Holds);
}

struct Expected42 {
  double zeta = 0.0;  // approached, not attained
  bool has_minimizer = false;
  // relaxation: primal unbounded (suspected), dual infeasible
};

inline std::pair<QcqpInstance, Expected42> example42() {
  QuadraticForm q0{MatrixXd::Zero(2, 2), (VectorXd(2) << -1.0, 1.0).finished(), 0.0};
  QuadraticForm q1{MatrixXd::Zero(2, 2), (VectorXd(2) << -1.0, 0.0).finished(), 0.0};
  QuadraticForm q2{MatrixXd::Zero(2, 2), (VectorXd(2) << 0.0, -1.0).finished(), 0.0};
  QuadraticForm q3{(MatrixXd(2, 2) << 1.0, 0.0, 0.0, -1.0).finished(), VectorXd::Zero(2),
                   1.0};
  return {make_instance(2, q0, {{q1, Sense::Leq}, {q2, Sense::Leq}, {q3, Sense::Leq}}),
          Expected42{}};
}

struct Expected43 {
  double zeta = 0.0;
  bool has_minimizer = false;
  double eta_p = 0.0;
  double eta_d = 0.0;
  VectorXd kkt_y = (VectorXd(4) << 0.0, 0.0, 0.0, 1.0).finished();
  double kkt_s = 0.0;  // slack matrix vanishes at this pair
};

inline std::pair<QcqpInstance, Expected43> example43() {
  auto [base, e42] = example42();
  (void)e42;
  QuadraticForm q4{MatrixXd::Zero(2, 2), (VectorXd(2) << 1.0, -1.0).finished(), 0.0};
  std::vector<Constraint> cons = base.constraints;
  cons.push_back({q4, Sense::Leq});
  return {make_instance(2, base.objective, cons), Expected43{}};
}

struct Expected44 {
  double zeta = 1.0;
  VectorXd minimizer = (VectorXd(3) << 0.0, 0.0, 1.0).finished();
  double eta_p = 1.0;
  double eta_d = 0.0;
  std::vector<int> m_minus{2};
};

inline std::pair<QcqpInstance, Expected44> example44() {
  QuadraticForm q0{(MatrixXd(3, 3) << 0, 0, 0, 0, 0, 0, 0, 0, 1).finished(),
                   VectorXd::Zero(3), 0.0};
  QuadraticForm q1{(MatrixXd(3, 3) << 1, 0, 0, 0, 0, 0, 0, 0, 0).finished(),
                   VectorXd::Zero(3), 0.0};
  QuadraticForm q2{(MatrixXd(3, 3) << 0, -1, 0, -1, 0, 0, 0, 0, -2).finished(),
                   VectorXd::Zero(3), 2.0};
  return {make_instance(3, q0, {{q1, Sense::Leq}, {q2, Sense::Leq}}), Expected44{}};
}

// ---------------------------------------------------------------------------
// Parameter sweep over the 4.1 family: solver values next to the closed forms
// ---------------------------------------------------------------------------

struct SweepRow {
  double alpha = 0.0;
  double y1 = 0.0;    // solver multiplier
  double hess = 0.0;  // Lagrangian Hessian at (u*, solver y)
  double zeta = 0.0;  // closed form
  double eta_p = 0.0; // solver value
  double detX = 0.0;  // det of the solver primal matrix
  double gap = 0.0;   // zeta - eta_p
  ExpectedStatuses expected{};
  CheckStatus status[6] = {CheckStatus::Inconclusive, CheckStatus::Inconclusive,
                           CheckStatus::Inconclusive, CheckStatus::Inconclusive,
                           CheckStatus::Inconclusive, CheckStatus::Inconclusive};
  // closed-form counterparts for side-by-side reporting
  double eta_p_formula = 0.0;
  double detX_formula = 0.0;
};

inline SweepRow sweep_point(double alpha, const CertifyOptions& base_opts = {}) {
  auto [inst, row] = example41(alpha);
  CertifyOptions opts = base_opts;
  opts.candidate_minimizer = VectorXd::Constant(1, row.u_star);
  const ConditionReport rep = certify(inst, opts);

  SweepRow out;
  out.alpha = alpha;
  out.zeta = row.zeta;
  out.eta_p = rep.values.eta_p;
  out.gap = row.zeta - rep.values.eta_p;
  out.eta_p_formula = row.eta_p;
  out.detX_formula = row.X.determinant();
  if (rep.relax_X && rep.relax_X->rows() == 2) {
    out.detX = rep.relax_X->determinant();
  }
  if (rep.relax_y && rep.relax_y->size() >= 1) {
    out.y1 = (*rep.relax_y)(0);
    const LagrangianEval le =
        lagrangian(inst, VectorXd::Constant(1, row.u_star), *rep.relax_y);
    out.hess = le.hess(0, 0);
  }
  out.expected = example41_statuses(alpha);
  out.status[0] = rep.A;
  out.status[1] = rep.B;
  out.status[2] = rep.C;
  out.status[3] = rep.D;
  out.status[4] = rep.E;
  out.status[5] = rep.F;
  return out;
}

inline std::vector<SweepRow> sweep_fig1(double alpha_from, double alpha_to, double step,
                                        int jobs = 1, const CertifyOptions& opts = {}) {
  if (alpha_from < 2.0 - 1e-12 || alpha_to > 6.0 + 1e-12 || step <= 0.0) {
    throw std::invalid_argument("sweep_fig1: range must lie in [2, 6] with step > 0");
  }
  const int count = static_cast<int>(std::floor((alpha_to - alpha_from) / step + 1e-9)) + 1;
  std::vector<SweepRow> rows(static_cast<std::size_t>(count));
  jobs = std::max(1, jobs);
  auto work = [&](int start, int stride) {
    for (int i = start; i < count; i += stride) {
      const double alpha = alpha_from + step * i;
      rows[static_cast<std::size_t>(i)] = sweep_point(alpha, opts);
    }
  };
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace qcert
