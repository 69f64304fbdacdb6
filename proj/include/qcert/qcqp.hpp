#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qcert/linalg.hpp"

namespace qcert {

enum class Sense { Leq, Eq };

// Quadratic form q(u) = u^T A u + 2 b^T u + c. Note the factor 2 on the
// linear term: b stores HALF the gradient of the affine part.
struct QuadraticForm {
  MatrixXd A;
  VectorXd b;
  double c = 0.0;

  double eval(const VectorXd& u) const {
    return u.dot(A * u) + 2.0 * b.dot(u) + c;
  }
};

struct Constraint {
  QuadraticForm q;
  Sense sense = Sense::Leq;
};

// min q_0(u)  s.t.  q_k(u) <= 0 (inequality form)
//                or q_k(u)  = 0, u >= 0 (equality form, nonneg_vars = true).
// The objective constant is held at zero; any input offset is moved into
// objective_shift and added back when values are reported.
struct QcqpInstance {
  int n = 0;
  QuadraticForm objective;  // objective.c == 0 always
  double objective_shift = 0.0;
  std::vector<Constraint> constraints;
  bool nonneg_vars = false;

  int m() const { return static_cast<int>(constraints.size()); }
};

inline void validate_form(const QuadraticForm& q, int n, const std::string& what,
                          double asym_tol = 1e-9) {
  if (q.A.rows() != n || q.A.cols() != n) {
    throw std::invalid_argument(what + ": A must be " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
  if (q.b.size() != n) {
    throw std::invalid_argument(what + ": b must have length " + std::to_string(n));
  }
  if (!q.A.allFinite() || !q.b.allFinite() || !std::isfinite(q.c)) {
    throw std::invalid_argument(what + ": non-finite entries");
  }
  const double asym = max_abs(q.A - q.A.transpose());
  if (asym > asym_tol) {
    throw std::invalid_argument(what + ": A asymmetric beyond tolerance (" +
                                std::to_string(asym) + ")");
  }
}

// Validates, symmetrizes, moves a nonzero objective constant into the shift.
inline QcqpInstance make_instance(int n, QuadraticForm objective,
                                  std::vector<Constraint> constraints,
                                  bool nonneg_vars = false) {
  if (n < 1) throw std::invalid_argument("instance: n must be >= 1");
  validate_form(objective, n, "objective");
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    validate_form(constraints[k].q, n, "constraint " + std::to_string(k + 1));
    const bool eq = constraints[k].sense == Sense::Eq;
    if (nonneg_vars && !eq) {
      throw std::invalid_argument("equality-form instance requires every sense = eq");
    }
    if (!nonneg_vars && eq) {
      throw std::invalid_argument("inequality-form instance requires every sense = leq");
    }
  }
  QcqpInstance inst;
  inst.n = n;
  inst.objective = std::move(objective);
  inst.objective.A = symmetrized(inst.objective.A);
  inst.objective_shift = inst.objective.c;
  inst.objective.c = 0.0;
  inst.constraints = std::move(constraints);
  for (auto& con : inst.constraints) con.q.A = symmetrized(con.q.A);
  inst.nonneg_vars = nonneg_vars;
  return inst;
}

// q_k(u); k = 0 is the objective (without the recorded shift).
inline double eval_constraint(const QcqpInstance& inst, int k, const VectorXd& u) {
  if (u.size() != inst.n) throw std::invalid_argument("eval_constraint: bad u length");
  if (k < 0 || k > inst.m()) throw std::invalid_argument("eval_constraint: index out of range");
  if (k == 0) return inst.objective.eval(u);
  return inst.constraints[static_cast<std::size_t>(k - 1)].q.eval(u);
}

// Max constraint violation: positive part for <=, absolute value for =,
// plus max(0, -u_i) in the nonnegative-variable form. u is feasible iff ~0.
inline double feasibility_residual(const QcqpInstance& inst, const VectorXd& u) {
  if (u.size() != inst.n) throw std::invalid_argument("feasibility_residual: bad u length");
  double r = 0.0;
  for (const auto& con : inst.constraints) {
    const double v = con.q.eval(u);
    r = std::max(r, con.sense == Sense::Eq ? std::abs(v) : std::max(0.0, v));
  }
  if (inst.nonneg_vars) {
    for (int i = 0; i < inst.n; ++i) r = std::max(r, -u(i));
  }
  return r;
}

struct LagrangianEval {
  double value;
  VectorXd grad;  // gradient in u
  MatrixXd hess;  // 2 (A_0 + sum_k y_k A_k), constant in u
};

// L(u, y) = q_0(u) + sum_k y_k q_k(u). No sign restriction on y here; the
// multiplier-sign checks live with the optimality conditions.
inline LagrangianEval lagrangian(const QcqpInstance& inst, const VectorXd& u,
                                 const VectorXd& y) {
  if (u.size() != inst.n) throw std::invalid_argument("lagrangian: bad u length");
  if (y.size() != inst.m()) throw std::invalid_argument("lagrangian: bad y length");
  MatrixXd Ay = inst.objective.A;
  VectorXd by = inst.objective.b;
  double cy = 0.0;
  for (int k = 0; k < inst.m(); ++k) {
    const auto& q = inst.constraints[static_cast<std::size_t>(k)].q;
    Ay += y(k) * q.A;
    by += y(k) * q.b;
    cy += y(k) * q.c;
  }
  LagrangianEval out;
  out.value = u.dot(Ay * u) + 2.0 * by.dot(u) + cy;
  out.grad = 2.0 * (Ay * u + by);
  out.hess = 2.0 * Ay;
  return out;
}

// A_0 + sum y_k A_k, b_0 + sum y_k b_k, sum y_k c_k — the combined data of
// L(., y) as a single quadratic form.
inline QuadraticForm combined_form(const QcqpInstance& inst, const VectorXd& y) {
  QuadraticForm q;
  q.A = inst.objective.A;
  q.b = inst.objective.b;
  q.c = 0.0;
  for (int k = 0; k < inst.m(); ++k) {
    const auto& qk = inst.constraints[static_cast<std::size_t>(k)].q;
    q.A += y(k) * qk.A;
    q.b += y(k) * qk.b;
    q.c += y(k) * qk.c;
  }
  return q;
}

// Homogenized data: Q_k = [[c_k, b_k^T], [b_k, A_k]], H = e_0 e_0^T, so that
// q_k(u) = Q_k • [1;u][1;u]^T.
struct HomogenizedInstance {
  std::vector<MatrixXd> Qs;  // Q_0 .. Q_m, each (1+n) x (1+n)
  MatrixXd H;
  std::vector<Sense> senses;  // senses of constraints 1..m
  bool nonneg = false;
  double objective_shift = 0.0;

  int dim() const { return static_cast<int>(H.rows()); }
  int n() const { return dim() - 1; }
  int m() const { return static_cast<int>(senses.size()); }
};

inline MatrixXd homogenize_form(const QuadraticForm& q) {
  const int n = static_cast<int>(q.b.size());
  MatrixXd Q(1 + n, 1 + n);
  Q(0, 0) = q.c;
  Q.block(0, 1, 1, n) = q.b.transpose();
  Q.block(1, 0, n, 1) = q.b;
  Q.block(1, 1, n, n) = q.A;
  return Q;
}

inline HomogenizedInstance homogenize(const QcqpInstance& inst) {
  HomogenizedInstance h;
  h.Qs.reserve(static_cast<std::size_t>(inst.m()) + 1);
  h.Qs.push_back(homogenize_form(inst.objective));
  for (const auto& con : inst.constraints) {
    h.Qs.push_back(homogenize_form(con.q));
    h.senses.push_back(con.sense);
  }
  h.H = MatrixXd::Zero(1 + inst.n, 1 + inst.n);
  h.H(0, 0) = 1.0;
  h.nonneg = inst.nonneg_vars;
  h.objective_shift = inst.objective_shift;
  return h;
}

inline VectorXd lift(const VectorXd& u) {
  VectorXd x(u.size() + 1);
  x(0) = 1.0;
  x.tail(u.size()) = u;
  return x;
}

struct ZetaEstimate {
  bool found = false;          // some grid point passed the loose test
  double value = std::numeric_limits<double>::quiet_NaN();
  VectorXd argmin;
  bool certified_feasible = false;  // final point has residual <= 1e-9
};

// Desk-scale grid + local-refinement search for the optimal value. The result
// is an upper-bound estimate (best feasible value found), never a lower bound.
inline ZetaEstimate brute_force_zeta(const QcqpInstance& inst, const VectorXd& lo,
                                     const VectorXd& hi, int points_per_axis) {
  if (inst.n > 4) throw std::invalid_argument("brute_force_zeta: n must be <= 4");
  if (points_per_axis < 11) {
    throw std::invalid_argument("brute_force_zeta: need >= 11 points per axis");
  }
  if (lo.size() != inst.n || hi.size() != inst.n) {
    throw std::invalid_argument("brute_force_zeta: bad box");
  }
  for (int i = 0; i < inst.n; ++i) {
    if (!(lo(i) < hi(i)) || !std::isfinite(lo(i)) || !std::isfinite(hi(i))) {
      throw std::invalid_argument("brute_force_zeta: box must be finite and nonempty");
    }
  }

  const int n = inst.n;
  VectorXd h(n);
  for (int i = 0; i < n; ++i) h(i) = (hi(i) - lo(i)) / (points_per_axis - 1);

  // Loose feasibility cutoff ~ Lipschitz constant times grid spacing.
  double lip = 1.0;
  const double box_rad = std::max(lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff());
  for (int k = 1; k <= inst.m(); ++k) {
    const auto& q = inst.constraints[static_cast<std::size_t>(k - 1)].q;
    lip = std::max(lip, 2.0 * q.A.norm() * box_rad * std::sqrt(double(n)) + 2.0 * q.b.norm());
  }
  const double grid_tol = lip * h.maxCoeff();
  const double strict_tol = 1e-9;

  bool loose_found = false, strict_found = false;
  double loose_val = std::numeric_limits<double>::infinity();
  double strict_val = std::numeric_limits<double>::infinity();
  VectorXd loose_arg(n), strict_arg(n);
  VectorXd u(n);
  std::vector<int> idx(n, 0);
  const long total = static_cast<long>(std::pow(double(points_per_axis), n));
  for (long t = 0; t < total; ++t) {
    long rem = t;
    for (int i = 0; i < n; ++i) {
      idx[static_cast<std::size_t>(i)] = static_cast<int>(rem % points_per_axis);
      rem /= points_per_axis;
    }
    for (int i = 0; i < n; ++i) u(i) = lo(i) + h(i) * idx[static_cast<std::size_t>(i)];
    const double resid = feasibility_residual(inst, u);
    if (resid <= grid_tol) {
      const double v = inst.objective.eval(u);
      if (v < loose_val) {
        loose_val = v;
        loose_arg = u;
        loose_found = true;
      }
      if (resid <= strict_tol && v < strict_val) {
        strict_val = v;
        strict_arg = u;
        strict_found = true;
      }
    }
  }
  ZetaEstimate best;
  best.found = loose_found;
  if (!loose_found) return best;

  // Refine a candidate: restore strict feasibility by coordinate pattern
  // search on the residual, then descend the objective over strictly
  // feasible points with shrinking steps. Returns nothing when the
  // candidate cannot be made strictly feasible.
  auto refine = [&](VectorXd cur) -> std::optional<std::pair<double, VectorXd>> {
    double step = h.maxCoeff();
    for (int it = 0; it < 300 && feasibility_residual(inst, cur) > strict_tol; ++it) {
      bool moved = false;
      for (int i = 0; i < n; ++i) {
        for (const double d : {step, -step}) {
          VectorXd cand = cur;
          cand(i) += d;
          if (feasibility_residual(inst, cand) < feasibility_residual(inst, cur)) {
            cur = cand;
            moved = true;
          }
        }
      }
      if (!moved) step *= 0.5;
      if (step < 1e-14) break;
    }
    if (feasibility_residual(inst, cur) > strict_tol) return std::nullopt;
    double dstep = h.maxCoeff();
    double cur_val = inst.objective.eval(cur);
    while (dstep > 1e-10) {
      bool improved = false;
      for (int i = 0; i < n; ++i) {
        for (const double d : {dstep, -dstep}) {
          VectorXd cand = cur;
          cand(i) += d;
          if (feasibility_residual(inst, cand) <= strict_tol &&
              inst.objective.eval(cand) < cur_val - 1e-15) {
            cur = cand;
            cur_val = inst.objective.eval(cand);
            improved = true;
          }
        }
      }
      if (!improved) dstep *= 0.5;
    }
    return std::make_pair(cur_val, cur);
  };

  auto refined_loose = refine(loose_arg);
  std::optional<std::pair<double, VectorXd>> refined_strict;
  if (strict_found && (!refined_loose || strict_val < refined_loose->first)) {
    refined_strict = refine(strict_arg);
  }
  const auto* pick = refined_loose ? &refined_loose : nullptr;
  if (refined_strict && (!pick || refined_strict->first < (*pick)->first)) {
    pick = &refined_strict;
  }
  if (pick) {
    best.value = (*pick)->first;
    best.argmin = (*pick)->second;
    best.certified_feasible = true;
  } else {
    best.value = loose_val;
    best.argmin = loose_arg;
    best.certified_feasible = false;
  }
  return best;
}

}  // namespace qcert
