#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qcert/conic.hpp"
#include "qcert/solver.hpp"

namespace qcert {

// Sign/interval reasoning with valid linear consequences of psd-ness:
//   * diagonal entries are nonnegative,
//   * (e_i +- e_j)' S (e_i +- e_j) >= 0,
//   * a diagonal entry that is identically <= 0 forces its whole row to zero.
// Applied to the affine dual slack S(y, s) it can certify dual infeasibility
// or pin an upper bound on s; applied to the primal matrix variable it can
// pin a lower bound on the objective. Everything derived is a relaxation of
// the true feasible set, so the bounds are always sound.

namespace detail {

struct Affine {
  VectorXd coef;
  double cst = 0.0;
};

struct Interval {
  double lo = -kInf;
  double hi = kInf;
};

inline double lo_of(const Affine& e, const std::vector<Interval>& dom) {
  double v = e.cst;
  for (int i = 0; i < e.coef.size(); ++i) {
    const double c = e.coef(i);
    if (c == 0.0) continue;
    v += c > 0 ? c * dom[static_cast<std::size_t>(i)].lo : c * dom[static_cast<std::size_t>(i)].hi;
    if (std::isnan(v)) return -kInf;  // inf - inf
  }
  return v;
}

inline double hi_of(const Affine& e, const std::vector<Interval>& dom) {
  double v = e.cst;
  for (int i = 0; i < e.coef.size(); ++i) {
    const double c = e.coef(i);
    if (c == 0.0) continue;
    v += c > 0 ? c * dom[static_cast<std::size_t>(i)].hi : c * dom[static_cast<std::size_t>(i)].lo;
    if (std::isnan(v)) return kInf;
  }
  return v;
}

// Tighten dom so that e >= 0 can still hold; false on an empty domain.
inline bool propagate_ge0(const Affine& e, std::vector<Interval>& dom, double eps,
                          bool* changed) {
  if (hi_of(e, dom) < -eps) return false;
  for (int i = 0; i < e.coef.size(); ++i) {
    const double c = e.coef(i);
    if (c == 0.0) continue;
    Affine rest = e;
    rest.coef(i) = 0.0;
    const double rhi = hi_of(rest, dom);
    if (!std::isfinite(rhi)) continue;
    Interval& di = dom[static_cast<std::size_t>(i)];
    if (c > 0) {
      const double bound = -rhi / c;
      if (bound > di.lo + eps) {
        di.lo = bound;
        *changed = true;
      }
    } else {
      const double bound = rhi / (-c);
      if (bound < di.hi - eps) {
        di.hi = bound;
        *changed = true;
      }
    }
    if (di.lo > di.hi + eps) return false;
  }
  return true;
}

// Generic propagation over an affine-parametrized symmetric matrix that must
// be psd. entry(i,j) supplies the affine form of the matrix entry.
template <typename EntryFn>
inline bool propagate_psd_matrix(int d, const EntryFn& entry, std::vector<Interval>& dom,
                                 std::vector<Affine>& extra, double eps) {
  std::vector<Affine> ge0 = extra;
  for (int i = 0; i < d; ++i) ge0.push_back(entry(i, i));
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Affine plus = entry(i, i);
      plus.coef += entry(j, j).coef + 2.0 * entry(i, j).coef;
      plus.cst += entry(j, j).cst + 2.0 * entry(i, j).cst;
      Affine minus = entry(i, i);
      minus.coef += entry(j, j).coef - 2.0 * entry(i, j).coef;
      minus.cst += entry(j, j).cst - 2.0 * entry(i, j).cst;
      ge0.push_back(plus);
      ge0.push_back(minus);
    }
  }
  std::vector<bool> row_forced(static_cast<std::size_t>(d), false);
  for (int pass = 0; pass < 200; ++pass) {
    bool changed = false;
    for (const auto& e : ge0) {
      if (!propagate_ge0(e, dom, eps, &changed)) return false;
    }
    for (int i = 0; i < d; ++i) {
      if (row_forced[static_cast<std::size_t>(i)]) continue;
      if (hi_of(entry(i, i), dom) <= eps) {
        row_forced[static_cast<std::size_t>(i)] = true;
        changed = true;
        for (int j = 0; j < d; ++j) {
          Affine e = entry(i, j);
          Affine ne = e;
          ne.coef = -e.coef;
          ne.cst = -e.cst;
          ge0.push_back(e);
          ge0.push_back(ne);
        }
      }
    }
    if (!changed) break;
  }
  extra = std::move(ge0);
  return true;
}

}  // namespace detail

struct StructuralDualResult {
  bool certified_infeasible = false;
  double s_upper = kInf;  // valid upper bound on the dual optimal value
  std::string note;
};

namespace detail {

inline bool is_h_map(const LinearMap& m, int d) {
  MatrixXd H = MatrixXd::Zero(d, d);
  H(0, 0) = 1.0;
  return m.sense == Sense::Eq && m.rhs == 1.0 && max_abs(m.A - H) == 0.0;
}

}  // namespace detail

// Dual-side analysis of an inequality-form relaxation. Optionally restricted
// to pairs complementary with a fixed primal point x (the relaxation-KKT
// system at x): S(y,s) x = 0 and y_k = 0 on the inactive constraints.
inline StructuralDualResult structural_dual_analysis(
    const ConicProblem& p, const VectorXd* complementary_x = nullptr,
    double active_tol = 1e-7) {
  StructuralDualResult out;
  if (p.nonneg_matrix) {
    out.note = "skipped: nonnegative-cone dual not covered";
    return out;
  }
  const int d = p.dim;
  std::vector<MatrixXd> Q;
  std::vector<bool> sign_free;
  for (const auto& m : p.maps) {
    if (detail::is_h_map(m, d)) continue;
    Q.push_back(m.A);
    sign_free.push_back(m.sense == Sense::Eq);
  }
  const int mm = static_cast<int>(Q.size());
  const int nv = mm + 1;  // y_1..y_m, then s

  double scale = max_abs(p.cost);
  for (const auto& Qk : Q) scale = std::max(scale, max_abs(Qk));
  const double eps = 1e-11 * (1.0 + scale);

  MatrixXd H = MatrixXd::Zero(d, d);
  H(0, 0) = 1.0;
  auto entry = [&](int i, int j) {
    detail::Affine e;
    e.coef = VectorXd::Zero(nv);
    for (int k = 0; k < mm; ++k) e.coef(k) = Q[static_cast<std::size_t>(k)](i, j);
    e.coef(mm) = -H(i, j);
    e.cst = p.cost(i, j);
    return e;
  };

  std::vector<detail::Interval> dom(static_cast<std::size_t>(nv));
  for (int k = 0; k < mm; ++k) {
    if (!sign_free[static_cast<std::size_t>(k)]) dom[static_cast<std::size_t>(k)].lo = 0.0;
  }

  std::vector<detail::Affine> extra;
  if (complementary_x != nullptr) {
    const VectorXd& x = *complementary_x;
    // S(y, s) x = 0 row by row, plus complementary slackness on y
    for (int i = 0; i < d; ++i) {
      detail::Affine row;
      row.coef = VectorXd::Zero(nv);
      for (int j = 0; j < d; ++j) {
        const detail::Affine e = entry(i, j);
        row.coef += x(j) * e.coef;
        row.cst += x(j) * e.cst;
      }
      detail::Affine neg = row;
      neg.coef = -row.coef;
      neg.cst = -row.cst;
      extra.push_back(row);
      extra.push_back(neg);
    }
    const MatrixXd Xx = x * x.transpose();
    for (int k = 0; k < mm; ++k) {
      if (sign_free[static_cast<std::size_t>(k)]) continue;
      if (inner(Q[static_cast<std::size_t>(k)], Xx) < -active_tol * (1.0 + scale)) {
        dom[static_cast<std::size_t>(k)].hi = 0.0;  // inactive: y_k = 0
      }
    }
  }

  if (!detail::propagate_psd_matrix(d, entry, dom, extra, eps)) {
    out.certified_infeasible = true;
    out.note = "psd sign pattern of the slack matrix is contradictory";
    return out;
  }
  out.s_upper = dom[static_cast<std::size_t>(mm)].hi;
  out.note = std::isfinite(out.s_upper)
                 ? "propagation pinned an upper bound on the dual value"
                 : "no structural conclusion";
  return out;
}

struct StructuralPrimalResult {
  bool certified_infeasible = false;
  double objective_lower = -kInf;  // valid lower bound on the primal value
  std::string note;
};

// Primal-side analysis: interval propagation over the matrix entries under
// the linear rows and the psd consequences. The resulting interval on the
// cost is a sound lower bound for the relaxation optimum.
inline StructuralPrimalResult structural_primal_bound(const ConicProblem& p) {
  StructuralPrimalResult out;
  const int d = p.dim;
  const int nv = d * (d + 1) / 2;
  auto vidx = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    return i * d - i * (i - 1) / 2 + (j - i);
  };
  double scale = max_abs(p.cost);
  for (const auto& m : p.maps) scale = std::max(scale, std::max(max_abs(m.A), std::abs(m.rhs)));
  const double eps = 1e-11 * (1.0 + scale);

  auto entry = [&](int i, int j) {
    detail::Affine e;
    e.coef = VectorXd::Zero(nv);
    e.coef(vidx(i, j)) = 1.0;
    return e;
  };
  auto row_affine = [&](const MatrixXd& A, double rhs) {
    detail::Affine e;
    e.coef = VectorXd::Zero(nv);
    for (int i = 0; i < d; ++i) {
      e.coef(vidx(i, i)) += A(i, i);
      for (int j = i + 1; j < d; ++j) e.coef(vidx(i, j)) += 2.0 * A(i, j);
    }
    e.cst = -rhs;
    return e;  // A • X - rhs
  };

  std::vector<detail::Interval> dom(static_cast<std::size_t>(nv));
  if (p.nonneg_matrix) {
    const int i0 = p.nonneg_includes_row0 ? 0 : 1;
    for (int i = i0; i < d; ++i) {
      for (int j = i; j < d; ++j) dom[static_cast<std::size_t>(vidx(i, j))].lo = 0.0;
    }
  }

  std::vector<detail::Affine> extra;
  for (const auto& m : p.maps) {
    detail::Affine e = row_affine(m.A, m.rhs);
    detail::Affine ne = e;
    ne.coef = -e.coef;
    ne.cst = -e.cst;
    extra.push_back(ne);                       // rhs - A • X >= 0 (leq rows)
    if (m.sense == Sense::Eq) extra.push_back(e);  // and A • X - rhs >= 0
  }

  if (!detail::propagate_psd_matrix(d, entry, dom, extra, eps)) {
    out.certified_infeasible = true;
    out.note = "linear rows contradict the psd sign pattern";
    return out;
  }
  detail::Affine cost = row_affine(p.cost, 0.0);
  out.objective_lower = detail::lo_of(cost, dom);
  out.note = std::isfinite(out.objective_lower)
                 ? "propagation pinned a lower bound on the primal value"
                 : "no structural conclusion";
  return out;
}

// Dual-focused view of a solve: small structured problems are screened for
// certified infeasibility first, then the interior-point run decides.
inline ConicOutcome solve_dual(const ConicProblem& p, const SolverOptions& opts = {}) {
  if (!p.nonneg_matrix && p.dim <= 8 && static_cast<int>(p.maps.size()) <= 12) {
    const StructuralDualResult sr = structural_dual_analysis(p);
    if (sr.certified_infeasible) {
      ConicOutcome out;
      out.status = SolveStatus::DualInfeasibleCertified;
      out.note = sr.note;
      out.dual_obj = -kInf;
      out.gap = kInf;
      return out;
    }
  }
  return solve(p, opts);
}

}  // namespace qcert
