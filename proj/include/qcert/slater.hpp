#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcert/solver.hpp"

namespace qcert {

struct SlaterDiagnosis {
  std::vector<int> m_minus;  // constraints that can be strictly negative on the feasible set
  bool holds = false;
  double margin = 0.0;       // optimal t of the max-margin problem
  std::optional<MatrixXd> witness;
  bool inconclusive = false;
  std::string note;
};

namespace detail {

// Max-margin feasibility problem, shared by the plain and DNN diagnoses.
// With X = V + (1 - t') I and t = 1 - t' (t <= X_00 = 1, so t' >= 0):
//   maximize t  ==  minimize t'
//   s.t. V psd, V_00 - t' = 0, constraint rows on X, strict rows get "+t".
struct MarginBuilder {
  StandardForm f;
  std::vector<double> rhs;
  int l_used = 1;

  MarginBuilder(int d, int n_leq_rows) {
    f.d = d;
    f.l = 1 + n_leq_rows;  // t' plus one slack per inequality row
    f.C = MatrixXd::Zero(d, d);
    f.clp = VectorXd::Zero(f.l);
    f.clp(0) = 1.0;  // min t'
    MatrixXd e00 = MatrixXd::Zero(d, d);
    e00(0, 0) = 1.0;
    VectorXd a = VectorXd::Zero(f.l);
    a(0) = -1.0;
    f.A.push_back(e00);
    f.alp.push_back(a);
    rhs.push_back(0.0);
  }

  // A_psd • V + tp_coef * t' (+ slack) = r
  void add_eq(const MatrixXd& A, double tp_coef, double r) {
    VectorXd a = VectorXd::Zero(f.l);
    a(0) = tp_coef;
    f.A.push_back(A);
    f.alp.push_back(a);
    rhs.push_back(r);
  }
  void add_leq(const MatrixXd& A, double tp_coef, double r) {
    VectorXd a = VectorXd::Zero(f.l);
    a(0) = tp_coef;
    a(l_used++) = 1.0;
    f.A.push_back(A);
    f.alp.push_back(a);
    rhs.push_back(r);
  }

  StandardForm finish() {
    f.b = VectorXd::Zero(static_cast<int>(f.A.size()));
    for (std::size_t r = 0; r < rhs.size(); ++r) f.b(static_cast<int>(r)) = rhs[r];
    return f;
  }
};

}  // namespace detail

// Membership k in M^-: the feasible set admits Q_k • X strictly negative.
// Established by a clearly negative (near-)feasible value of the auxiliary
// problem min Q_k • X over the relaxation's feasible set; refuted by an
// optimal value ~0.
inline SlaterDiagnosis slater_diagnosis(const HomogenizedInstance& h,
                                        const SolverOptions& base_opts = {}) {
  for (const Sense s : h.senses) {
    if (s != Sense::Leq) {
      throw std::invalid_argument("slater_diagnosis: inequality-form instance required");
    }
  }
  SlaterDiagnosis diag;
  const ConicProblem primal = build_primal_sdp(h);

  for (int k = 1; k <= h.m(); ++k) {
    const MatrixXd& Qk = h.Qs[static_cast<std::size_t>(k)];
    const double scale_k = 1.0 + Qk.norm();
    ConicProblem aux = primal;
    aux.cost = Qk;
    SolverOptions opts = base_opts;
    opts.stop_below = -0.01 * scale_k;
    opts.keep_trace = false;
    const ConicOutcome res = solve(aux, opts);
    const double member_tol = 1e-7 * scale_k;
    bool member = false;
    if (res.has_feasible && res.best_feasible_obj <= opts.stop_below) {
      member = true;  // clearly negative on the feasible set
    } else if (res.status == SolveStatus::Optimal) {
      member = res.primal_obj < -member_tol;
    } else if (res.pinfeas_abs <= 1e-6 * scale_k && res.primal_obj > -member_tol) {
      member = false;  // stalled, but the value is pinned at ~0
    } else {
      diag.inconclusive = true;
      diag.note = "membership solve inconclusive for constraint " + std::to_string(k);
    }
    if (member) diag.m_minus.push_back(k);
  }

  // max-margin problem over X = V + t I
  detail::MarginBuilder mb(h.dim(), h.m());
  std::vector<bool> strict(static_cast<std::size_t>(h.m() + 1), false);
  for (const int k : diag.m_minus) strict[static_cast<std::size_t>(k)] = true;
  for (int k = 1; k <= h.m(); ++k) {
    const MatrixXd& Qk = h.Qs[static_cast<std::size_t>(k)];
    const double g = Qk.trace() + (strict[static_cast<std::size_t>(k)] ? 1.0 : 0.0);
    mb.add_leq(Qk, -g, -g);
  }
  SolverOptions mopts = base_opts;
  mopts.keep_trace = false;
  const RawOutcome mres = solve_standard(mb.finish(), mopts);

  const double scale = 1.0 + max_abs(h.Qs[0]);
  const double tol_margin = 1e-7 * scale;
  if (mres.X.size() == 0 ||
      (mres.status != SolveStatus::Optimal && mres.pinfeas_abs > 1e-7)) {
    diag.inconclusive = true;
    diag.note = "margin solve inconclusive";
    return diag;
  }
  const double t_star = 1.0 - mres.w(0);
  diag.margin = t_star;
  diag.holds = t_star > tol_margin;
  if (diag.holds) {
    diag.witness = MatrixXd(mres.X + t_star * MatrixXd::Identity(h.dim(), h.dim()));
  }
  return diag;
}

// DNN variant: X = V + t I must additionally have strictly positive u-block
// entries, X_ij >= t for 1 <= i < j <= n (diagonal entries follow from psd).
inline SlaterDiagnosis dnn_slater(const HomogenizedInstance& h,
                                  const SolverOptions& base_opts = {}) {
  if (!h.nonneg) throw std::invalid_argument("dnn_slater: equality-form instance required");
  SlaterDiagnosis diag;
  const int d = h.dim();
  const int n = h.n();
  const int n_offdiag = n * (n - 1) / 2;

  detail::MarginBuilder mb(d, n_offdiag);
  for (int k = 1; k <= h.m(); ++k) {
    const MatrixXd& Qk = h.Qs[static_cast<std::size_t>(k)];
    mb.add_eq(Qk, -Qk.trace(), -Qk.trace());
  }
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      MatrixXd E = MatrixXd::Zero(d, d);
      E(i, j) = -0.5;
      E(j, i) = -0.5;
      mb.add_leq(E, -1.0, -1.0);
    }
  }
  SolverOptions mopts = base_opts;
  mopts.keep_trace = false;
  const RawOutcome mres = solve_standard(mb.finish(), mopts);

  const double scale = 1.0 + max_abs(h.Qs[0]);
  if (mres.X.size() == 0 ||
      (mres.status != SolveStatus::Optimal && mres.pinfeas_abs > 1e-7)) {
    diag.inconclusive = true;
    diag.note = "margin solve inconclusive";
    return diag;
  }
  const double t_star = 1.0 - mres.w(0);
  diag.margin = t_star;
  diag.holds = t_star > 1e-7 * scale;
  if (diag.holds) {
    diag.witness = MatrixXd(mres.X + t_star * MatrixXd::Identity(d, d));
  }
  return diag;
}

}  // namespace qcert
