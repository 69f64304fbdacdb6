#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qcert/slater.hpp"
#include "qcert/structural.hpp"

namespace qcert {

enum class CheckStatus { Holds, Fails, Inconclusive };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Holds: return "HOLDS";
    case CheckStatus::Fails: return "FAILS";
    case CheckStatus::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct ConditionEvidence {
  std::map<std::string, double> residuals;
  std::string note;
};

struct AprimeCheck {
  CheckStatus status = CheckStatus::Inconclusive;
  bool strict = false;  // Hessian positive definite (the barred variant)
  ConditionEvidence evidence;
};

// KKT + convexity-of-the-Lagrangian check at (u, y): feasibility, multiplier
// signs, complementary slackness, stationarity, and psd of the Hessian.
inline AprimeCheck check_A_prime(const QcqpInstance& inst, const VectorXd& u,
                                 const VectorXd& y, double tol = 1e-7) {
  if (u.size() != inst.n || y.size() != inst.m()) {
    throw std::invalid_argument("check_A_prime: dimension mismatch");
  }
  AprimeCheck out;
  const double feas = feasibility_residual(inst, u);
  double ysign = 0.0;
  double compl_res = 0.0;
  for (int k = 0; k < inst.m(); ++k) {
    ysign = std::max(ysign, -y(k));
    compl_res = std::max(compl_res, std::abs(y(k) * eval_constraint(inst, k + 1, u)));
  }
  const LagrangianEval le = lagrangian(inst, u, y);
  const double stat = le.grad.size() ? le.grad.cwiseAbs().maxCoeff() : 0.0;
  const PsdStatus hess = psd_status(0.5 * le.hess, tol);

  out.evidence.residuals["feasibility"] = feas;
  out.evidence.residuals["multiplier_sign"] = ysign;
  out.evidence.residuals["complementarity"] = compl_res;
  out.evidence.residuals["stationarity"] = stat;
  out.evidence.residuals["hessian_min_eig"] = hess.min_eig;

  const bool ok = feas <= tol && ysign <= tol && compl_res <= tol && stat <= tol;
  out.status = ok && hess.is_psd ? CheckStatus::Holds : CheckStatus::Fails;
  out.strict = ok && hess.is_pd;
  return out;
}

// Saddle-point check: identical content plus the direct complementarity
// characterization L(u, y) = q_0(u).
inline AprimeCheck check_saddle_point(const QcqpInstance& inst, const VectorXd& u,
                                      const VectorXd& y, double tol = 1e-7) {
  AprimeCheck out = check_A_prime(inst, u, y, tol);
  const LagrangianEval le = lagrangian(inst, u, y);
  const double lag_gap = std::abs(le.value - inst.objective.eval(u));
  out.evidence.residuals["lagrangian_equals_objective"] = lag_gap;
  if (lag_gap > tol * (1.0 + std::abs(le.value))) out.status = CheckStatus::Fails;
  return out;
}

// Constructive direction of the saddle <-> relaxation-KKT equivalence:
// X = [1;u][1;u]', same y, s = (b_0 + sum y_k b_k)' u + sum y_k c_k.
inline ConicCertificate witness_A_to_B(const QcqpInstance& inst, const VectorXd& u,
                                       const VectorXd& y) {
  const QuadraticForm f = combined_form(inst, y);
  const double s = f.b.dot(u) + f.c;  // (b_0 + sum y_k b_k)' u + sum y_k c_k
  const VectorXd x = lift(u);
  const HomogenizedInstance h = homogenize(inst);
  return make_certificate(h, x * x.transpose(), y, s);
}

// Reverse direction: u is read off a rank-1 primal matrix with x_0 != 0.
inline std::optional<std::pair<VectorXd, VectorXd>> witness_B_to_A(
    const HomogenizedInstance& h, const ConicCertificate& cert, double tol = 1e-7) {
  if (sdp_kkt_residual(h, cert).max() > tol) return std::nullopt;
  const auto r1 = rank1_extract(cert.X, 1e-6);
  if (!r1 || r1->x0_degenerate) return std::nullopt;
  const VectorXd u = r1->x.tail(r1->x.size() - 1) / r1->x(0);
  return std::make_pair(u, cert.y);
}

// Closed-form inner minimization of the Lagrangian: with A(y) psd and b(y) in
// its range the value is -b(y)' A(y)^+ b(y) + sum y_k c_k, otherwise -inf.
inline double lagrangian_dual_value(const QcqpInstance& inst, const VectorXd& y,
                                    double tol = 1e-9) {
  if (y.size() != inst.m()) throw std::invalid_argument("lagrangian_dual_value: bad y");
  const QuadraticForm f = combined_form(inst, y);
  const EigenDecomposition ed = sym_eig(f.A);
  const double lam_max = ed.eigvals.cwiseAbs().maxCoeff();
  if (ed.eigvals(0) < -tol * (1.0 + lam_max)) return -kInf;
  const PinvSolveResult ps = pinv_solve(f.A, f.b, tol);
  if (ps.range_residual > 1e-7 * (1.0 + f.b.cwiseAbs().maxCoeff())) return -kInf;
  return -f.b.dot(ps.x) + f.c;
}

struct PhiMax {
  double value = -kInf;
  VectorXd y;
};

namespace detail {

inline double phi_on_ray(const QcqpInstance& inst, const VectorXd& y0, double t) {
  return lagrangian_dual_value(inst, (t * y0).cwiseMax(0.0));
}

}  // namespace detail

// Local ascent of the concave map y -> phi(y) over y >= 0, seeded at the dual
// iterate: a multiplicative ray search (handles diverging multipliers) plus
// coordinate-wise ternary sweeps.
inline PhiMax maximize_phi(const QcqpInstance& inst, const VectorXd& y_start) {
  const int m = inst.m();
  PhiMax best;
  VectorXd y = y_start.size() == m ? VectorXd(y_start.cwiseMax(0.0)) : VectorXd::Zero(m);
  best.y = y;
  best.value = lagrangian_dual_value(inst, y);
  {
    const double at0 = lagrangian_dual_value(inst, VectorXd::Zero(m));
    if (at0 > best.value) {
      best.value = at0;
      best.y = VectorXd::Zero(m);
    }
  }
  if (m == 0) return best;

  // ray search t * y, log-scale ternary after bracketing
  if (y.cwiseAbs().maxCoeff() > 0.0) {
    double t_hi = 1.0;
    double f_hi = detail::phi_on_ray(inst, y, t_hi);
    for (int i = 0; i < 50; ++i) {
      const double f_next = detail::phi_on_ray(inst, y, t_hi * 4.0);
      if (f_next <= f_hi) break;
      t_hi *= 4.0;
      f_hi = f_next;
    }
    double lo = t_hi / 16.0, hi = t_hi * 16.0;
    for (int i = 0; i < 120; ++i) {
      const double m1 = lo * std::pow(hi / lo, 1.0 / 3.0);
      const double m2 = lo * std::pow(hi / lo, 2.0 / 3.0);
      if (detail::phi_on_ray(inst, y, m1) < detail::phi_on_ray(inst, y, m2)) {
        lo = m1;
      } else {
        hi = m2;
      }
    }
    const double t = std::sqrt(lo * hi);
    const double ft = detail::phi_on_ray(inst, y, t);
    if (ft > best.value) {
      best.value = ft;
      best.y = (t * y).cwiseMax(0.0);
    }
  }

  // coordinate sweeps
  y = best.y;
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < m; ++k) {
      auto eval_k = [&](double v) {
        VectorXd yy = y;
        yy(k) = v;
        return lagrangian_dual_value(inst, yy);
      };
      double hi = std::max(1.0, 4.0 * y(k));
      double f_cur = eval_k(y(k));
      for (int i = 0; i < 40; ++i) {
        if (eval_k(hi) <= std::max(f_cur, eval_k(0.0))) break;
        hi *= 4.0;
      }
      double lo = 0.0;
      for (int i = 0; i < 90; ++i) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (eval_k(m1) < eval_k(m2)) {
          lo = m1;
        } else {
          hi = m2;
        }
      }
      const double v = 0.5 * (lo + hi);
      if (eval_k(v) >= f_cur) y(k) = v;
    }
  }
  const double fy = lagrangian_dual_value(inst, y);
  if (fy > best.value) {
    best.value = fy;
    best.y = y;
  }
  return best;
}

// Gauss-Newton restoration onto the manifold of (near-)active constraints,
// used to polish points read off numerically rank-1 matrices. Keeps the
// point honest: callers re-verify feasibility and objective afterwards.
inline VectorXd polish_onto_active(const QcqpInstance& inst, VectorXd u,
                                   double active_tol = 1e-4) {
  std::vector<int> active;
  for (int k = 0; k < inst.m(); ++k) {
    const auto& con = inst.constraints[static_cast<std::size_t>(k)];
    if (con.sense == Sense::Eq || std::abs(con.q.eval(u)) <= active_tol) {
      active.push_back(k);
    }
  }
  if (active.empty()) return u;
  const int na = static_cast<int>(active.size());
  for (int it = 0; it < 60; ++it) {
    VectorXd r(na);
    MatrixXd J(na, inst.n);
    for (int j = 0; j < na; ++j) {
      const auto& q = inst.constraints[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])].q;
      r(j) = q.eval(u);
      J.row(j) = 2.0 * (q.A * u + q.b).transpose();
    }
    if (r.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + u.cwiseAbs().maxCoeff())) break;
    // least-norm step J du = -r
    const MatrixXd JJt = J * J.transpose();
    const VectorXd lam = pinv_solve(JJt, -r, 1e-14).x;
    const VectorXd du = J.transpose() * lam;
    if (!du.allFinite() || du.cwiseAbs().maxCoeff() > 1.0) break;
    u += du;
    if (inst.nonneg_vars) u = u.cwiseMax(0.0);
  }
  return u;
}

// Multipliers at a candidate minimizer: active-set least squares on the
// stationarity system with nonnegativity enforced by clipping and re-solving.
inline VectorXd derive_multipliers(const QcqpInstance& inst, const VectorXd& u,
                                   double active_tol = 1e-6) {
  const int m = inst.m();
  VectorXd y = VectorXd::Zero(m);
  if (m == 0) return y;
  std::vector<int> active;
  for (int k = 0; k < m; ++k) {
    const auto& q = inst.constraints[static_cast<std::size_t>(k)].q;
    const double scale = 1.0 + std::abs(q.eval(u));
    if (std::abs(q.eval(u)) <= active_tol * scale ||
        std::abs(q.eval(u)) <= active_tol) {
      active.push_back(k);
    }
  }
  const VectorXd g0 = inst.objective.A * u + inst.objective.b;
  for (int round = 0; round < m + 1; ++round) {
    if (active.empty()) break;
    const int na = static_cast<int>(active.size());
    MatrixXd G(inst.n, na);
    for (int j = 0; j < na; ++j) {
      const auto& q = inst.constraints[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])].q;
      G.col(j) = q.A * u + q.b;
    }
    const MatrixXd N = G.transpose() * G;
    const VectorXd rhs = -G.transpose() * g0;
    const VectorXd ya = pinv_solve(N, rhs, 1e-10).x;
    bool clipped = false;
    std::vector<int> keep;
    for (int j = 0; j < na; ++j) {
      if (ya(j) < -1e-9) {
        clipped = true;
      } else {
        keep.push_back(active[static_cast<std::size_t>(j)]);
      }
    }
    if (!clipped) {
      y.setZero();
      for (int j = 0; j < na; ++j) y(active[static_cast<std::size_t>(j)]) = std::max(0.0, ya(j));
      return y;
    }
    active = keep;
  }
  y.setZero();
  return y;
}

struct CertifyOptions {
  SolverOptions solver = [] {
    SolverOptions s;
    s.unbounded_threshold = 1e6;  // desk-scale divergence detection
    s.keep_trace = false;
    return s;
  }();
  double tol_resid = 1e-7;  // absolute residual tolerance
  double tol_value = 1e-6;  // relative value-comparison tolerance
  double tol_rank1 = 1e-6;
  std::optional<VectorXd> candidate_minimizer;
  double oracle_box = 10.0;
  int oracle_points = 201;
};

struct ConditionValues {
  double zeta_estimate = std::numeric_limits<double>::quiet_NaN();
  double eta_p = std::numeric_limits<double>::quiet_NaN();
  double eta_d = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
};

struct ConditionReport {
  CheckStatus A = CheckStatus::Inconclusive;
  CheckStatus A_bar = CheckStatus::Inconclusive;
  CheckStatus B = CheckStatus::Inconclusive;
  CheckStatus B_bar = CheckStatus::Inconclusive;
  CheckStatus C = CheckStatus::Inconclusive;
  CheckStatus D = CheckStatus::Inconclusive;
  CheckStatus E = CheckStatus::Inconclusive;
  CheckStatus F = CheckStatus::Inconclusive;
  std::map<std::string, ConditionEvidence> evidence;

  ConditionValues values;  // reported with the objective shift restored
  double shift = 0.0;
  bool zeta_trusted = false;       // candidate accepted as the optimal value
  bool zeta_upper_bound = false;   // oracle value: valid upper bound only
  bool eta_p_certified = false;    // two-sided via a converged primal-dual pair
  bool eta_d_pinned = false;       // lower bound meets a structural upper bound

  std::optional<VectorXd> witness_u;
  std::optional<VectorXd> witness_y;
  std::optional<double> witness_s;
  std::optional<MatrixXd> witness_X;
  std::optional<MatrixXd> witness_S;

  // relaxation pair as returned by the solver (regardless of verdicts)
  std::optional<MatrixXd> relax_X;
  std::optional<VectorXd> relax_y;
  std::optional<double> relax_s;
  SolveStatus primal_status = SolveStatus::Stalled;

  SlaterDiagnosis slater;
  bool dual_attainment_doubtful = false;
  bool hat = false;  // DNN flavor
  bool diagram_consistent = true;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
};

namespace detail {

inline bool close_vals(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  if (std::isnan(a) || std::isnan(b)) return false;
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

inline MatrixXd seeded_pd_cost(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatrixXd G(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) G(i, j) = unif(rng);
  }
  MatrixXd R = G.transpose() * G / double(dim) + 0.3 * MatrixXd::Identity(dim, dim);
  return R / R.norm();
}

}  // namespace detail

// Full condition report for an inequality-form instance: relaxation solves,
// Slater diagnosis, rank-1 extraction with face reduction, witness maps, the
// dual-value identity, and the implication-diagram self-check.
inline ConditionReport certify(const QcqpInstance& inst, const CertifyOptions& opts = {}) {
  if (inst.nonneg_vars) {
    throw std::invalid_argument("certify: inequality-form instance required");
  }
  ConditionReport rep;
  rep.shift = inst.objective_shift;
  const HomogenizedInstance h = homogenize(inst);
  const ConicProblem primal = build_primal_sdp(h);
  const double tol_r = opts.tol_resid;
  const double tol_v = opts.tol_value;

  const ConicOutcome po = solve(primal, opts.solver);
  const StructuralDualResult sr = structural_dual_analysis(primal);
  rep.slater = slater_diagnosis(h, opts.solver);
  rep.primal_status = po.status;
  if (po.certificate.X.size() > 0) {
    rep.relax_X = po.certificate.X;
    rep.relax_y = po.certificate.y;
    rep.relax_s = po.certificate.s;
  }

  // ---- zeta estimate ----
  double zeta = std::numeric_limits<double>::quiet_NaN();
  if (opts.candidate_minimizer) {
    const VectorXd& cand = *opts.candidate_minimizer;
    if (cand.size() == inst.n &&
        feasibility_residual(inst, cand) <= 10.0 * tol_r) {
      zeta = inst.objective.eval(cand);
      rep.zeta_trusted = true;
      rep.witness_u = cand;
    } else {
      rep.notes.push_back("candidate minimizer rejected: infeasible or wrong size");
    }
  }
  if (!rep.zeta_trusted && inst.n <= 4) {
    const VectorXd lo = VectorXd::Constant(inst.n, -opts.oracle_box);
    const VectorXd hi = VectorXd::Constant(inst.n, opts.oracle_box);
    const ZetaEstimate ze = brute_force_zeta(inst, lo, hi, opts.oracle_points);
    if (ze.found && ze.certified_feasible) {
      zeta = ze.value;
      rep.zeta_upper_bound = true;
      rep.witness_u = ze.argmin;
    } else if (ze.found) {
      rep.notes.push_back("oracle found only loosely feasible points; value not used");
    } else {
      rep.notes.push_back("oracle found no feasible grid point");
    }
  }

  // ---- eta_p (first pass) ----
  double eta_p = std::numeric_limits<double>::quiet_NaN();
  bool eta_p_value_ok = false;  // primal side converged enough to quote
  if (po.status == SolveStatus::PrimalUnboundedSuspected) {
    eta_p = -kInf;
  } else if (po.certificate.X.size() > 0) {
    eta_p = po.primal_obj;
    eta_p_value_ok = po.pinfeas_abs <= 100.0 * tol_r;
    rep.eta_p_certified = po.status == SolveStatus::Optimal;
  }

  // ---- eta_d ----
  const bool dual_feas_checked =
      po.certificate.X.size() > 0 &&
      sdp_kkt_residual(h, po.certificate).dual_feas <= 10.0 * tol_r;
  const PhiMax pm = maximize_phi(inst, po.certificate.y.size() == inst.m()
                                           ? po.certificate.y
                                           : VectorXd::Zero(inst.m()));
  double eta_d_lb = pm.value;
  if (dual_feas_checked) eta_d_lb = std::max(eta_d_lb, po.dual_obj);
  double eta_d_ub = kInf;
  if (rep.eta_p_certified) eta_d_ub = eta_p + tol_v * (1.0 + std::abs(eta_p));
  if (std::isfinite(sr.s_upper)) eta_d_ub = std::min(eta_d_ub, sr.s_upper);
  if (sr.certified_infeasible) {
    eta_d_lb = -kInf;
    eta_d_ub = -kInf;
    rep.notes.push_back("dual relaxation certified infeasible: " + sr.note);
  }
  const double eta_d = eta_d_lb;
  rep.eta_d_pinned =
      sr.certified_infeasible ||
      (std::isfinite(eta_d_ub) && std::isfinite(eta_d_lb) &&
       eta_d_ub - eta_d_lb <= tol_v * (1.0 + std::abs(eta_d_lb)));
  rep.dual_attainment_doubtful =
      (po.status != SolveStatus::Optimal && po.certificate.y.size() > 0 &&
       po.certificate.y.cwiseAbs().maxCoeff() > 1e6) ||
      (pm.y.size() > 0 && pm.y.cwiseAbs().maxCoeff() > 1e6);

  // ---- pin eta_p when bounds from both sides meet ----
  // lower: weak duality (phi, checked dual value) and the sign-propagation
  // bound; upper: any verified feasible point of the original problem.
  if (!rep.eta_p_certified && eta_p != -kInf) {
    double lb = std::isfinite(eta_d_lb) ? eta_d_lb : -kInf;
    const StructuralPrimalResult sp = structural_primal_bound(primal);
    lb = std::max(lb, sp.objective_lower);
    const double ub = std::isfinite(zeta) ? zeta : kInf;
    if (std::isfinite(lb) && std::isfinite(ub) &&
        ub - lb <= tol_v * (1.0 + std::abs(ub))) {
      eta_p = ub;
      eta_p_value_ok = true;
      rep.eta_p_certified = true;
      rep.notes.push_back("eta_p pinned by matching lower and upper bounds");
    }
  }

  // ---- C: constructive exactness ----
  std::optional<VectorXd> u_exact;
  ConditionEvidence ev_c;
  auto try_extract = [&](const MatrixXd& X) -> bool {
    const auto r1 = rank1_extract(X, opts.tol_rank1);
    if (!r1 || r1->x0_degenerate) return false;
    VectorXd u = r1->x.tail(inst.n) / r1->x(0);
    u = polish_onto_active(inst, u);
    const double feas = feasibility_residual(inst, u);
    const double val = inst.objective.eval(u);
    if (feas <= 10.0 * tol_r && std::isfinite(eta_p) &&
        detail::close_vals(val, eta_p, tol_v)) {
      u_exact = u;
      ev_c.residuals["extracted_feasibility"] = feas;
      ev_c.residuals["extracted_value_minus_eta_p"] = val - eta_p;
      return true;
    }
    return false;
  };

  bool unique_solution_probe = false;
  bool probes_ran = false;
  MatrixXd probe_tr, probe_rand;
  auto run_face_probes = [&]() {
    if (probes_ran || !std::isfinite(eta_p) || !eta_p_value_ok) return;
    probes_ran = true;
    // face reduction: re-solve over the near-optimal face with a trace
    // objective, then with a seeded positive-definite objective
    ConicProblem face = primal;
    LinearMap cap;
    cap.A = primal.cost;
    cap.sense = Sense::Leq;
    cap.rhs = eta_p + std::max(1e-8, tol_v * (1.0 + std::abs(eta_p)));
    face.maps.push_back(cap);
    ConicProblem face_tr = face;
    face_tr.cost = MatrixXd::Identity(primal.dim, primal.dim);
    const ConicOutcome rt = solve(face_tr, opts.solver);
    if (rt.certificate.X.size() > 0 && rt.pinfeas_abs <= 100.0 * tol_r) {
      probe_tr = rt.certificate.X;
    }
    ConicProblem face_r = face;
    face_r.cost = detail::seeded_pd_cost(primal.dim, opts.solver.seed);
    const ConicOutcome rr = solve(face_r, opts.solver);
    if (rr.certificate.X.size() > 0 && rr.pinfeas_abs <= 100.0 * tol_r) {
      probe_rand = rr.certificate.X;
    }
    if (rt.status == SolveStatus::Optimal && rr.status == SolveStatus::Optimal &&
        probe_tr.size() > 0 && probe_rand.size() > 0) {
      const double diff = max_abs(probe_tr - probe_rand);
      ev_c.residuals["face_probe_difference"] = diff;
      unique_solution_probe = diff <= 1e-4 * (1.0 + max_abs(probe_tr));
    }
  };
  if (po.certificate.X.size() > 0 && std::isfinite(eta_p) && eta_p_value_ok) {
    if (!try_extract(po.certificate.X)) {
      run_face_probes();
      if (probe_tr.size() == 0 || !try_extract(probe_tr)) {
        if (probe_rand.size() > 0) try_extract(probe_rand);
      }
    }
  }
  if (u_exact) {
    rep.C = CheckStatus::Holds;
    const VectorXd x_exact = lift(*u_exact);
    rep.witness_X = MatrixXd(x_exact * x_exact.transpose());
  } else if (po.status == SolveStatus::PrimalUnboundedSuspected) {
    rep.C = CheckStatus::Fails;
    ev_c.note = "no optimal solution: primal relaxation unbounded (suspected)";
  } else if (unique_solution_probe) {
    rep.C = CheckStatus::Fails;
    ev_c.note = "optimal matrix unique by face probes and not rank-1";
  } else {
    rep.C = CheckStatus::Inconclusive;
    ev_c.note = "no rank-1 optimal matrix found";
  }
  rep.evidence["C"] = ev_c;

  // a verified extraction improves the zeta estimate
  if (u_exact) {
    const double val = inst.objective.eval(*u_exact);
    if (rep.zeta_trusted && val < zeta - tol_v * (1.0 + std::abs(zeta))) {
      rep.notes.push_back("candidate minimizer beaten by extracted point");
      zeta = val;
    } else if (!rep.zeta_trusted && (!std::isfinite(zeta) || val <= zeta)) {
      zeta = val;
      rep.zeta_upper_bound = true;
    }
    rep.witness_u = *u_exact;
  }

  // ---- D ----
  ConditionEvidence ev_d;
  ev_d.residuals["eta_p"] = eta_p;
  ev_d.residuals["zeta_estimate"] = zeta;
  if (eta_p == -kInf) {
    rep.D = CheckStatus::Fails;
    ev_d.note = "eta_p = -inf (unbounded suspected)";
  } else if (!std::isfinite(zeta) || !eta_p_value_ok) {
    rep.D = CheckStatus::Inconclusive;
  } else if (detail::close_vals(eta_p, zeta, tol_v)) {
    // an upper bound matching the lower-bounding relaxation pins the value
    rep.D = CheckStatus::Holds;
  } else if (u_exact && detail::close_vals(inst.objective.eval(*u_exact), eta_p, tol_v)) {
    rep.D = CheckStatus::Holds;
    ev_d.note = "pinned by the extracted minimizer";
  } else if (rep.zeta_trusted && rep.eta_p_certified) {
    rep.D = CheckStatus::Fails;
  } else {
    rep.D = CheckStatus::Inconclusive;
  }
  rep.evidence["D"] = ev_d;

  // ---- E ----
  ConditionEvidence ev_e;
  ev_e.residuals["eta_d_lower"] = eta_d_lb;
  ev_e.residuals["eta_d_upper"] = eta_d_ub;
  if (sr.certified_infeasible) {
    rep.E = std::isnan(zeta) ? CheckStatus::Inconclusive : CheckStatus::Fails;
    ev_e.note = "dual infeasible: eta_d = -inf";
  } else if (std::isfinite(zeta) && std::isfinite(eta_d_lb) &&
             detail::close_vals(eta_d_lb, zeta, tol_v)) {
    rep.E = CheckStatus::Holds;  // squeeze: eta_d <= zeta and lower bound meets it
  } else if (std::isfinite(zeta) && rep.zeta_trusted &&
             eta_d_ub < zeta - tol_v * (1.0 + std::abs(zeta))) {
    rep.E = CheckStatus::Fails;
    ev_e.note = "certified upper bound on eta_d sits below zeta";
  } else {
    rep.E = CheckStatus::Inconclusive;
  }
  rep.evidence["E"] = ev_e;

  // ---- F mirrors E through phi = eta_d ----
  ConditionEvidence ev_f;
  ev_f.residuals["phi"] = pm.value;
  ev_f.residuals["phi_minus_eta_d"] = std::isfinite(pm.value) && std::isfinite(eta_d)
                                          ? pm.value - eta_d
                                          : 0.0;
  rep.F = rep.E;
  if (dual_feas_checked && std::isfinite(po.dual_obj) && std::isfinite(pm.value) &&
      po.dual_obj - pm.value > 1e-5 * (1.0 + std::abs(po.dual_obj))) {
    ev_f.note = "internal: phi ascent fell short of the dual value";
    rep.violations.push_back("phi=eta_d identity violated (toolkit issue)");
  }
  rep.evidence["F"] = ev_f;

  // ---- B ----
  ConditionEvidence ev_b;
  bool b_holds = false;
  if (rep.C == CheckStatus::Holds && u_exact && po.certificate.y.size() == inst.m()) {
    const VectorXd x = lift(*u_exact);
    const ConicCertificate bc =
        make_certificate(h, x * x.transpose(), po.certificate.y, po.certificate.s);
    const KktResiduals kr = sdp_kkt_residual(h, bc);
    ev_b.residuals["kkt_primal"] = kr.primal_feas;
    ev_b.residuals["kkt_dual"] = kr.dual_feas;
    ev_b.residuals["kkt_compl_y"] = kr.complementarity_y;
    ev_b.residuals["kkt_compl_S"] = kr.complementarity_S;
    ev_b.residuals["multiplier_norm"] =
        inst.m() ? po.certificate.y.cwiseAbs().maxCoeff() : 0.0;
    b_holds = kr.max() <= 10.0 * tol_r && !rep.dual_attainment_doubtful &&
              (inst.m() == 0 || po.certificate.y.cwiseAbs().maxCoeff() <= 1e6);
    if (b_holds) {
      rep.witness_X = bc.X;
      rep.witness_y = bc.y;
      rep.witness_s = bc.s;
      rep.witness_S = bc.S;
    }
  }
  if (b_holds) {
    rep.B = CheckStatus::Holds;
  } else if (rep.C == CheckStatus::Fails) {
    rep.B = CheckStatus::Fails;
    ev_b.note = "exactness fails";
  } else if (rep.E == CheckStatus::Fails && rep.D == CheckStatus::Holds) {
    rep.B = CheckStatus::Fails;
    ev_b.note = "strong duality fails: eta_d < eta_p = zeta";
  } else if (sr.certified_infeasible) {
    rep.B = CheckStatus::Fails;
    ev_b.note = "dual infeasible";
  } else if (rep.C == CheckStatus::Holds && u_exact) {
    // is there any finite dual pair complementary with the optimal matrix?
    // run the sign-propagation analysis of the KKT system at the extracted
    // point; conclusive when the optimal matrix is unique
    run_face_probes();
    const VectorXd x_star = lift(*u_exact);
    const StructuralDualResult kkt_sr = structural_dual_analysis(primal, &x_star);
    if (kkt_sr.certified_infeasible && unique_solution_probe) {
      rep.B = CheckStatus::Fails;
      ev_b.note = "no finite dual pair is complementary with the unique optimum";
      rep.dual_attainment_doubtful = true;
    } else if (rep.dual_attainment_doubtful) {
      rep.B = CheckStatus::Fails;
      ev_b.note = "dual attainment doubtful: multiplier norm beyond 1e6";
    } else {
      rep.B = CheckStatus::Inconclusive;
    }
  } else {
    rep.B = CheckStatus::Inconclusive;
  }
  rep.evidence["B"] = ev_b;

  // ---- B_bar: KKT pair with rank S = n ----
  if (rep.B == CheckStatus::Holds && rep.witness_S) {
    const int rank_s = numeric_rank(*rep.witness_S, 1e-6);
    rep.evidence["B_bar"].residuals["rank_S"] = rank_s;
    rep.B_bar = rank_s == inst.n ? CheckStatus::Holds : CheckStatus::Inconclusive;
  } else if (rep.B == CheckStatus::Fails) {
    rep.B_bar = CheckStatus::Fails;
  }

  // ---- A (and A_bar) ----
  ConditionEvidence ev_a;
  bool a_resolved = false;
  if (rep.zeta_trusted && opts.candidate_minimizer) {
    const VectorXd& cand = *opts.candidate_minimizer;
    const VectorXd y_cand = derive_multipliers(inst, cand);
    const AprimeCheck ac = check_saddle_point(inst, cand, y_cand, tol_r * 10.0);
    ev_a = ac.evidence;
    if (ac.status == CheckStatus::Holds) {
      rep.A = CheckStatus::Holds;
      rep.A_bar = ac.strict ? CheckStatus::Holds : CheckStatus::Inconclusive;
      rep.witness_u = cand;
      rep.witness_y = y_cand;
      a_resolved = true;
      if (rep.B == CheckStatus::Inconclusive) {
        const ConicCertificate wc = witness_A_to_B(inst, cand, y_cand);
        if (sdp_kkt_residual(h, wc).max() <= 10.0 * tol_r) {
          rep.B = CheckStatus::Holds;
          rep.evidence["B"].note = "upgraded through the saddle-point witness";
          rep.witness_X = wc.X;
          rep.witness_y = wc.y;
          rep.witness_s = wc.s;
          rep.witness_S = wc.S;
        }
      }
    } else {
      ev_a.note = "saddle check fails at the trusted minimizer";
    }
  }
  if (!a_resolved && rep.B == CheckStatus::Holds && rep.witness_X) {
    const ConicCertificate bc{*rep.witness_X, *rep.witness_y, *rep.witness_s,
                              *rep.witness_S};
    const auto ba = witness_B_to_A(h, bc, 10.0 * tol_r);
    if (ba) {
      const AprimeCheck ac = check_A_prime(inst, ba->first, ba->second, 100.0 * tol_r);
      if (ac.status == CheckStatus::Holds) {
        rep.A = CheckStatus::Holds;
        rep.A_bar = ac.strict ? CheckStatus::Holds : CheckStatus::Inconclusive;
        rep.witness_u = ba->first;
        rep.witness_y = ba->second;
        for (const auto& [k, v] : ac.evidence.residuals) ev_a.residuals[k] = v;
        a_resolved = true;
      } else {
        rep.violations.push_back(
            "saddle witness derived from a valid KKT pair failed (toolkit issue)");
      }
    }
  }
  if (!a_resolved) {
    if (rep.B == CheckStatus::Fails) {
      rep.A = CheckStatus::Fails;  // the two conditions are equivalent
      rep.A_bar = CheckStatus::Fails;
      if (ev_a.note.empty()) ev_a.note = "equivalent KKT-pair condition fails";
    } else {
      rep.A = CheckStatus::Inconclusive;
      rep.A_bar = CheckStatus::Inconclusive;
    }
  }
  rep.evidence["A"] = ev_a;

  // ---- values (shift restored) ----
  rep.values.zeta_estimate = zeta + (std::isfinite(zeta) ? rep.shift : 0.0);
  rep.values.eta_p = std::isfinite(eta_p) ? eta_p + rep.shift : eta_p;
  rep.values.eta_d = std::isfinite(eta_d) ? eta_d + rep.shift : eta_d;
  rep.values.phi = std::isfinite(pm.value) ? pm.value + rep.shift : pm.value;

  // ---- implication diagram self-check ----
  auto holds = [](CheckStatus s) { return s == CheckStatus::Holds; };
  auto fails = [](CheckStatus s) { return s == CheckStatus::Fails; };
  if (holds(rep.B) && fails(rep.C)) rep.violations.push_back("B holds but C fails");
  if (holds(rep.C) && fails(rep.D)) rep.violations.push_back("C holds but D fails");
  if (holds(rep.E) && fails(rep.D)) rep.violations.push_back("E holds but D fails");
  if (rep.slater.holds && holds(rep.C) && fails(rep.B)) {
    rep.violations.push_back("Slater and C hold but B fails");
  }
  if (rep.zeta_trusted && holds(rep.D) && fails(rep.C)) {
    rep.violations.push_back("minimizer exists and D holds but C fails");
  }
  if ((holds(rep.A) && fails(rep.B)) || (fails(rep.A) && holds(rep.B))) {
    rep.violations.push_back("A and B disagree");
  }
  rep.diagram_consistent = rep.violations.empty();
  return rep;
}

}  // namespace qcert
