#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcert/certify.hpp"

namespace qcert {

// Dual-side certificate of the DNN pair: the dual slack splits into a psd
// part and an elementwise-nonnegative part, Q_0 - sum y_k Q_k - s H = S + Z.
struct DnnCertificate {
  MatrixXd X;
  VectorXd y;  // free multipliers (equality constraints)
  double s = 0.0;
  MatrixXd Z;      // nonnegative factor
  MatrixXd S_psd;  // psd factor

  double decomposition_residual(const HomogenizedInstance& h) const {
    return max_abs(slack_matrix(h, y, s) - S_psd - Z);
  }
};

// Dual DNN description: maximize s over free y with the split membership.
struct DualDnnDescription {
  HomogenizedInstance h;

  // constructive membership check for S_tot in psd + nonneg: accepts a split
  bool accepts(const MatrixXd& S_psd, const MatrixXd& Z, const VectorXd& y, double s,
               double tol = 1e-8) const {
    const double scale = 1.0 + max_abs(h.Qs[0]);
    if (max_abs(slack_matrix(h, y, s) - S_psd - Z) > tol * scale) return false;
    if (Z.size() > 0 && Z.minCoeff() < -tol * scale) return false;
    return psd_status(S_psd, tol).is_psd;
  }
};

inline DualDnnDescription build_ddnn(const HomogenizedInstance& h) {
  if (!h.nonneg) throw std::invalid_argument("build_ddnn: equality-form instance required");
  return DualDnnDescription{h};
}

struct DnnMembership {
  bool member = false;
  double min_value = 0.0;          // min M • X over the normalized test set
  std::optional<MatrixXd> refutation;  // X in psd∩nonneg, trace 1, M • X < 0
};

// Refutation-style membership test for the dual cone psd + nonneg: M is NOT a
// member iff some X in psd ∩ nonneg with trace 1 has M • X < 0.
inline DnnMembership dnn_dual_cone_membership(const MatrixXd& M,
                                              const SolverOptions& base = {}) {
  const int d = static_cast<int>(M.rows());
  StandardForm f;
  f.d = d;
  const int n_entries = d * (d + 1) / 2;
  f.l = n_entries;
  f.C = symmetrized(M);
  f.clp = VectorXd::Zero(f.l);
  // trace X = 1 plays the role of the normalization row
  f.A.push_back(MatrixXd::Identity(d, d));
  f.alp.push_back(VectorXd::Zero(f.l));
  f.b = VectorXd::Zero(1 + n_entries);
  f.b(0) = 1.0;
  int t = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      MatrixXd E = MatrixXd::Zero(d, d);
      if (i == j) {
        E(i, i) = 1.0;
      } else {
        E(i, j) = 0.5;
        E(j, i) = 0.5;
      }
      VectorXd a = VectorXd::Zero(f.l);
      a(t) = -1.0;
      f.A.push_back(E);
      f.alp.push_back(a);
      ++t;
    }
  }
  SolverOptions opts = base;
  opts.keep_trace = false;
  const RawOutcome res = solve_standard(f, opts);
  DnnMembership out;
  if (res.X.size() == 0) return out;
  out.min_value = res.primal_obj;
  const double tol = 1e-7 * (1.0 + M.norm());
  if (res.status == SolveStatus::Optimal && res.primal_obj < -tol) {
    out.refutation = res.X;
    out.member = false;
  } else if (res.status == SolveStatus::Optimal) {
    out.member = true;
  }
  return out;
}

// phi-hat at a dual point: the best s with Q_0 - sum y_k Q_k - Z - s H psd,
// in closed form through the Schur complement of the u-block.
inline double hat_dual_value(const HomogenizedInstance& h, const VectorXd& y,
                             const MatrixXd& Z, double tol = 1e-9) {
  MatrixXd S0 = h.Qs[0];
  for (int k = 1; k <= h.m(); ++k) S0 -= y(k - 1) * h.Qs[static_cast<std::size_t>(k)];
  if (Z.size() > 0) S0 -= Z;
  const int n = h.n();
  const MatrixXd B = S0.block(1, 1, n, n);
  const VectorXd v = S0.block(1, 0, n, 1);
  const EigenDecomposition eb = sym_eig(B);
  if (eb.eigvals(0) < -tol * (1.0 + eb.eigvals.cwiseAbs().maxCoeff())) return -kInf;
  const PinvSolveResult ps = pinv_solve(B, v, tol);
  if (ps.range_residual > 1e-7 * (1.0 + v.cwiseAbs().maxCoeff())) return -kInf;
  return S0(0, 0) - v.dot(ps.x);
}

// Hat-flavored condition report for the equality-form DNN pipeline.
inline ConditionReport certify_dnn(const QcqpInstance& inst, const CertifyOptions& opts = {}) {
  if (!inst.nonneg_vars) {
    throw std::invalid_argument("certify_dnn: equality-form nonnegative instance required");
  }
  ConditionReport rep;
  rep.hat = true;
  rep.shift = inst.objective_shift;
  const HomogenizedInstance h = homogenize(inst);
  const ConicProblem pdnn = build_pdnn(h);
  const double tol_r = opts.tol_resid;
  const double tol_v = opts.tol_value;

  const ConicOutcome po = solve(pdnn, opts.solver);
  rep.slater = dnn_slater(h, opts.solver);
  rep.primal_status = po.status;
  if (po.certificate.X.size() > 0) {
    rep.relax_X = po.certificate.X;
    rep.relax_y = po.certificate.y;
    rep.relax_s = po.certificate.s;
  }

  // ---- zeta-hat ----
  double zeta = std::numeric_limits<double>::quiet_NaN();
  if (opts.candidate_minimizer) {
    const VectorXd& cand = *opts.candidate_minimizer;
    if (cand.size() == inst.n && feasibility_residual(inst, cand) <= 10.0 * tol_r) {
      zeta = inst.objective.eval(cand);
      rep.zeta_trusted = true;
      rep.witness_u = cand;
    } else {
      rep.notes.push_back("candidate minimizer rejected: infeasible or wrong size");
    }
  }
  if (!rep.zeta_trusted && inst.n <= 4) {
    const VectorXd lo = VectorXd::Constant(inst.n, 0.0);
    const VectorXd hi = VectorXd::Constant(inst.n, opts.oracle_box);
    const ZetaEstimate ze = brute_force_zeta(inst, lo, hi, opts.oracle_points);
    if (ze.found && ze.certified_feasible) {
      zeta = ze.value;
      rep.zeta_upper_bound = true;
      rep.witness_u = ze.argmin;
    }
  }

  // ---- values ----
  double eta_p = std::numeric_limits<double>::quiet_NaN();
  bool eta_p_value_ok = false;
  if (po.status == SolveStatus::PrimalUnboundedSuspected) {
    eta_p = -kInf;
  } else if (po.certificate.X.size() > 0) {
    eta_p = po.primal_obj;
    eta_p_value_ok = po.pinfeas_abs <= 100.0 * tol_r;
    rep.eta_p_certified = po.status == SolveStatus::Optimal;
  }

  double eta_d_lb = -kInf;
  double phi_hat = -kInf;
  bool dual_feas_checked = false;
  if (po.certificate.X.size() > 0) {
    const DualDnnDescription dd = build_ddnn(h);
    dual_feas_checked = dd.accepts(po.certificate.S, po.Z, po.certificate.y,
                                   po.certificate.s, 10.0 * tol_r);
    phi_hat = hat_dual_value(h, po.certificate.y, po.Z);
    eta_d_lb = phi_hat;
    if (dual_feas_checked) eta_d_lb = std::max(eta_d_lb, po.dual_obj);
  }
  double eta_d_ub = kInf;
  if (rep.eta_p_certified) eta_d_ub = eta_p + tol_v * (1.0 + std::abs(eta_p));
  rep.eta_d_pinned = std::isfinite(eta_d_ub) && std::isfinite(eta_d_lb) &&
                     eta_d_ub - eta_d_lb <= tol_v * (1.0 + std::abs(eta_d_lb));
  rep.dual_attainment_doubtful =
      po.status != SolveStatus::Optimal && po.certificate.y.size() > 0 &&
      po.certificate.y.cwiseAbs().maxCoeff() > 1e6;

  // ---- C-hat: rank-1 with a nonnegative extracted point ----
  std::optional<VectorXd> u_exact;
  ConditionEvidence ev_c;
  auto try_extract = [&](const MatrixXd& X) -> bool {
    const auto r1 = rank1_extract(X, opts.tol_rank1);
    if (!r1 || r1->x0_degenerate) return false;
    const VectorXd u = r1->x.tail(inst.n) / r1->x(0);
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
  if (po.certificate.X.size() > 0 && std::isfinite(eta_p) && eta_p_value_ok) {
    if (!try_extract(po.certificate.X)) {
      ConicProblem face = pdnn;
      LinearMap cap;
      cap.A = pdnn.cost;
      cap.sense = Sense::Leq;
      cap.rhs = eta_p + std::max(1e-8, tol_v * (1.0 + std::abs(eta_p)));
      face.maps.push_back(cap);
      ConicProblem face_tr = face;
      face_tr.cost = MatrixXd::Identity(pdnn.dim, pdnn.dim);
      const ConicOutcome rt = solve(face_tr, opts.solver);
      bool got = rt.certificate.X.size() > 0 && rt.pinfeas_abs <= 100.0 * tol_r &&
                 try_extract(rt.certificate.X);
      if (!got) {
        ConicProblem face_r = face;
        face_r.cost = detail::seeded_pd_cost(pdnn.dim, opts.solver.seed);
        const ConicOutcome rr = solve(face_r, opts.solver);
        got = rr.certificate.X.size() > 0 && rr.pinfeas_abs <= 100.0 * tol_r &&
              try_extract(rr.certificate.X);
        if (!got && rt.status == SolveStatus::Optimal && rr.status == SolveStatus::Optimal) {
          const double diff = max_abs(rt.certificate.X - rr.certificate.X);
          unique_solution_probe = diff <= 1e-4 * (1.0 + max_abs(rt.certificate.X));
        }
      }
    }
  }
  if (u_exact) {
    rep.C = CheckStatus::Holds;
  } else if (po.status == SolveStatus::PrimalUnboundedSuspected) {
    rep.C = CheckStatus::Fails;
    ev_c.note = "no optimal solution: relaxation unbounded (suspected)";
  } else if (unique_solution_probe) {
    rep.C = CheckStatus::Fails;
    ev_c.note = "optimal matrix unique by face probes and not rank-1";
  } else {
    rep.C = CheckStatus::Inconclusive;
  }
  rep.evidence["C"] = ev_c;
  if (u_exact) {
    const double val = inst.objective.eval(*u_exact);
    if (!rep.zeta_trusted && (!std::isfinite(zeta) || val <= zeta)) {
      zeta = val;
      rep.zeta_upper_bound = true;
    }
    rep.witness_u = *u_exact;
  }

  // ---- D-hat / E-hat / F-hat ----
  ConditionEvidence ev_d;
  ev_d.residuals["eta_p_hat"] = eta_p;
  ev_d.residuals["zeta_hat_estimate"] = zeta;
  if (eta_p == -kInf) {
    rep.D = CheckStatus::Fails;
  } else if (!std::isfinite(zeta) || !eta_p_value_ok) {
    rep.D = CheckStatus::Inconclusive;
  } else if (detail::close_vals(eta_p, zeta, tol_v)) {
    rep.D = CheckStatus::Holds;
  } else if (rep.zeta_trusted && rep.eta_p_certified) {
    rep.D = CheckStatus::Fails;
  } else {
    rep.D = CheckStatus::Inconclusive;
  }
  rep.evidence["D"] = ev_d;

  ConditionEvidence ev_e;
  ev_e.residuals["eta_d_hat_lower"] = eta_d_lb;
  if (std::isfinite(zeta) && std::isfinite(eta_d_lb) &&
      detail::close_vals(eta_d_lb, zeta, tol_v)) {
    rep.E = CheckStatus::Holds;
  } else if (std::isfinite(zeta) && rep.zeta_trusted && std::isfinite(eta_d_ub) &&
             eta_d_ub < zeta - tol_v * (1.0 + std::abs(zeta))) {
    rep.E = CheckStatus::Fails;
  } else {
    rep.E = CheckStatus::Inconclusive;
  }
  rep.evidence["E"] = ev_e;
  rep.F = rep.E;
  rep.evidence["F"].residuals["phi_hat"] = phi_hat;

  // ---- B-hat: constructive pair with split complementarity ----
  ConditionEvidence ev_b;
  bool b_holds = false;
  if (rep.C == CheckStatus::Holds && u_exact && po.certificate.X.size() > 0) {
    const VectorXd x = lift(*u_exact);
    const MatrixXd Xr = x * x.transpose();
    const double comp_z = po.Z.size() > 0 ? std::abs(inner(po.Z, Xr)) : 0.0;
    const double comp_s = std::abs(inner(po.certificate.S, Xr));
    ev_b.residuals["compl_Z"] = comp_z;
    ev_b.residuals["compl_S_psd"] = comp_s;
    ev_b.residuals["gap"] = std::isfinite(eta_p) ? std::abs(eta_p - eta_d_lb) : kInf;
    b_holds = dual_feas_checked && comp_z <= 10.0 * tol_r && comp_s <= 10.0 * tol_r &&
              !rep.dual_attainment_doubtful &&
              detail::close_vals(eta_p, eta_d_lb, tol_v);
    if (b_holds) {
      rep.witness_X = Xr;
      rep.witness_y = po.certificate.y;
      rep.witness_s = po.certificate.s;
      rep.witness_S = po.certificate.S;
    }
  }
  if (b_holds) {
    rep.B = CheckStatus::Holds;
  } else if (rep.C == CheckStatus::Fails) {
    rep.B = CheckStatus::Fails;
  } else if (rep.E == CheckStatus::Fails && rep.D == CheckStatus::Holds) {
    rep.B = CheckStatus::Fails;
  } else {
    rep.B = CheckStatus::Inconclusive;
  }
  rep.evidence["B"] = ev_b;

  // ---- A-hat: saddle point of the lifted Lagrangian at the witness ----
  ConditionEvidence ev_a;
  if (rep.B == CheckStatus::Holds && rep.witness_X && u_exact) {
    const VectorXd x = lift(*u_exact);
    const double stat = (po.certificate.S * x).cwiseAbs().maxCoeff();
    const double comp_z = po.Z.size() > 0 ? std::abs(inner(po.Z, *rep.witness_X)) : 0.0;
    ev_a.residuals["S_psd_times_x"] = stat;
    ev_a.residuals["compl_Z"] = comp_z;
    const bool ok = stat <= 100.0 * tol_r && comp_z <= 10.0 * tol_r;
    rep.A = ok ? CheckStatus::Holds : CheckStatus::Inconclusive;
    if (!ok) ev_a.note = "saddle verification fell short at the witness";
    rep.A_bar = rep.A == CheckStatus::Holds &&
                        numeric_rank(po.certificate.S, 1e-6) == inst.n
                    ? CheckStatus::Holds
                    : CheckStatus::Inconclusive;
    rep.B_bar = rep.A_bar;
  } else if (rep.B == CheckStatus::Fails) {
    rep.A = CheckStatus::Fails;
    rep.A_bar = CheckStatus::Fails;
    rep.B_bar = CheckStatus::Fails;
  }
  rep.evidence["A"] = ev_a;

  rep.values.zeta_estimate = std::isfinite(zeta) ? zeta + rep.shift : zeta;
  rep.values.eta_p = std::isfinite(eta_p) ? eta_p + rep.shift : eta_p;
  rep.values.eta_d = std::isfinite(eta_d_lb) ? eta_d_lb + rep.shift : eta_d_lb;
  rep.values.phi = std::isfinite(phi_hat) ? phi_hat + rep.shift : phi_hat;

  auto holds = [](CheckStatus s) { return s == CheckStatus::Holds; };
  auto fails = [](CheckStatus s) { return s == CheckStatus::Fails; };
  if (holds(rep.B) && fails(rep.C)) rep.violations.push_back("B holds but C fails");
  if (holds(rep.C) && fails(rep.D)) rep.violations.push_back("C holds but D fails");
  if (holds(rep.E) && fails(rep.D)) rep.violations.push_back("E holds but D fails");
  if (rep.slater.holds && holds(rep.C) && fails(rep.B)) {
    rep.violations.push_back("Slater and C hold but B fails");
  }
  rep.diagram_consistent = rep.violations.empty();
  return rep;
}

}  // namespace qcert
