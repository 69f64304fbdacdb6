#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qcert/conic.hpp"

namespace qcert {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SolverOptions {
  double tol_gap = 1e-9;    // relative duality-gap target
  double tol_feas = 1e-9;   // feasibility target
  int max_iters = 200;
  double unbounded_threshold = 1e8;  // |objective| magnitude treated as unbounded
  double sigma = 0.2;                // nominal barrier reduction per step
  double step_frac = 0.98;           // fraction-to-boundary
  std::uint64_t seed = 0;            // tie-breaking / auxiliary randomization
  double stop_below = -kInf;         // early exit once a feasible iterate dips below
  bool keep_trace = true;

  void check() const {
    if (tol_gap <= 0 || tol_feas <= 0 || unbounded_threshold <= 0) {
      throw std::invalid_argument("solver options: tolerances must be positive");
    }
    if (!(sigma > 0.0 && sigma < 1.0)) {
      throw std::invalid_argument("solver options: sigma must be in (0,1)");
    }
    if (!(step_frac > 0.0 && step_frac < 1.0)) {
      throw std::invalid_argument("solver options: step fraction must be in (0,1)");
    }
  }
};

enum class SolveStatus {
  Optimal,
  PrimalUnboundedSuspected,
  PrimalInfeasibleSuspected,
  DualInfeasibleCertified,
  Stalled,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "OPTIMAL";
    case SolveStatus::PrimalUnboundedSuspected: return "PRIMAL_UNBOUNDED_SUSPECTED";
    case SolveStatus::PrimalInfeasibleSuspected: return "PRIMAL_INFEASIBLE_SUSPECTED";
    case SolveStatus::DualInfeasibleCertified: return "DUAL_INFEASIBLE_CERTIFIED";
    case SolveStatus::Stalled: return "STALLED";
  }
  return "?";
}

struct TraceRow {
  int iter;
  double mu;
  double primal_obj;
  double dual_obj;
  double pinfeas;
  double dinfeas;
  double step_p = 0.0;
  double step_d = 0.0;
  double sigma = 0.0;
};

// --------------------------------------------------------------------------
// Native solver input: one PSD block plus one nonnegative (LP) block,
//   min C • X + clp' w   s.t.  A_r • X + alp_r' w = b_r,  X psd, w >= 0.
// Inequality rows of a ConicProblem become slack entries of w; the
// elementwise-nonnegativity of a DNN problem becomes coupled copies of the
// matrix entries in w.
// --------------------------------------------------------------------------
struct StandardForm {
  int d = 0;  // psd block side
  int l = 0;  // lp block size
  MatrixXd C;
  VectorXd clp;
  std::vector<MatrixXd> A;
  std::vector<VectorXd> alp;
  VectorXd b;

  int rows() const { return static_cast<int>(A.size()); }
};

struct RawOutcome {
  SolveStatus status = SolveStatus::Stalled;
  MatrixXd X;
  VectorXd w;
  VectorXd th;
  MatrixXd S;
  VectorXd z;
  double primal_obj = std::numeric_limits<double>::quiet_NaN();
  double dual_obj = std::numeric_limits<double>::quiet_NaN();
  double rel_gap = kInf;
  double pinfeas_abs = kInf;
  double pinfeas_rel = kInf;
  double dinfeas_abs = kInf;
  int iterations = 0;
  std::vector<TraceRow> trace;
  bool has_feasible = false;        // some iterate had small relative residual
  double best_feasible_obj = kInf;  // objective at the most negative such iterate
  std::string note;
};

namespace detail {

inline double lp_step_bound(const VectorXd& v, const VectorXd& dv) {
  double a = kInf;
  for (int i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  }
  return a;
}

// Largest a with V + a*dV psd, via eig of V^{-1/2} dV V^{-1/2}.
inline double psd_step_bound(const EigenDecomposition& ev, const MatrixXd& dV) {
  const double lam_max = std::max(ev.eigvals.maxCoeff(), 1e-300);
  const MatrixXd inv_sqrt = sym_pow(ev, -0.5, lam_max * 1e-16);
  const MatrixXd K = symmetrized(inv_sqrt * dV * inv_sqrt);
  if (!K.allFinite()) return 0.0;
  const double lam_min = sym_eig(K).eigvals(0);
  if (lam_min >= 0.0) return kInf;
  return -1.0 / lam_min;
}

// kept loosely centered: the extreme eigenvalues must stay consistent with
// the complementarity level, lambda_min(X) * lambda_max(S) >= gamma * mu and
// symmetrically, plus the same guard on the LP products. The two-sided form
// avoids ill-conditioned matrix products whose rounding noise would swamp
// the threshold.
inline bool centrality_ok(const MatrixXd& X, const MatrixXd& S, const VectorXd& w,
                          const VectorXd& z, double gamma) {
  const double nu = double(X.rows()) + double(w.size());
  double comp = inner(X, S) + (w.size() > 0 ? w.dot(z) : 0.0);
  if (!(comp > 0.0)) return false;
  const double mu = comp / nu;
  const EigenDecomposition ex = sym_eig(X);
  const EigenDecomposition es = sym_eig(S);
  const double lx_min = ex.eigvals(0), lx_max = ex.eigvals(ex.eigvals.size() - 1);
  const double ls_min = es.eigvals(0), ls_max = es.eigvals(es.eigvals.size() - 1);
  if (lx_min <= 0.0 || ls_min <= 0.0) return false;
  if (lx_min * ls_max < gamma * mu || ls_min * lx_max < gamma * mu) return false;
  for (int i = 0; i < w.size(); ++i) {
    if (w(i) <= 0.0 || z(i) <= 0.0 || w(i) * z(i) < gamma * mu) return false;
  }
  return true;
}

struct Scaling {
  MatrixXd W;       // NT scaling point: W S W = X
  MatrixXd S_inv;
  VectorXd omega;   // w_i / z_i
  bool ok = false;
};

inline Scaling nt_scaling(const MatrixXd& X, const MatrixXd& S, const VectorXd& w,
                          const VectorXd& z) {
  Scaling sc;
  const EigenDecomposition es = sym_eig(S);
  if (es.eigvals(0) <= 0.0) return sc;
  const double fl = es.eigvals(es.eigvals.size() - 1) * 1e-18;
  const MatrixXd s_half = sym_pow(es, 0.5, fl);
  const MatrixXd s_inv_half = sym_pow(es, -0.5, fl);
  sc.S_inv = sym_pow(es, -1.0, fl);
  const MatrixXd T = symmetrized(s_half * X * s_half);
  const EigenDecomposition et = sym_eig(T);
  if (et.eigvals(0) <= 0.0) return sc;
  const MatrixXd t_half = sym_pow(et, 0.5, et.eigvals(et.eigvals.size() - 1) * 1e-18);
  sc.W = symmetrized(s_inv_half * t_half * s_inv_half);
  sc.omega = w.array() / z.array();
  sc.ok = sc.W.allFinite() && sc.S_inv.allFinite();
  return sc;
}

// Feasible affine-scaling descent for divergence confirmation: from a
// strictly feasible iterate, repeatedly move along the steepest-descent
// direction in the local scaled norm while staying inside the cone. On a
// primal-unbounded problem the objective plummets geometrically; on a
// bounded one progress dries up and the caller keeps its stall verdict.
struct PursuitResult {
  bool reached = false;
  double best_obj = kInf;
  MatrixXd X;
  VectorXd w;
};

inline PursuitResult unbounded_pursuit(const StandardForm& f, MatrixXd X, VectorXd w,
                                       double target, int max_steps = 80) {
  PursuitResult res;
  const int p = f.rows();
  const int l = f.l;
  for (int step = 0; step < max_steps; ++step) {
    const EigenDecomposition ex = sym_eig(X);
    if (ex.eigvals(0) <= 0.0) break;
    std::vector<MatrixXd> XAX(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
      XAX[static_cast<std::size_t>(r)] = symmetrized(X * f.A[r] * X);
    }
    MatrixXd M(p, p);
    VectorXd g(p);
    const MatrixXd XCX = symmetrized(X * f.C * X);
    for (int r = 0; r < p; ++r) {
      for (int q = r; q < p; ++q) {
        double v = inner(f.A[r], XAX[static_cast<std::size_t>(q)]);
        if (l > 0) {
          v += (f.alp[r].array() * w.array().square() * f.alp[q].array()).sum();
        }
        M(r, q) = v;
        M(q, r) = v;
      }
      g(r) = inner(f.A[r], XCX);
      if (l > 0) g(r) += (f.alp[r].array() * w.array().square() * f.clp.array()).sum();
    }
    Eigen::LDLT<MatrixXd> fact(M + 1e-12 * (1.0 + M.trace() / p) * MatrixXd::Identity(p, p));
    if (fact.info() != Eigen::Success) break;
    const VectorXd th = fact.solve(g);
    MatrixXd D = -XCX;
    for (int r = 0; r < p; ++r) D += th(r) * XAX[static_cast<std::size_t>(r)];
    D = symmetrized(D);
    VectorXd dlp(l);
    for (int i = 0; i < l; ++i) {
      double ci = f.clp(i);
      for (int r = 0; r < p; ++r) ci -= th(r) * f.alp[r](i);
      dlp(i) = -w(i) * w(i) * ci;
    }
    const double obj_cur = inner(f.C, X) + (l > 0 ? f.clp.dot(w) : 0.0);
    double obj_rate = inner(f.C, D) + (l > 0 ? f.clp.dot(dlp) : 0.0);
    if (obj_rate >= -1e-12 * (1.0 + std::abs(obj_cur))) break;  // no descent left
    double amax = detail::psd_step_bound(ex, D);
    if (l > 0) amax = std::min(amax, detail::lp_step_bound(w, dlp));
    if (!(amax > 0.0)) break;
    const double a_target = (target - obj_cur) / obj_rate;  // both negative
    const double a = std::min(0.9 * amax, std::max(a_target, 0.0));
    if (!(a > 0.0)) break;
    X = symmetrized(X + a * D);
    if (l > 0) w += a * dlp;
    if (!X.allFinite()) break;
    const double obj = inner(f.C, X) + (l > 0 ? f.clp.dot(w) : 0.0);
    if (obj < res.best_obj) {
      res.best_obj = obj;
      res.X = X;
      res.w = w;
    }
    if (obj <= target) {
      res.reached = true;
      break;
    }
  }
  return res;
}

}  // namespace detail

// Infeasible-start primal-dual path following with Nesterov-Todd scaling on
// the PSD block and the usual diagonal scaling on the LP block. One Schur
// factorization per iteration; the centering weight blends the nominal sigma
// with a Mehrotra-style estimate from the affine predictor.
inline RawOutcome solve_standard(const StandardForm& f, const SolverOptions& opts) {
  opts.check();
  if (f.d < 1 || f.d > 64) throw std::invalid_argument("solver: psd dimension out of range");
  if (f.rows() < 1) throw std::invalid_argument("solver: no constraint rows");
  if (!f.C.allFinite() || !f.b.allFinite()) {
    throw std::invalid_argument("solver: non-finite data");
  }
  for (const auto& Ar : f.A) {
    if (!Ar.allFinite()) throw std::invalid_argument("solver: non-finite data");
  }

  const int d = f.d;
  const int l = f.l;
  const int p = f.rows();
  const double nu = d + std::max(l, 0);

  const double b_norm = f.b.size() ? f.b.cwiseAbs().maxCoeff() : 0.0;
  double data_norm = std::max(1.0, f.C.norm());
  for (const auto& Ar : f.A) data_norm = std::max(data_norm, Ar.norm());

  const double xi_p = std::sqrt(double(d)) * std::max(1.0, b_norm);
  const double xi_d = std::max(1.0, f.C.norm() / std::sqrt(double(d)) + 1.0);

  MatrixXd X = xi_p * MatrixXd::Identity(d, d);
  VectorXd w = VectorXd::Constant(l, xi_p);
  VectorXd th = VectorXd::Zero(p);
  MatrixXd S = xi_d * MatrixXd::Identity(d, d);
  VectorXd z = VectorXd::Constant(l, xi_d);

  RawOutcome out;
  RawOutcome best;  // lowest-merit snapshot, returned on stalls
  double best_merit = kInf;
  int best_iter = 0;
  int tiny_steps = 0;
  MatrixXd feas_X;  // most negative (nearly) feasible iterate, for divergence pursuit
  VectorXd feas_w;

  const double ptol = opts.tol_feas * (1.0 + b_norm);
  const double dtol = opts.tol_feas * (1.0 + data_norm);

  auto record = [&](int iter, double mu, double pobj, double dobj, double pinf,
                    double dinf) {
    if (opts.keep_trace) out.trace.push_back({iter, mu, pobj, dobj, pinf, dinf});
  };

  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    // residuals
    VectorXd rp(p);
    VectorXd row_scale(p);
    for (int r = 0; r < p; ++r) {
      double ax = inner(f.A[r], X);
      if (l > 0) ax += f.alp[r].dot(w);
      rp(r) = f.b(r) - ax;
      row_scale(r) = 1.0 + f.A[r].norm() * X.norm() +
                     (l > 0 ? f.alp[r].cwiseAbs().maxCoeff() * w.cwiseAbs().maxCoeff() : 0.0);
    }
    MatrixXd Rd = f.C - S;
    for (int r = 0; r < p; ++r) Rd -= th(r) * f.A[r];
    VectorXd rdl = VectorXd::Zero(l);
    if (l > 0) {
      rdl = f.clp - z;
      for (int r = 0; r < p; ++r) rdl -= th(r) * f.alp[r];
    }

    const double pobj = inner(f.C, X) + (l > 0 ? f.clp.dot(w) : 0.0);
    const double dobj = f.b.dot(th);
    const double comp = inner(X, S) + (l > 0 ? w.dot(z) : 0.0);
    const double mu = comp / nu;
    const double pinf = rp.cwiseAbs().maxCoeff();
    const double pinf_rel = (rp.cwiseAbs().array() / row_scale.array()).maxCoeff();
    double dinf = max_abs(Rd);
    if (l > 0) dinf = std::max(dinf, rdl.cwiseAbs().maxCoeff());
    const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    record(iter, mu, pobj, dobj, pinf, dinf);

    if (pinf_rel <= 1e-6) {
      out.has_feasible = true;
      if (pobj < out.best_feasible_obj) {
        out.best_feasible_obj = pobj;
        feas_X = X;
        feas_w = w;
      }
    }

    auto snapshot = [&](SolveStatus st) {
      out.status = st;
      out.X = X;
      out.w = w;
      out.th = th;
      out.S = S;
      out.z = z;
      out.primal_obj = pobj;
      out.dual_obj = dobj;
      out.rel_gap = rel_gap;
      out.pinfeas_abs = pinf;
      out.pinfeas_rel = pinf_rel;
      out.dinfeas_abs = dinf;
      out.iterations = iter;
    };

    // convergence / divergence gates; the dual-residual weighting keeps the
    // recomputed slack-matrix residuals within the stated outcome contract
    const double dual_weight = 1.0 + double(d) * max_abs(X);
    if (pinf <= ptol && dinf * dual_weight <= 5.0 * opts.tol_feas &&
        rel_gap <= opts.tol_gap && comp <= 5.0 * opts.tol_feas) {
      snapshot(SolveStatus::Optimal);
      return out;
    }
    if (out.has_feasible && out.best_feasible_obj <= opts.stop_below) {
      snapshot(SolveStatus::Stalled);
      out.note = "early exit: objective below requested stop level";
      return out;
    }
    if (pinf_rel <= 1e-7 && pobj <= -opts.unbounded_threshold) {
      snapshot(SolveStatus::PrimalUnboundedSuspected);
      out.note = "feasible iterate with objective below -unbounded_threshold";
      return out;
    }
    if (dinf <= 1e-7 * (1.0 + data_norm) && dobj >= opts.unbounded_threshold) {
      snapshot(SolveStatus::PrimalInfeasibleSuspected);
      out.note = "dual objective diverging with small dual residual";
      return out;
    }

    const double merit = std::max({pinf / (1.0 + b_norm), dinf / (1.0 + data_norm),
                                   comp / (nu * (1.0 + std::abs(pobj)))});
    if (merit < 0.7 * best_merit) {
      best_merit = merit;
      best_iter = iter;
      snapshot(SolveStatus::Stalled);
      best = out;
      best.note = "stalled; best iterate returned";
    }
    if (iter == opts.max_iters || iter - best_iter >= 25 || tiny_steps >= 3) {
      break;
    }

    // scaling + Schur complement
    const detail::Scaling sc = detail::nt_scaling(X, S, w, z);
    if (!sc.ok) break;
    std::vector<MatrixXd> WAW(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
      WAW[static_cast<std::size_t>(r)] = symmetrized(sc.W * f.A[r] * sc.W);
    }
    MatrixXd M(p, p);
    for (int r = 0; r < p; ++r) {
      for (int q = r; q < p; ++q) {
        double v = inner(f.A[r], WAW[static_cast<std::size_t>(q)]);
        if (l > 0) v += (f.alp[r].array() * sc.omega.array() * f.alp[q].array()).sum();
        M(r, q) = v;
        M(q, r) = v;
      }
    }
    Eigen::LDLT<MatrixXd> fact;
    {
      MatrixXd Mj = M;
      const double jitter = 1e-13 * (1.0 + M.trace() / p);
      bool good = false;
      for (int attempt = 0; attempt < 4 && !good; ++attempt) {
        fact.compute(Mj);
        good = fact.info() == Eigen::Success && fact.isPositive();
        if (!good) Mj += (jitter * std::pow(10.0, attempt)) * MatrixXd::Identity(p, p);
      }
      if (!good) break;
    }
    // the Schur matrix turns ill-conditioned when multipliers blow up;
    // iterative refinement keeps the directions honest much longer
    auto schur_solve = [&](const VectorXd& rhs) {
      VectorXd x = fact.solve(rhs);
      for (int refine = 0; refine < 2; ++refine) {
        const VectorXd resid = rhs - M * x;
        x += fact.solve(resid);
      }
      return x;
    };

    const MatrixXd WRdW = symmetrized(sc.W * Rd * sc.W);

    auto direction = [&](double sigma_mu, const MatrixXd& corr, const VectorXd& corr_lp,
                         MatrixXd& dX, VectorXd& dw, VectorXd& dth, MatrixXd& dS,
                         VectorXd& dz) {
      const MatrixXd E = sigma_mu * sc.S_inv - X - WRdW - corr;
      VectorXd elp(l);
      for (int i = 0; i < l; ++i) {
        elp(i) = sigma_mu / z(i) - w(i) - sc.omega(i) * rdl(i) - corr_lp(i);
      }
      VectorXd rhs(p);
      for (int r = 0; r < p; ++r) {
        rhs(r) = rp(r) - inner(f.A[r], E);
        if (l > 0) rhs(r) -= f.alp[r].dot(elp);
      }
      dth = schur_solve(rhs);
      dS = Rd;
      for (int r = 0; r < p; ++r) dS -= dth(r) * f.A[r];
      dX = E;
      for (int r = 0; r < p; ++r) dX += dth(r) * WAW[static_cast<std::size_t>(r)];
      dX = symmetrized(dX);
      if (l > 0) {
        dz = rdl;
        for (int r = 0; r < p; ++r) dz -= dth(r) * f.alp[r];
        dw.resize(l);
        for (int i = 0; i < l; ++i) dw(i) = elp(i) - sc.omega(i) * (dz(i) - rdl(i));
      } else {
        dw.resize(0);
        dz.resize(0);
      }
    };

    const EigenDecomposition ex = sym_eig(X);
    const EigenDecomposition es = sym_eig(S);

    auto step_bounds = [&](const MatrixXd& dX, const VectorXd& dw, const MatrixXd& dS,
                           const VectorXd& dz, double& ap, double& ad) {
      double amax_p = detail::psd_step_bound(ex, dX);
      double amax_d = detail::psd_step_bound(es, dS);
      if (l > 0) {
        amax_p = std::min(amax_p, detail::lp_step_bound(w, dw));
        amax_d = std::min(amax_d, detail::lp_step_bound(z, dz));
      }
      ap = std::min(1.0, opts.step_frac * amax_p);
      ad = std::min(1.0, opts.step_frac * amax_d);
    };

    // affine predictor fixes the centering weight and the corrector term
    const MatrixXd no_corr = MatrixXd::Zero(d, d);
    const VectorXd no_corr_lp = VectorXd::Zero(l);
    MatrixXd dXa, dSa;
    VectorXd dwa, dtha, dza;
    direction(0.0, no_corr, no_corr_lp, dXa, dwa, dtha, dSa, dza);
    double apa = 0.0, ada = 0.0;
    step_bounds(dXa, dwa, dSa, dza, apa, ada);
    double comp_aff = inner(X + apa * dXa, S + ada * dSa);
    if (l > 0) comp_aff += (w + apa * dwa).dot(z + ada * dza);
    comp_aff = std::max(comp_aff, 0.0);
    const double sigma_mehrotra = std::pow(comp_aff / std::max(comp, 1e-300), 3.0);
    double sigma = std::min(opts.sigma, sigma_mehrotra);
    // keep the barrier from racing ahead of feasibility: while the linear
    // residuals dominate mu, stay near the central path
    const double resid_scale =
        std::max(pinf / (1.0 + b_norm), dinf / (1.0 + data_norm));
    if (resid_scale > 1e3 * opts.tol_feas && resid_scale > mu) {
      sigma = std::max(sigma, 0.5);
    }
    // do not target barrier values below the precision floor of the current
    // scales; the cone margin would drown in eigenvalue rounding noise
    const double mu_floor =
        100.0 * 2.2e-16 *
        (1.0 + ex.eigvals.cwiseAbs().maxCoeff() * es.eigvals.cwiseAbs().maxCoeff());
    sigma = std::clamp(sigma, std::max(1e-8, mu_floor / std::max(mu, 1e-300)), 0.999);

    // second-order correction keeps the products balanced along the step;
    // dropped whenever it shortens the step it was meant to improve
    const MatrixXd corr = symmetrized(dXa * dSa * sc.S_inv);
    VectorXd corr_lp(l);
    for (int i = 0; i < l; ++i) corr_lp(i) = dwa(i) * dza(i) / z(i);

    MatrixXd dX, dS;
    VectorXd dw, dth, dz;
    direction(sigma * mu, corr, corr_lp, dX, dw, dth, dS, dz);
    double ap = 0.0, ad = 0.0;
    step_bounds(dX, dw, dS, dz, ap, ad);
    {
      MatrixXd dX2, dS2;
      VectorXd dw2, dth2, dz2;
      direction(sigma * mu, no_corr, no_corr_lp, dX2, dw2, dth2, dS2, dz2);
      double ap2 = 0.0, ad2 = 0.0;
      step_bounds(dX2, dw2, dS2, dz2, ap2, ad2);
      if (std::min(ap2, ad2) > 1.2 * std::min(ap, ad)) {
        dX = dX2;
        dS = dS2;
        dw = dw2;
        dth = dth2;
        dz = dz2;
        ap = ap2;
        ad = ad2;
      }
    }
    if ((pinf <= 10.0 * ptol && dinf <= 10.0 * dtol) || rel_gap <= 1e-2) {
      ap = ad = std::min(ap, ad);  // symmetric steps near the central path endgame
    }
#ifdef QCERT_SOLVER_DEBUG
    const double ap_pre = ap, ad_pre = ad;
#endif
    // safeguards: stay in the cone interior numerically; near feasibility the
    // complementarity measure must not grow by more than 10% per step (it is
    // Newton-orthogonal there), elsewhere transient growth is tolerated
    const double comp_growth =
        (pinf <= 10.0 * ptol && dinf <= 10.0 * dtol) ? 1.05 : 20.0;
    for (int bt = 0; bt < 30; ++bt) {
      const MatrixXd Xc = symmetrized(X + ap * dX);
      const MatrixXd Sc = symmetrized(S + ad * dS);
      const VectorXd wc = l > 0 ? VectorXd(w + ap * dw) : w;
      const VectorXd zc = l > 0 ? VectorXd(z + ad * dz) : z;
      double comp_next = inner(Xc, Sc);
      if (l > 0) comp_next += wc.dot(zc);
      if (detail::centrality_ok(Xc, Sc, wc, zc, 1e-4) && comp_next <= comp_growth * comp) {
        break;
      }
      ap *= 0.8;
      ad *= 0.8;
    }
    if (std::max(ap, ad) < 1e-5) {
      ++tiny_steps;
    } else {
      tiny_steps = 0;
    }
    if (opts.keep_trace && !out.trace.empty()) {
      out.trace.back().step_p = ap;
      out.trace.back().step_d = ad;
      out.trace.back().sigma = sigma;
    }
#ifdef QCERT_SOLVER_DEBUG
    {
      const VectorXd lx = ex.eigvals, ls = es.eigvals;
      std::fprintf(stderr,
                   "    it=%d lamX=[%.3e..%.3e] lamS=[%.3e..%.3e] pre=(%.2e,%.2e) "
                   "post=(%.2e,%.2e) sg=%.2e\n",
                   iter, lx(0), lx(lx.size() - 1), ls(0), ls(ls.size() - 1), ap_pre,
                   ad_pre, ap, ad, sigma);
    }
#endif

    X = symmetrized(X + ap * dX);
    if (l > 0) w += ap * dw;
    th += ad * dth;
    S = symmetrized(S + ad * dS);
    if (l > 0) z += ad * dz;
    if (!X.allFinite() || !S.allFinite()) break;
    out.iterations = iter + 1;
  }

  if (best_merit < kInf) {
    auto trace = std::move(out.trace);
    const int iters = out.iterations;
    const bool has_feas = out.has_feasible;
    const double best_obj = out.best_feasible_obj;
    out = best;
    out.trace = std::move(trace);
    out.iterations = iters;
    out.has_feasible = has_feas;
    out.best_feasible_obj = best_obj;
  }
  if (out.has_feasible && out.best_feasible_obj <= -opts.unbounded_threshold) {
    out.status = SolveStatus::PrimalUnboundedSuspected;
    out.note = "feasible iterates reached objective below -unbounded_threshold";
  } else if (out.status == SolveStatus::Stalled && out.has_feasible &&
             feas_X.size() > 0 &&
             out.best_feasible_obj <= -1e-3 * opts.unbounded_threshold * (1.0 + b_norm)) {
    // strong divergence suspicion: ride the feasible region downhill
    const detail::PursuitResult pr =
        detail::unbounded_pursuit(f, feas_X, feas_w, -opts.unbounded_threshold);
    if (pr.reached) {
      out.status = SolveStatus::PrimalUnboundedSuspected;
      out.note = "feasible descent drove the objective below -unbounded_threshold";
      out.best_feasible_obj = pr.best_obj;
      out.X = pr.X;
      out.w = pr.w;
      out.primal_obj = pr.best_obj;
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// ConicProblem front end
// --------------------------------------------------------------------------

struct CompiledProblem {
  StandardForm form;
  std::vector<int> slack_of_row;           // lp index per original row, -1 if eq
  std::vector<std::pair<int, int>> couple; // matrix entry per coupling lp var
  int n_couple_offset = 0;                 // lp index of the first coupling var
  int h_row = -1;
  std::vector<int> user_rows;              // original row indices excluding the H row
};

inline CompiledProblem compile_problem(const ConicProblem& p) {
  validate_problem(p);
  CompiledProblem cp;
  StandardForm& f = cp.form;
  f.d = p.dim;
  const int p0 = static_cast<int>(p.maps.size());

  int n_slack = 0;
  cp.slack_of_row.assign(static_cast<std::size_t>(p0), -1);
  for (int r = 0; r < p0; ++r) {
    if (p.maps[static_cast<std::size_t>(r)].sense == Sense::Leq) {
      cp.slack_of_row[static_cast<std::size_t>(r)] = n_slack++;
    }
  }
  if (p.nonneg_matrix) {
    const int i0 = p.nonneg_includes_row0 ? 0 : 1;
    for (int i = i0; i < p.dim; ++i) {
      for (int j = i; j < p.dim; ++j) cp.couple.emplace_back(i, j);
    }
  }
  cp.n_couple_offset = n_slack;
  f.l = n_slack + static_cast<int>(cp.couple.size());

  const int rows = p0 + static_cast<int>(cp.couple.size());
  f.C = p.cost;
  f.clp = VectorXd::Zero(f.l);
  f.b = VectorXd::Zero(rows);
  f.A.resize(static_cast<std::size_t>(rows));
  f.alp.resize(static_cast<std::size_t>(rows));

  MatrixXd H = MatrixXd::Zero(p.dim, p.dim);
  H(0, 0) = 1.0;
  for (int r = 0; r < p0; ++r) {
    const auto& m = p.maps[static_cast<std::size_t>(r)];
    f.A[static_cast<std::size_t>(r)] = symmetrized(m.A);
    f.alp[static_cast<std::size_t>(r)] = VectorXd::Zero(f.l);
    if (cp.slack_of_row[static_cast<std::size_t>(r)] >= 0) {
      f.alp[static_cast<std::size_t>(r)](cp.slack_of_row[static_cast<std::size_t>(r)]) = 1.0;
    }
    f.b(r) = m.rhs;
    if (m.sense == Sense::Eq && m.rhs == 1.0 && max_abs(m.A - H) == 0.0) {
      cp.h_row = r;
    } else {
      cp.user_rows.push_back(r);
    }
  }
  for (std::size_t t = 0; t < cp.couple.size(); ++t) {
    const auto [i, j] = cp.couple[t];
    MatrixXd E = MatrixXd::Zero(p.dim, p.dim);
    if (i == j) {
      E(i, i) = 1.0;
    } else {
      E(i, j) = 0.5;
      E(j, i) = 0.5;
    }
    const int r = p0 + static_cast<int>(t);
    f.A[static_cast<std::size_t>(r)] = E;
    f.alp[static_cast<std::size_t>(r)] = VectorXd::Zero(f.l);
    f.alp[static_cast<std::size_t>(r)](cp.n_couple_offset + static_cast<int>(t)) = -1.0;
    f.b(r) = 0.0;
  }
  return cp;
}

struct ConicOutcome {
  SolveStatus status = SolveStatus::Stalled;
  ConicCertificate certificate;  // X, multipliers in the slack-matrix convention, psd slack
  double gap = kInf;             // relative duality gap at the returned iterate
  int iterations = 0;
  std::vector<TraceRow> trace;
  double primal_obj = std::numeric_limits<double>::quiet_NaN();
  double dual_obj = std::numeric_limits<double>::quiet_NaN();
  double pinfeas_abs = kInf;
  double pinfeas_rel = kInf;
  double dinfeas_abs = kInf;
  KktResiduals kkt;
  bool has_feasible = false;
  double best_feasible_obj = kInf;
  MatrixXd Z;  // nonnegative dual factor (DNN problems only; empty otherwise)
  std::string note;
};

// KKT residuals of (X, y, s) against the conic problem itself. For DNN
// problems S is the psd part of the dual slack and Z the nonnegative part.
inline KktResiduals conic_kkt_residual(const ConicProblem& p, const MatrixXd& X,
                                       const VectorXd& y, double s, const MatrixXd& S,
                                       const MatrixXd& Z) {
  KktResiduals r;
  double pf = std::max(0.0, -sym_eig(X).eigvals(0));
  int k = 0;
  MatrixXd H = MatrixXd::Zero(p.dim, p.dim);
  H(0, 0) = 1.0;
  for (const auto& m : p.maps) {
    const double v = inner(m.A, X) - m.rhs;
    const bool is_h = m.sense == Sense::Eq && m.rhs == 1.0 && max_abs(m.A - H) == 0.0;
    if (is_h) {
      pf = std::max(pf, std::abs(v));
      continue;
    }
    pf = std::max(pf, m.sense == Sense::Eq ? std::abs(v) : std::max(0.0, v));
    r.complementarity_y = std::max(r.complementarity_y, std::abs(y(k) * v));
    if (m.sense == Sense::Leq) r.dual_feas = std::max(r.dual_feas, -y(k));
    ++k;
  }
  if (p.nonneg_matrix) {
    const int i0 = p.nonneg_includes_row0 ? 0 : 1;
    for (int i = i0; i < p.dim; ++i) {
      for (int j = i; j < p.dim; ++j) pf = std::max(pf, -X(i, j));
    }
    if (Z.size() > 0) {
      r.dual_feas = std::max(r.dual_feas, std::max(0.0, -Z.minCoeff()));
      r.complementarity_S = std::max(r.complementarity_S, std::abs(inner(Z, X)));
    }
  }
  r.primal_feas = pf;
  r.dual_feas = std::max(r.dual_feas, std::max(0.0, -sym_eig(S).eigvals(0)));
  r.complementarity_S = std::max(r.complementarity_S, std::abs(inner(S, X)));
  return r;
}

// Solve the relaxation; the certificate carries both sides of the pair.
inline ConicOutcome solve(const ConicProblem& p, const SolverOptions& opts = {}) {
  const CompiledProblem cp = compile_problem(p);
  RawOutcome raw = solve_standard(cp.form, opts);

  ConicOutcome out;
  out.status = raw.status;
  out.iterations = raw.iterations;
  out.trace = std::move(raw.trace);
  out.primal_obj = raw.primal_obj;
  out.dual_obj = raw.dual_obj;
  out.gap = raw.rel_gap;
  out.pinfeas_abs = raw.pinfeas_abs;
  out.pinfeas_rel = raw.pinfeas_rel;
  out.dinfeas_abs = raw.dinfeas_abs;
  out.has_feasible = raw.has_feasible;
  out.best_feasible_obj = raw.best_feasible_obj;
  out.note = std::move(raw.note);
  if (raw.X.size() == 0) return out;  // solver broke before the first snapshot

  out.certificate.X = raw.X;
  const int m_user = static_cast<int>(cp.user_rows.size());
  out.certificate.y.resize(m_user);
  for (int k = 0; k < m_user; ++k) {
    const int r = cp.user_rows[static_cast<std::size_t>(k)];
    const int sl = cp.slack_of_row[static_cast<std::size_t>(r)];
    // Inequality multipliers are read off the slack duals (nonnegative by
    // construction); equality multipliers are free.
    out.certificate.y(k) = sl >= 0 ? raw.z(sl) : raw.th(r);
  }
  out.certificate.s = cp.h_row >= 0 ? raw.th(cp.h_row) : 0.0;

  if (p.nonneg_matrix) {
    out.Z = MatrixXd::Zero(p.dim, p.dim);
    for (std::size_t t = 0; t < cp.couple.size(); ++t) {
      const auto [i, j] = cp.couple[t];
      const double zc = raw.z(cp.n_couple_offset + static_cast<int>(t));
      if (i == j) {
        out.Z(i, i) = zc;
      } else {
        out.Z(i, j) = 0.5 * zc;
        out.Z(j, i) = 0.5 * zc;
      }
    }
  }
  // psd-side dual slack implied by the multipliers (exact recomputation)
  MatrixXd S = p.cost;
  for (int k = 0; k < m_user; ++k) {
    const int r = cp.user_rows[static_cast<std::size_t>(k)];
    const int sl = cp.slack_of_row[static_cast<std::size_t>(r)];
    const auto& m = p.maps[static_cast<std::size_t>(r)];
    S -= (sl >= 0 ? -out.certificate.y(k) : out.certificate.y(k)) * m.A;
  }
  {
    MatrixXd H = MatrixXd::Zero(p.dim, p.dim);
    H(0, 0) = 1.0;
    S -= out.certificate.s * H;
  }
  if (p.nonneg_matrix) S -= out.Z;
  out.certificate.S = symmetrized(S);

  out.kkt = conic_kkt_residual(p, out.certificate.X, out.certificate.y, out.certificate.s,
                               out.certificate.S, out.Z);
  return out;
}

inline void write_trace_csv(const ConicOutcome& out, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open trace file: " + path);
  os << "iter,mu,primal_obj,dual_obj,pinfeas,dinfeas\n";
  char buf[192];
  for (const auto& row : out.trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", row.iter, row.mu,
                  row.primal_obj, row.dual_obj, row.pinfeas, row.dinfeas);
    os << buf;
  }
}

}  // namespace qcert
