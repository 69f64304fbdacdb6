#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qcert {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd symmetrized(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

// Frobenius inner product Q • X.
inline double inner(const MatrixXd& A, const MatrixXd& B) {
  return (A.array() * B.array()).sum();
}

inline double max_abs(const MatrixXd& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

struct EigenDecomposition {
  VectorXd eigvals;  // ascending
  MatrixXd eigvecs;  // orthonormal, eigvecs.col(i) pairs with eigvals(i)

  MatrixXd reconstruct() const {
    return eigvecs * eigvals.asDiagonal() * eigvecs.transpose();
  }
};

// Cyclic Jacobi eigensolver for dense symmetric matrices. Stops when the
// off-diagonal Frobenius norm drops below 1e-12 * ||M||_F (100 sweeps max).
inline EigenDecomposition sym_eig(const MatrixXd& M_in) {
  if (M_in.rows() != M_in.cols() || M_in.rows() < 1) {
    throw std::invalid_argument("sym_eig: matrix must be square and nonempty");
  }
  if (!M_in.allFinite()) {
    throw std::invalid_argument("sym_eig: matrix has non-finite entries");
  }
  const int n = static_cast<int>(M_in.rows());
  MatrixXd B = symmetrized(M_in);
  MatrixXd V = MatrixXd::Identity(n, n);
  const double norm_f = std::max(B.norm(), 1e-300);
  const double off_target = 1e-12 * norm_f;

  if (n > 1) {
    for (int sweep = 0; sweep < 100; ++sweep) {
      double off = 0.0;
      for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) off += 2.0 * B(p, q) * B(p, q);
      }
      off = std::sqrt(off);
      if (off <= off_target) break;

      for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const double apq = B(p, q);
          if (std::abs(apq) <= 1e-3 * off_target / n) continue;
          const double app = B(p, p);
          const double aqq = B(q, q);
          const double tau = (aqq - app) / (2.0 * apq);
          const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          for (int i = 0; i < n; ++i) {
            const double bip = B(i, p);
            const double biq = B(i, q);
            B(i, p) = c * bip - s * biq;
            B(i, q) = s * bip + c * biq;
          }
          for (int i = 0; i < n; ++i) {
            const double bpi = B(p, i);
            const double bqi = B(q, i);
            B(p, i) = c * bpi - s * bqi;
            B(q, i) = s * bpi + c * bqi;
          }
          B(p, q) = 0.0;
          B(q, p) = 0.0;
          B(p, p) = app - t * apq;
          B(q, q) = aqq + t * apq;
          for (int i = 0; i < n; ++i) {
            const double vip = V(i, p);
            const double viq = V(i, q);
            V(i, p) = c * vip - s * viq;
            V(i, q) = s * vip + c * viq;
          }
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return B(a, a) < B(b, b); });

  EigenDecomposition out;
  out.eigvals.resize(n);
  out.eigvecs.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.eigvals(i) = B(order[i], order[i]);
    out.eigvecs.col(i) = V.col(order[i]);
    // fix sign: largest-magnitude component positive
    int arg = 0;
    double best = -1.0;
    for (int r = 0; r < n; ++r) {
      if (std::abs(out.eigvecs(r, i)) > best + 1e-300) {
        best = std::abs(out.eigvecs(r, i));
        arg = r;
      }
    }
    if (out.eigvecs(arg, i) < 0.0) out.eigvecs.col(i) *= -1.0;
  }
  return out;
}

struct PsdStatus {
  double min_eig;
  bool is_psd;
  bool is_pd;
};

inline PsdStatus psd_status(const MatrixXd& M, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("psd_status: tol must be positive");
  const EigenDecomposition ed = sym_eig(M);
  const double lo = ed.eigvals(0);
  const double hi = ed.eigvals(ed.eigvals.size() - 1);
  const double norm2 = std::max(std::abs(lo), std::abs(hi));
  PsdStatus st;
  st.min_eig = lo;
  st.is_psd = lo >= -tol * (1.0 + norm2);
  st.is_pd = lo >= tol * (1.0 + norm2);
  return st;
}

// Number of eigenvalues with |lambda| > tol * max(1, |lambda|_max).
inline int numeric_rank(const MatrixXd& M, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("numeric_rank: tol must be positive");
  const EigenDecomposition ed = sym_eig(M);
  const double lam_max = ed.eigvals.cwiseAbs().maxCoeff();
  const double cutoff = tol * std::max(1.0, lam_max);
  int r = 0;
  for (int i = 0; i < ed.eigvals.size(); ++i) {
    if (std::abs(ed.eigvals(i)) > cutoff) ++r;
  }
  return r;
}

struct Rank1 {
  VectorXd x;          // X ~ x x^T
  bool x0_degenerate;  // no unit homogenizing coordinate (x_0 ~ 0)
};

// Succeeds iff the second-largest eigenvalue is <= tol * lambda_max. The sign
// of x is fixed so x_0 >= 0; when x_0 vanishes the first nonzero entry is made
// positive and the degenerate-lift flag is set.
inline std::optional<Rank1> rank1_extract(const MatrixXd& X, double tol = 1e-6) {
  const EigenDecomposition ed = sym_eig(X);
  const int n = static_cast<int>(ed.eigvals.size());
  const double lam1 = ed.eigvals(n - 1);
  if (lam1 < -tol) return std::nullopt;
  if (ed.eigvals(0) < -10.0 * tol * std::max(1.0, lam1)) return std::nullopt;  // not PSD
  const double lam2 = n >= 2 ? ed.eigvals(n - 2) : 0.0;
  if (lam2 > tol * std::max(lam1, 0.0)) return std::nullopt;

  Rank1 r;
  r.x = std::sqrt(std::max(lam1, 0.0)) * ed.eigvecs.col(n - 1);
  const double scale = std::max(1.0, r.x.cwiseAbs().maxCoeff());
  r.x0_degenerate = std::abs(r.x(0)) <= 1e-9 * scale;
  if (!r.x0_degenerate) {
    if (r.x(0) < 0.0) r.x *= -1.0;
  } else {
    for (int i = 0; i < r.x.size(); ++i) {
      if (std::abs(r.x(i)) > 1e-9 * scale) {
        if (r.x(i) < 0.0) r.x *= -1.0;
        break;
      }
    }
  }
  return r;
}

struct PinvSolveResult {
  VectorXd x;
  double range_residual;  // || rhs - proj_range(rhs) ||_inf
};

// Least-squares solve via the eigendecomposition pseudo-inverse; the range
// residual reports how much of rhs lies outside range(M).
inline PinvSolveResult pinv_solve(const MatrixXd& M, const VectorXd& rhs,
                                  double rel_tol = 1e-9) {
  const EigenDecomposition ed = sym_eig(M);
  const double lam_max = ed.eigvals.cwiseAbs().maxCoeff();
  const double cutoff = rel_tol * std::max(1.0, lam_max);
  VectorXd x = VectorXd::Zero(rhs.size());
  VectorXd proj = VectorXd::Zero(rhs.size());
  for (int i = 0; i < ed.eigvals.size(); ++i) {
    if (std::abs(ed.eigvals(i)) > cutoff) {
      const double coef = ed.eigvecs.col(i).dot(rhs);
      x += (coef / ed.eigvals(i)) * ed.eigvecs.col(i);
      proj += coef * ed.eigvecs.col(i);
    }
  }
  PinvSolveResult out;
  out.x = x;
  out.range_residual = (rhs - proj).cwiseAbs().maxCoeff();
  return out;
}

// M^p through the eigendecomposition, eigenvalues clamped at floor_abs.
inline MatrixXd sym_pow(const EigenDecomposition& ed, double p, double floor_abs) {
  VectorXd lam = ed.eigvals;
  for (int i = 0; i < lam.size(); ++i) {
    lam(i) = std::pow(std::max(lam(i), floor_abs), p);
  }
  return ed.eigvecs * lam.asDiagonal() * ed.eigvecs.transpose();
}

}  // namespace qcert
