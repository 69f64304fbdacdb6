#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qcert/qcqp.hpp"

namespace qcert {

struct LinearMap {
  MatrixXd A;
  Sense sense = Sense::Leq;
  double rhs = 0.0;
};

// Linear-objective problem over the PSD cone, optionally intersected with the
// elementwise-nonnegative cone. Exactly one map is the lifting normalization
// (H, =, 1).
struct ConicProblem {
  int dim = 0;
  MatrixXd cost;
  std::vector<LinearMap> maps;
  bool nonneg_matrix = false;
  bool nonneg_includes_row0 = true;

  int n() const { return dim - 1; }
};

inline void validate_problem(const ConicProblem& p) {
  if (p.dim < 2) throw std::invalid_argument("conic problem: dim must be >= 2");
  if (p.cost.rows() != p.dim || p.cost.cols() != p.dim) {
    throw std::invalid_argument("conic problem: bad cost dimension");
  }
  int h_rows = 0;
  for (const auto& m : p.maps) {
    if (m.A.rows() != p.dim || m.A.cols() != p.dim) {
      throw std::invalid_argument("conic problem: bad map dimension");
    }
    MatrixXd H = MatrixXd::Zero(p.dim, p.dim);
    H(0, 0) = 1.0;
    if (m.sense == Sense::Eq && m.rhs == 1.0 && max_abs(m.A - H) == 0.0) ++h_rows;
  }
  if (h_rows != 1) {
    throw std::invalid_argument("conic problem: expected exactly one (H, =, 1) map");
  }
}

// Shor relaxation: X >= 0 psd, Q_k • X {<=,=} 0, H • X = 1, min Q_0 • X.
inline ConicProblem build_primal_sdp(const HomogenizedInstance& h) {
  ConicProblem p;
  p.dim = h.dim();
  p.cost = h.Qs[0];
  for (int k = 1; k <= h.m(); ++k) {
    p.maps.push_back({h.Qs[static_cast<std::size_t>(k)],
                      h.senses[static_cast<std::size_t>(k - 1)], 0.0});
  }
  p.maps.push_back({h.H, Sense::Eq, 1.0});
  p.nonneg_matrix = false;
  validate_problem(p);
  return p;
}

// Same maps with X additionally elementwise nonnegative (the lifted u_i u_j >= 0
// redundancy). include_row0 extends the sign constraint to the x_0 row/column,
// consistent with the x_0 = +1 convention.
inline ConicProblem build_pdnn(const HomogenizedInstance& h, bool include_row0 = true) {
  if (!h.nonneg) {
    throw std::invalid_argument("build_pdnn: instance is not in nonnegative-variable form");
  }
  for (const Sense s : h.senses) {
    if (s != Sense::Eq) throw std::invalid_argument("build_pdnn: all senses must be eq");
  }
  ConicProblem p = build_primal_sdp(h);
  p.nonneg_matrix = true;
  p.nonneg_includes_row0 = include_row0;
  return p;
}

// Dual slack S(y, s). Inequality form: Q_0 + sum y_k Q_k - s H  (y >= 0);
// equality/DNN form: Q_0 - sum y_k Q_k - s H  (y free).
inline MatrixXd slack_matrix(const HomogenizedInstance& h, const VectorXd& y, double s) {
  if (y.size() != h.m()) throw std::invalid_argument("slack_matrix: bad y length");
  MatrixXd S = h.Qs[0] - s * h.H;
  const double sign = h.nonneg ? -1.0 : 1.0;
  for (int k = 1; k <= h.m(); ++k) {
    S += sign * y(k - 1) * h.Qs[static_cast<std::size_t>(k)];
  }
  return S;
}

// Primal matrix, multipliers and the dual slack of one primal-dual pair.
struct ConicCertificate {
  MatrixXd X;
  VectorXd y;
  double s = 0.0;
  MatrixXd S;
};

inline ConicCertificate make_certificate(const HomogenizedInstance& h, const MatrixXd& X,
                                         const VectorXd& y, double s) {
  return ConicCertificate{X, y, s, slack_matrix(h, y, s)};
}

struct KktResiduals {
  double primal_feas = 0.0;       // X in PSD cone and in the lifted feasible set
  double dual_feas = 0.0;         // S psd, multiplier signs
  double complementarity_y = 0.0; // max_k |y_k (Q_k • X)|
  double complementarity_S = 0.0; // |S • X|

  double max() const {
    return std::max(std::max(primal_feas, dual_feas),
                    std::max(complementarity_y, complementarity_S));
  }
};

// The four KKT residuals of the relaxation pair. All ~0 iff X and (y, s) are a
// primal-dual optimal pair with zero gap. S • X = 0 with both factors psd is
// equivalent to S X = O, so the scalar product is used as the residual.
inline KktResiduals sdp_kkt_residual(const HomogenizedInstance& h,
                                     const ConicCertificate& cert) {
  const int d = h.dim();
  if (cert.X.rows() != d || cert.X.cols() != d || cert.y.size() != h.m()) {
    throw std::invalid_argument("sdp_kkt_residual: dimension mismatch");
  }
  const MatrixXd S = slack_matrix(h, cert.y, cert.s);
  KktResiduals r;

  double pf = std::abs(inner(h.H, cert.X) - 1.0);
  for (int k = 1; k <= h.m(); ++k) {
    const double v = inner(h.Qs[static_cast<std::size_t>(k)], cert.X);
    pf = std::max(pf, h.senses[static_cast<std::size_t>(k - 1)] == Sense::Eq
                          ? std::abs(v)
                          : std::max(0.0, v));
    r.complementarity_y = std::max(r.complementarity_y, std::abs(cert.y(k - 1) * v));
  }
  const EigenDecomposition ex = sym_eig(cert.X);
  pf = std::max(pf, std::max(0.0, -ex.eigvals(0)));
  r.primal_feas = pf;

  const EigenDecomposition es = sym_eig(S);
  double df = std::max(0.0, -es.eigvals(0));
  if (!h.nonneg) {
    for (int k = 0; k < h.m(); ++k) df = std::max(df, -cert.y(k));
  }
  r.dual_feas = df;
  r.complementarity_S = std::abs(inner(S, cert.X));
  return r;
}

// ||S X||_F, reported alongside the scalar complementarity in verbose output.
inline double slack_product_norm(const HomogenizedInstance& h, const ConicCertificate& cert) {
  return (slack_matrix(h, cert.y, cert.s) * cert.X).norm();
}

// Dual-side description: maximize s subject to S(y, s) psd over the multiplier
// cone. A thin view over the homogenized data with feasibility helpers.
struct DualSdpDescription {
  HomogenizedInstance h;

  bool y_free() const { return h.nonneg; }

  bool is_feasible(const VectorXd& y, double s, double tol = 1e-9) const {
    if (!h.nonneg) {
      for (int k = 0; k < h.m(); ++k) {
        if (y(k) < -tol) return false;
      }
    }
    return psd_status(slack_matrix(h, y, s), tol).is_psd;
  }
};

inline DualSdpDescription build_dual_sdp(const HomogenizedInstance& h) {
  return DualSdpDescription{h};
}

}  // namespace qcert
