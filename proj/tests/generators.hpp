#pragma once

// Random-instance generators shared by the property suites and the
// acceptance runner. These are test oracles: construction plants the ground
// truth (a KKT pair, an interior point, a compactness bound) so the toolkit's
// answers can be checked independently of its own code paths.

#include <random>
#include <utility>

#include "qcert/qcert.hpp"

namespace qcert_test {

using namespace qcert;

inline MatrixXd rand_sym(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = unif(rng);
  }
  return symmetrized(M);
}

inline VectorXd rand_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  return VectorXd::NullaryExpr(n, [&](int) { return unif(rng); });
}

struct PlantedKkt {
  QcqpInstance instance;
  VectorXd u;
  VectorXd y;
};

// Instance with a planted saddle point: y >= 0 is sampled, A_0 is chosen so
// the combined Hessian is positive definite, u solves the stationarity
// system, and the constants c_k activate exactly the constraints with y_k > 0.
inline PlantedKkt planted_kkt_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  const int n = 1 + static_cast<int>(rng() % 4);
  const int m = 1 + static_cast<int>(rng() % 3);

  std::vector<QuadraticForm> qs(static_cast<std::size_t>(m));
  VectorXd y(m);
  for (int k = 0; k < m; ++k) {
    qs[static_cast<std::size_t>(k)].A = rand_sym(rng, n);
    qs[static_cast<std::size_t>(k)].b = rand_vec(rng, n);
    y(k) = unif01(rng) < 0.5 ? 0.0 : 0.2 + 1.8 * unif01(rng);
  }
  // A_0 = P - sum y_k A_k with P strictly positive definite
  const MatrixXd G = rand_sym(rng, n, 1.0);
  MatrixXd P = G * G.transpose();
  P += (0.5 + unif01(rng)) * MatrixXd::Identity(n, n);
  MatrixXd A0 = P;
  for (int k = 0; k < m; ++k) A0 -= y(k) * qs[static_cast<std::size_t>(k)].A;

  QuadraticForm obj;
  obj.A = A0;
  obj.b = rand_vec(rng, n);
  obj.c = 0.0;

  // stationarity: (A_0 + sum y A_k) u = -(b_0 + sum y b_k)
  VectorXd brhs = obj.b;
  for (int k = 0; k < m; ++k) brhs += y(k) * qs[static_cast<std::size_t>(k)].b;
  const VectorXd u = -pinv_solve(P, brhs, 1e-12).x;

  std::vector<Constraint> cons;
  for (int k = 0; k < m; ++k) {
    QuadraticForm q = qs[static_cast<std::size_t>(k)];
    const double val = u.dot(q.A * u) + 2.0 * q.b.dot(u);
    q.c = -val - (y(k) > 0.0 ? 0.0 : 0.1 + unif01(rng));  // active iff y_k > 0
    cons.push_back({q, Sense::Leq});
  }
  return {make_instance(n, obj, cons), u, y};
}

struct BoundedInstance {
  QcqpInstance instance;
  double box_radius;  // the ball constraint keeps minimizers inside this box
};

// Feasible, compact instance: random quadratic rows made strictly feasible at
// an interior anchor, plus a ball constraint ||u||^2 <= R^2.
inline BoundedInstance bounded_random_instance(std::uint64_t seed, int max_n = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  const int n = 1 + static_cast<int>(rng() % max_n);
  const int m = 1 + static_cast<int>(rng() % 2);
  const double radius = 2.0;

  QuadraticForm obj;
  obj.A = rand_sym(rng, n);
  obj.b = rand_vec(rng, n);
  obj.c = 0.0;

  const VectorXd anchor = 0.5 * rand_vec(rng, n);
  std::vector<Constraint> cons;
  for (int k = 0; k < m; ++k) {
    QuadraticForm q;
    q.A = rand_sym(rng, n);
    q.b = rand_vec(rng, n);
    const double val = anchor.dot(q.A * anchor) + 2.0 * q.b.dot(anchor);
    q.c = -val - 0.2 - unif01(rng);  // strictly feasible at the anchor
    cons.push_back({q, Sense::Leq});
  }
  QuadraticForm ball;
  ball.A = MatrixXd::Identity(n, n);
  ball.b = VectorXd::Zero(n);
  ball.c = -radius * radius;
  cons.push_back({ball, Sense::Leq});
  return {make_instance(n, obj, cons), radius};
}

// Convex objective (A_0 positive definite) over the same compact family:
// y = 0 is dual feasible and the dual optimum is attained.
inline BoundedInstance dual_feasible_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dull);
  BoundedInstance bi = bounded_random_instance(seed);
  const int n = bi.instance.n;
  const MatrixXd G = rand_sym(rng, n);
  bi.instance.objective.A = G * G.transpose() + 0.3 * MatrixXd::Identity(n, n);
  return bi;
}

// Equality-form instance in nonnegative variables, compact through a sphere
// row passing through the nonnegative anchor.
inline QcqpInstance dnn_random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  const int n = 2 + static_cast<int>(rng() % 2);
  const int m = 1 + static_cast<int>(rng() % 2);

  VectorXd anchor(n);
  for (int i = 0; i < n; ++i) anchor(i) = 0.3 + unif01(rng);

  QuadraticForm obj;
  obj.A = rand_sym(rng, n);
  obj.b = rand_vec(rng, n);
  obj.c = 0.0;

  std::vector<Constraint> cons;
  for (int k = 0; k < m - 1; ++k) {
    QuadraticForm q;
    q.A = rand_sym(rng, n);
    q.b = rand_vec(rng, n);
    const double val = anchor.dot(q.A * anchor) + 2.0 * q.b.dot(anchor);
    q.c = -val;  // the anchor satisfies the equality
    cons.push_back({q, Sense::Eq});
  }
  QuadraticForm sphere;
  sphere.A = MatrixXd::Identity(n, n);
  sphere.b = VectorXd::Zero(n);
  sphere.c = -anchor.squaredNorm();
  cons.push_back({sphere, Sense::Eq});
  return make_instance(n, obj, cons, true);
}

}  // namespace qcert_test
