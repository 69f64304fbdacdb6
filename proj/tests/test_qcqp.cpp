#include <catch_amalgamated.hpp>

#include <random>

#include "qcert/bench.hpp"
#include "qcert/qcqp.hpp"

using namespace qcert;

namespace {

QcqpInstance random_instance(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  auto rand_form = [&] {
    QuadraticForm q;
    MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = unif(rng);
    }
    q.A = symmetrized(A);
    q.b = VectorXd::NullaryExpr(n, [&](int) { return unif(rng); });
    q.c = 0.0;
    return q;
  };
  QuadraticForm obj = rand_form();
  std::vector<Constraint> cons;
  for (int k = 0; k < m; ++k) {
    Constraint c;
    c.q = rand_form();
    c.q.c = unif(rng);
    cons.push_back(c);
  }
  return make_instance(n, obj, cons);
}

}  // namespace

TEST_CASE("parsing validation: example 4.1 data") {
  const QcqpInstance inst = example41_instance(1.0);
  CHECK(inst.n == 1);
  CHECK(inst.m() == 2);
  CHECK(inst.constraints[0].q.A(0, 0) == 1.0);
  CHECK(inst.constraints[0].q.b(0) == -2.5);
  CHECK(inst.constraints[0].q.c == 4.0);
}

TEST_CASE("unconstrained instance is valid") {
  QuadraticForm q0{MatrixXd::Constant(1, 1, 1.0), VectorXd::Zero(1), 0.0};
  const QcqpInstance inst = make_instance(1, q0, {});
  CHECK(inst.m() == 0);
}

TEST_CASE("asymmetric data is rejected") {
  MatrixXd A(2, 2);
  A << 1.0, 0.001, 0.0, 1.0;  // asymmetric by 1e-3
  QuadraticForm q0{A, VectorXd::Zero(2), 0.0};
  CHECK_THROWS_AS(make_instance(2, q0, {}), std::invalid_argument);
}

TEST_CASE("sense mixing inconsistent with the variable-sign form is rejected") {
  QuadraticForm q0{MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.0};
  QuadraticForm q1 = q0;
  CHECK_THROWS_AS(make_instance(2, q0, {{q1, Sense::Eq}}, false), std::invalid_argument);
  CHECK_THROWS_AS(make_instance(2, q0, {{q1, Sense::Leq}}, true), std::invalid_argument);
}

TEST_CASE("nonzero objective constant moves into the shift") {
  QuadraticForm q0{MatrixXd::Identity(1, 1), VectorXd::Zero(1), 5.0};
  const QcqpInstance inst = make_instance(1, q0, {});
  CHECK(inst.objective.c == 0.0);
  CHECK(inst.objective_shift == 5.0);
}

TEST_CASE("eval_constraint values") {
  const QcqpInstance i41 = example41_instance(1.0);
  CHECK(eval_constraint(i41, 1, VectorXd::Constant(1, 1.0)) == Catch::Approx(0.0));

  QuadraticForm zero{MatrixXd::Zero(2, 2), VectorXd::Zero(2), 0.0};
  QuadraticForm obj{MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.0};
  const QcqpInstance z = make_instance(2, obj, {{zero, Sense::Leq}});
  CHECK(eval_constraint(z, 1, (VectorXd(2) << 3.0, -7.0).finished()) == 0.0);

  const QcqpInstance i42 = example42().first;
  const VectorXd u = (VectorXd(2) << 1.0, std::sqrt(2.0)).finished();
  CHECK(eval_constraint(i42, 3, u) == Catch::Approx(0.0).margin(1e-12));

  CHECK_THROWS_AS(eval_constraint(i41, 3, VectorXd::Zero(1)), std::invalid_argument);
}

TEST_CASE("feasibility_residual") {
  const QcqpInstance i41 = example41_instance(1.0);
  CHECK(feasibility_residual(i41, VectorXd::Constant(1, 1.0)) == Catch::Approx(0.0));
  // q2(2.5) = -(0.5)(-0.5) = 0.25 is the only violated constraint
  CHECK(feasibility_residual(i41, VectorXd::Constant(1, 2.5)) == Catch::Approx(0.25));
  CHECK(eval_constraint(i41, 2, VectorXd::Constant(1, 2.5)) == Catch::Approx(0.25));
  CHECK(feasibility_residual(i41, VectorXd::Constant(1, 1.5)) == 0.0);
}

TEST_CASE("homogenization block layout") {
  const HomogenizedInstance h = homogenize(example41_instance(1.0));
  MatrixXd Q1(2, 2);
  Q1 << 4.0, -2.5, -2.5, 1.0;
  CHECK(max_abs(h.Qs[1] - Q1) == 0.0);
  CHECK(h.H(0, 0) == 1.0);
  CHECK(h.H.norm() == 1.0);

  // generic alpha
  const double a = 1.7;
  const HomogenizedInstance hg = homogenize(example41_instance(a));
  CHECK(hg.Qs[1](0, 0) == Catch::Approx(4.0 * a));
  CHECK(hg.Qs[1](0, 1) == Catch::Approx(-(4.0 + a) / 2.0));

  // zero objective homogenizes to the zero matrix
  QuadraticForm zero{MatrixXd::Zero(2, 2), VectorXd::Zero(2), 0.0};
  const QcqpInstance z = make_instance(2, zero, {});
  CHECK(max_abs(homogenize(z).Qs[0]) == 0.0);

  const HomogenizedInstance h44 = homogenize(example44().first);
  CHECK(h44.Qs[2](0, 0) == 2.0);
  CHECK(h44.Qs[2](3, 3) == -2.0);
  CHECK(h44.Qs[2](1, 2) == -1.0);
  CHECK(h44.Qs[2](2, 1) == -1.0);
  CHECK(h44.Qs[2](0, 1) == 0.0);
}

TEST_CASE("homogenization identity on random data") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const QcqpInstance inst = random_instance(rng, n, 2);
    const HomogenizedInstance h = homogenize(inst);
    for (int rep = 0; rep < 10; ++rep) {
      VectorXd u(n);
      for (int i = 0; i < n; ++i) u(i) = unif(rng);
      const VectorXd x = lift(u);
      const MatrixXd Xl = x * x.transpose();
      for (int k = 0; k <= inst.m(); ++k) {
        const double direct = eval_constraint(inst, k, u);
        const double lifted = inner(h.Qs[static_cast<std::size_t>(k)], Xl);
        CHECK(std::abs(direct - lifted) <= 1e-9 * (1.0 + std::abs(direct)));
        ++checked;
      }
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("sign-flip symmetry of the lifted objective") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  const HomogenizedInstance h = homogenize(example42().first);
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd x(3);
    for (int i = 0; i < 3; ++i) x(i) = unif(rng);
    const double plus = inner(h.Qs[0], x * x.transpose());
    const double minus = inner(h.Qs[0], (-x) * (-x).transpose());
    CHECK(plus == minus);
  }
}

TEST_CASE("lagrangian values, gradient and Hessian") {
  const QcqpInstance i25 = example41_instance(2.5);
  const LagrangianEval le = lagrangian(i25, VectorXd::Constant(1, 3.0),
                                       (VectorXd(2) << 0.0, 6.0).finished());
  CHECK(le.grad(0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(le.hess(0, 0) == Catch::Approx(-10.0));

  const QcqpInstance i1 = example41_instance(1.0);
  const LagrangianEval le1 = lagrangian(i1, VectorXd::Constant(1, 1.0),
                                        (VectorXd(2) << 2.0 / 3.0, 0.0).finished());
  CHECK(le1.value == Catch::Approx(1.0));
  CHECK(le1.grad(0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(le1.hess(0, 0) == Catch::Approx(10.0 / 3.0));

  // y = 0 collapses to the objective
  const LagrangianEval le0 = lagrangian(i1, VectorXd::Constant(1, 2.0), VectorXd::Zero(2));
  CHECK(le0.value == Catch::Approx(4.0));
  CHECK(le0.hess(0, 0) == Catch::Approx(2.0));

  CHECK_THROWS_AS(lagrangian(i1, VectorXd::Zero(1), VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("lagrangian gradient matches finite differences") {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const double step = 1e-6;
  int points = 0;
  while (points < 200) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const QcqpInstance inst = random_instance(rng, n, 2);
    VectorXd u(n), y(2);
    for (int i = 0; i < n; ++i) u(i) = unif(rng);
    y << std::abs(unif(rng)), std::abs(unif(rng));
    const LagrangianEval le = lagrangian(inst, u, y);
    VectorXd fd(n);
    for (int i = 0; i < n; ++i) {
      VectorXd up = u, dn = u;
      up(i) += step;
      dn(i) -= step;
      fd(i) = (lagrangian(inst, up, y).value - lagrangian(inst, dn, y).value) / (2.0 * step);
    }
    const double err = (le.grad - fd).cwiseAbs().maxCoeff();
    CHECK(err <= 1e-5 * (1.0 + le.grad.cwiseAbs().maxCoeff()));
    ++points;
  }
}

TEST_CASE("Hessian is independent of the evaluation point, bitwise") {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const QcqpInstance inst = random_instance(rng, 3, 2);
  VectorXd u1(3), u2(3), y(2);
  for (int i = 0; i < 3; ++i) {
    u1(i) = unif(rng);
    u2(i) = unif(rng);
  }
  y << 0.3, 1.7;
  CHECK(lagrangian(inst, u1, y).hess == lagrangian(inst, u2, y).hess);
}

TEST_CASE("brute-force optimal-value search") {
  const QcqpInstance i1 = example41_instance(1.0);
  const ZetaEstimate ze = brute_force_zeta(i1, VectorXd::Constant(1, -10.0),
                                           VectorXd::Constant(1, 10.0), 401);
  REQUIRE(ze.found);
  CHECK(ze.certified_feasible);
  CHECK(ze.value == Catch::Approx(1.0).margin(1e-6));
  CHECK(ze.argmin(0) == Catch::Approx(1.0).margin(1e-5));

  // unconstrained parabola
  QuadraticForm q0{MatrixXd::Identity(1, 1), VectorXd::Zero(1), 0.0};
  const QcqpInstance para = make_instance(1, q0, {});
  const ZetaEstimate zp = brute_force_zeta(para, VectorXd::Constant(1, -1.0),
                                           VectorXd::Constant(1, 1.0), 41);
  REQUIRE(zp.found);
  CHECK(zp.value == Catch::Approx(0.0).margin(1e-9));

  const QcqpInstance i44 = example44().first;
  const ZetaEstimate z44 = brute_force_zeta(i44, VectorXd::Constant(3, -3.0),
                                            VectorXd::Constant(3, 3.0), 61);
  REQUIRE(z44.found);
  CHECK(z44.value == Catch::Approx(1.0).margin(1e-6));
  CHECK(std::abs(z44.argmin(2)) == Catch::Approx(1.0).margin(1e-5));

  CHECK_THROWS_AS(brute_force_zeta(i1, VectorXd::Constant(1, 1.0),
                                   VectorXd::Constant(1, -1.0), 41),
                  std::invalid_argument);
}
