#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "qcert/bench.hpp"
#include "qcert/structural.hpp"

using namespace qcert;
using namespace qcert_test;

TEST_CASE("trivial normalization-only problem") {
  QuadraticForm q0{MatrixXd::Identity(1, 1), VectorXd::Zero(1), 0.0};
  const HomogenizedInstance h = homogenize(make_instance(1, q0, {}));
  ConicProblem p = build_primal_sdp(h);
  p.cost = h.H;  // min H • X subject to H • X = 1
  const ConicOutcome out = solve(p, {});
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.primal_obj == Catch::Approx(1.0).margin(1e-7));
  CHECK(out.dual_obj == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("exact relaxation at alpha = 1") {
  const ConicProblem p = build_primal_sdp(homogenize(example41_instance(1.0)));
  const ConicOutcome out = solve(p, {});
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.primal_obj == Catch::Approx(1.0).margin(1e-6));
  CHECK(out.certificate.X(0, 0) == Catch::Approx(1.0).margin(1e-6));
  CHECK(out.certificate.X(0, 1) == Catch::Approx(1.0).margin(1e-6));
  CHECK(out.certificate.X(1, 1) == Catch::Approx(1.0).margin(1e-6));
  // contract: stated residual bounds at optimality
  CHECK(out.kkt.primal_feas <= 10.0 * 1e-9);
  CHECK(out.kkt.dual_feas <= 10.0 * 1e-9);
  CHECK(out.kkt.complementarity_y <= 10.0 * 1e-9);
  CHECK(out.kkt.complementarity_S <= 10.0 * 1e-9);
  CHECK(out.gap <= 10.0 * 1e-9);
}

TEST_CASE("gap window at alpha = 2.5") {
  const ConicProblem p = build_primal_sdp(homogenize(example41_instance(2.5)));
  const ConicOutcome out = solve(p, {});
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.primal_obj == Catch::Approx(22.0 / 3.0).margin(1e-6));
  CHECK(out.certificate.X(0, 1) == Catch::Approx(8.0 / 3.0).margin(1e-5));
  CHECK(out.certificate.X(1, 1) == Catch::Approx(22.0 / 3.0).margin(1e-5));
  CHECK(out.certificate.X.determinant() == Catch::Approx(2.0 / 9.0).margin(1e-5));
  // the optimal primal matrix is positive definite, so complementarity forces
  // the slack matrix to vanish; solving S(y, s) = O gives the unique dual
  // optimum y = (10/3, 13/3), s = 22/3 (distinct from the KKT multipliers of
  // the original problem at its minimizer, which are (0, 6))
  CHECK(out.certificate.y(0) == Catch::Approx(10.0 / 3.0).margin(1e-5));
  CHECK(out.certificate.y(1) == Catch::Approx(13.0 / 3.0).margin(1e-5));
  CHECK(max_abs(slack_matrix(homogenize(example41_instance(2.5)), out.certificate.y,
                             out.certificate.s)) <= 1e-5);
}

TEST_CASE("dual value and multipliers at alpha = 5") {
  const ConicProblem p = build_primal_sdp(homogenize(example41_instance(5.0)));
  const ConicOutcome out = solve_dual(p, {});
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.dual_obj == Catch::Approx(16.0).margin(1e-6));
  CHECK(out.certificate.s == Catch::Approx(16.0).margin(1e-6));
  CHECK(out.certificate.y(0) == Catch::Approx(8.0).margin(1e-5));
  CHECK(out.certificate.y(1) == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("unbounded relaxation is flagged with a feasible witness") {
  const ConicProblem p = build_primal_sdp(homogenize(example42().first));
  SolverOptions opts;
  opts.unbounded_threshold = 1e6;
  const ConicOutcome out = solve(p, opts);
  CHECK(out.status == SolveStatus::PrimalUnboundedSuspected);
  CHECK(out.has_feasible);
  CHECK(out.best_feasible_obj <= -1e6);
}

TEST_CASE("structural dual analysis certifies infeasibility") {
  const ConicProblem p = build_primal_sdp(homogenize(example42().first));
  const StructuralDualResult r = structural_dual_analysis(p);
  CHECK(r.certified_infeasible);
  const ConicOutcome out = solve_dual(p, {});
  CHECK(out.status == SolveStatus::DualInfeasibleCertified);
}

TEST_CASE("structural dual analysis pins an upper bound when feasible") {
  // duality-gap example: the zero diagonal forces y_2 = 0 and then s <= 0
  const ConicProblem p = build_primal_sdp(homogenize(example44().first));
  const StructuralDualResult r = structural_dual_analysis(p);
  CHECK_FALSE(r.certified_infeasible);
  REQUIRE(std::isfinite(r.s_upper));
  CHECK(r.s_upper <= 1e-9);

  // redundant-cut variant: dual feasible with value 0 and the same bound
  const ConicProblem p43 = build_primal_sdp(homogenize(example43().first));
  const StructuralDualResult r43 = structural_dual_analysis(p43);
  CHECK_FALSE(r43.certified_infeasible);
  REQUIRE(std::isfinite(r43.s_upper));
  CHECK(r43.s_upper <= 1e-9);
}

TEST_CASE("strong duality without exactness: values settle at zero") {
  const ConicProblem p = build_primal_sdp(homogenize(example43().first));
  const ConicOutcome out = solve(p, {});
  CHECK(std::abs(out.primal_obj) <= 1e-6);
  CHECK(std::abs(out.dual_obj) <= 1e-6);
  // the returned matrix must not be close to rank one
  const EigenDecomposition ed = sym_eig(out.certificate.X);
  CHECK(ed.eigvals(ed.eigvals.size() - 2) >= 0.1);
}

TEST_CASE("duality-gap example: iterates stall, structural bound pins the value") {
  // both sides lack interior points and the values differ, so the pair can
  // never meet the optimality gates; the iterates are not even a reliable
  // estimate of the primal value here (nearly-feasible matrices with tiny
  // objective exist), which is exactly why the sign-propagation bound matters
  const ConicProblem p = build_primal_sdp(homogenize(example44().first));
  const ConicOutcome out = solve(p, {});
  CHECK(out.status != SolveStatus::Optimal);

  const StructuralPrimalResult sp = structural_primal_bound(p);
  CHECK_FALSE(sp.certified_infeasible);
  CHECK(sp.objective_lower == Catch::Approx(1.0).margin(1e-9));

  // dual side: the zero diagonal forces y_2 = 0 and the value bound s <= 0,
  // while (0, 0, 0) is dual feasible, so the dual optimum is exactly 0
  const StructuralDualResult sd = structural_dual_analysis(p);
  REQUIRE(std::isfinite(sd.s_upper));
  CHECK(sd.s_upper <= 1e-9);
}

TEST_CASE("monotone complementarity once the iterates are feasible") {
  const ConicProblem p = build_primal_sdp(homogenize(example41_instance(1.0)));
  SolverOptions opts;
  opts.keep_trace = true;
  const ConicOutcome out = solve(p, opts);
  REQUIRE(out.trace.size() >= 3);
  for (std::size_t i = 1; i < out.trace.size(); ++i) {
    if (out.trace[i - 1].pinfeas <= 1e-9 && out.trace[i - 1].dinfeas <= 1e-9) {
      CHECK(out.trace[i].mu <= 1.1 * out.trace[i - 1].mu);
    }
  }
}

TEST_CASE("determinism: identical inputs give identical runs") {
  const ConicProblem p = build_primal_sdp(homogenize(example41_instance(2.5)));
  const ConicOutcome a = solve(p, {});
  const ConicOutcome b = solve(p, {});
  CHECK(a.iterations == b.iterations);
  CHECK(a.certificate.X == b.certificate.X);
  CHECK(a.certificate.y == b.certificate.y);
  CHECK(a.certificate.s == b.certificate.s);
}

TEST_CASE("weak duality on optimal outcomes, random instances") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const BoundedInstance bi = bounded_random_instance(1000 + seed);
    const ConicOutcome out = solve(build_primal_sdp(homogenize(bi.instance)), {});
    if (out.status != SolveStatus::Optimal) continue;
    CHECK(out.primal_obj >= out.dual_obj - 1e-6 * (1.0 + std::abs(out.dual_obj)));
  }
}

TEST_CASE("trust-region-style instances match the scalar dual search") {
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 30 && solved < 15; ++seed) {
    std::mt19937_64 rng(7000 + seed);
    const int n = 1 + static_cast<int>(rng() % 3);
    QuadraticForm obj;
    const MatrixXd G = rand_sym(rng, n);
    obj.A = G * G.transpose() + 0.4 * MatrixXd::Identity(n, n);
    obj.b = rand_vec(rng, n);
    obj.c = 0.0;
    QuadraticForm ball{MatrixXd::Identity(n, n), VectorXd::Zero(n), -1.0};
    const QcqpInstance inst = make_instance(n, obj, {{ball, Sense::Leq}});

    const ConicOutcome out = solve(build_primal_sdp(homogenize(inst)), {});
    if (out.status != SolveStatus::Optimal) continue;
    ++solved;

    // concave scalar maximization of the closed-form dual value
    auto phi = [&](double y) {
      return lagrangian_dual_value(inst, VectorXd::Constant(1, y));
    };
    double lo = 0.0, hi = 1.0;
    while (phi(hi * 4.0) > phi(hi)) hi *= 4.0;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (phi(m1) < phi(m2)) {
        lo = m1;
      } else {
        hi = m2;
      }
    }
    const double best = phi(0.5 * (lo + hi));
    CHECK(out.primal_obj == Catch::Approx(best).epsilon(1e-6).margin(1e-6));
  }
  CHECK(solved >= 15);
}

TEST_CASE("iteration trace is exportable") {
  SolverOptions opts;
  opts.keep_trace = true;
  const ConicOutcome out = solve(build_primal_sdp(homogenize(example41_instance(1.0))), opts);
  REQUIRE_FALSE(out.trace.empty());
  CHECK(out.trace.front().iter == 0);
  CHECK(out.trace.back().mu <= out.trace.front().mu);
}

TEST_CASE("solver input validation") {
  ConicProblem p;
  p.dim = 1;
  p.cost = MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(solve(p, {}), std::invalid_argument);

  SolverOptions bad;
  bad.sigma = 1.5;
  CHECK_THROWS_AS(solve(build_primal_sdp(homogenize(example41_instance(1.0))), bad),
                  std::invalid_argument);
}
