#include <catch_amalgamated.hpp>

#include <random>

#include "qcert/bench.hpp"
#include "qcert/conic.hpp"
#include "qcert/slater.hpp"

using namespace qcert;

TEST_CASE("primal relaxation build") {
  const HomogenizedInstance h = homogenize(example41_instance(1.0));
  const ConicProblem p = build_primal_sdp(h);
  CHECK(p.dim == 2);
  REQUIRE(p.maps.size() == 3);
  CHECK(p.maps[0].sense == Sense::Leq);
  CHECK(p.maps[0].rhs == 0.0);
  CHECK(p.maps[1].sense == Sense::Leq);
  CHECK(p.maps[2].sense == Sense::Eq);
  CHECK(p.maps[2].rhs == 1.0);
  CHECK(max_abs(p.maps[2].A - h.H) == 0.0);
  CHECK_FALSE(p.nonneg_matrix);

  // m = 0: only the normalization row
  QuadraticForm q0{MatrixXd::Identity(1, 1), VectorXd::Zero(1), 0.0};
  const ConicProblem p0 = build_primal_sdp(homogenize(make_instance(1, q0, {})));
  CHECK(p0.maps.size() == 1);

  const ConicProblem p44 = build_primal_sdp(homogenize(example44().first));
  CHECK(p44.dim == 4);
  CHECK(p44.maps.size() == 3);
  CHECK(p44.maps[1].A(0, 0) == 2.0);
  CHECK(p44.maps[1].A(3, 3) == -2.0);
}

TEST_CASE("slack matrix in both sense conventions") {
  const HomogenizedInstance h = homogenize(example41_instance(1.0));
  const MatrixXd S = slack_matrix(h, (VectorXd(2) << 2.0 / 3.0, 0.0).finished(), 1.0);
  MatrixXd expect(2, 2);
  expect << 5.0 / 3.0, -5.0 / 3.0, -5.0 / 3.0, 5.0 / 3.0;
  CHECK(max_abs(S - expect) <= 1e-12);
  CHECK(psd_status(S, 1e-9).is_psd);
  // annihilates the lifted minimizer
  CHECK((S * lift(VectorXd::Constant(1, 1.0))).cwiseAbs().maxCoeff() <= 1e-12);

  // y = 0 gives Q_0 in either convention
  CHECK(max_abs(slack_matrix(h, VectorXd::Zero(2), 0.0) - h.Qs[0]) == 0.0);

  const HomogenizedInstance h44 = homogenize(example44().first);
  const MatrixXd S44 = slack_matrix(h44, VectorXd::Zero(2), 0.0);
  CHECK(max_abs(S44 - h44.Qs[0]) == 0.0);
  CHECK(psd_status(S44, 1e-9).is_psd);
  CHECK(psd_status(S44, 1e-9).min_eig == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("relaxation KKT residuals on hand certificates") {
  // redundant-cut example: (y, s) = ((0,0,0,1), 0) gives a vanishing slack
  const auto [inst43, exp43] = example43();
  const HomogenizedInstance h43 = homogenize(inst43);
  MatrixXd X = MatrixXd::Zero(3, 3);
  X(0, 0) = 1.0;
  X(1, 1) = 1.0;
  X(2, 2) = 2.0;
  const ConicCertificate cert = make_certificate(h43, X, exp43.kkt_y, exp43.kkt_s);
  CHECK(max_abs(cert.S) <= 1e-12);
  const KktResiduals r = sdp_kkt_residual(h43, cert);
  CHECK(r.primal_feas <= 1e-9);
  CHECK(r.dual_feas <= 1e-9);
  CHECK(r.complementarity_y <= 1e-9);
  CHECK(r.complementarity_S <= 1e-9);
  CHECK(r.max() <= 1e-9);

  // duality-gap example: the rank-1 optimum is NOT complementary with (0,0,0)
  const auto [inst44, exp44] = example44();
  const HomogenizedInstance h44 = homogenize(inst44);
  MatrixXd X44 = MatrixXd::Zero(4, 4);
  X44(0, 0) = 1.0;
  X44(0, 3) = 1.0;
  X44(3, 0) = 1.0;
  X44(3, 3) = 1.0;
  const ConicCertificate c44 = make_certificate(h44, X44, VectorXd::Zero(2), 0.0);
  const KktResiduals r44 = sdp_kkt_residual(h44, c44);
  CHECK(r44.primal_feas <= 1e-9);
  CHECK(r44.dual_feas <= 1e-9);
  CHECK(r44.complementarity_S == Catch::Approx(1.0));
}

TEST_CASE("weak duality of hand-checked feasible pairs") {
  std::mt19937_64 rng(211);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  const HomogenizedInstance h = homogenize(example41_instance(5.0));
  // X = [1;u][1;u]' for feasible u in [4, 5]; dual pairs shrunk toward the
  // known optimum (y, s) = ((8, 0), 16)
  for (int trial = 0; trial < 50; ++trial) {
    const double u = 4.0 + 0.02 * trial * 1.0;
    const VectorXd x = lift(VectorXd::Constant(1, u));
    const MatrixXd X = x * x.transpose();
    const double t = unif(rng) / 2.0;
    const VectorXd y = (VectorXd(2) << 8.0 * t, 0.0).finished();
    const double s = 16.0 * t - 2.0 * (1.0 - t);
    const ConicCertificate cert = make_certificate(h, X, y, s);
    if (!psd_status(cert.S, 1e-9).is_psd) continue;
    const double pval = inner(h.Qs[0], X);
    CHECK(pval - s >= -1e-7 * (1.0 + std::abs(pval)));
  }
}

TEST_CASE("dual description feasibility predicate") {
  const auto [inst43, exp43] = example43();
  const DualSdpDescription dd = build_dual_sdp(homogenize(inst43));
  CHECK(dd.is_feasible(exp43.kkt_y, 0.0));
  CHECK_FALSE(dd.is_feasible(exp43.kkt_y, 1.0));  // S(y,1) has a negative corner
  CHECK_FALSE(dd.is_feasible((VectorXd(4) << -1.0, 0.0, 0.0, 1.0).finished(), 0.0));
}

TEST_CASE("constraint scaling leaves the feasible set and value unchanged") {
  for (const double lam : {0.1, 10.0}) {
    const QcqpInstance base = example41_instance(1.0);
    QcqpInstance scaled = base;
    scaled.constraints[0].q.A *= lam;
    scaled.constraints[0].q.b *= lam;
    scaled.constraints[0].q.c *= lam;

    const ConicOutcome a = solve(build_primal_sdp(homogenize(base)), {});
    const ConicOutcome b = solve(build_primal_sdp(homogenize(scaled)), {});
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK(a.primal_obj == Catch::Approx(b.primal_obj).epsilon(1e-6));
    // multipliers rescale inversely on the scaled constraint; they are only
    // square-root-of-gap accurate near the degenerate face, hence the looser
    // comparison than for the value
    CHECK(a.certificate.y(0) == Catch::Approx(lam * b.certificate.y(0)).epsilon(1e-3));
  }
}

TEST_CASE("slater diagnosis on the bundled examples") {
  SECTION("strictly feasible case") {
    const SlaterDiagnosis d = slater_diagnosis(homogenize(example41_instance(1.0)));
    CHECK(d.holds);
    CHECK(d.m_minus == std::vector<int>{1, 2});
    REQUIRE(d.witness.has_value());
    CHECK(psd_status(*d.witness, 1e-9).is_pd);
    CHECK(inner(homogenize(example41_instance(1.0)).H, *d.witness) ==
          Catch::Approx(1.0).margin(1e-6));
    const HomogenizedInstance h = homogenize(example41_instance(1.0));
    for (const int k : d.m_minus) {
      CHECK(inner(h.Qs[static_cast<std::size_t>(k)], *d.witness) < 0.0);
    }
  }
  SECTION("single-point feasible set") {
    const SlaterDiagnosis d = slater_diagnosis(homogenize(example41_instance(4.0)));
    CHECK_FALSE(d.holds);
  }
  SECTION("forced-zero diagonal") {
    const SlaterDiagnosis d = slater_diagnosis(homogenize(example44().first));
    CHECK_FALSE(d.holds);
    CHECK(d.m_minus == std::vector<int>{2});
  }
}
