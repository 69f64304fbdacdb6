#include <catch_amalgamated.hpp>

#include <random>

#include "qcert/linalg.hpp"

using namespace qcert;

namespace {

MatrixXd random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = unif(rng);
  }
  return symmetrized(M);
}

MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  const MatrixXd M = random_symmetric(n, rng);
  return sym_eig(M).eigvecs;
}

}  // namespace

TEST_CASE("sym_eig on known 2x2 matrices") {
  const EigenDecomposition id = sym_eig(MatrixXd::Identity(2, 2));
  CHECK(id.eigvals(0) == Catch::Approx(1.0));
  CHECK(id.eigvals(1) == Catch::Approx(1.0));

  MatrixXd flip(2, 2);
  flip << 0.0, 1.0, 1.0, 0.0;
  const EigenDecomposition ed = sym_eig(flip);
  CHECK(ed.eigvals(0) == Catch::Approx(-1.0));
  CHECK(ed.eigvals(1) == Catch::Approx(1.0));
}

TEST_CASE("sym_eig reconstruction and orthonormality on random matrices") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const MatrixXd M = random_symmetric(n, rng, 3.0);
    const EigenDecomposition ed = sym_eig(M);
    CHECK((M - ed.reconstruct()).norm() <= 1e-9 * (1.0 + M.norm()));
    CHECK((ed.eigvecs.transpose() * ed.eigvecs - MatrixXd::Identity(n, n)).norm() <= 1e-10);
    for (int i = 0; i + 1 < n; ++i) CHECK(ed.eigvals(i) <= ed.eigvals(i + 1) + 1e-12);
  }
}

TEST_CASE("sym_eig is deterministic") {
  std::mt19937_64 rng(11);
  const MatrixXd M = random_symmetric(5, rng);
  const EigenDecomposition a = sym_eig(M);
  const EigenDecomposition b = sym_eig(M);
  CHECK(a.eigvals == b.eigvals);
  CHECK(a.eigvecs == b.eigvecs);
}

TEST_CASE("sym_eig rejects non-finite input") {
  MatrixXd M = MatrixXd::Zero(2, 2);
  M(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sym_eig(M), std::invalid_argument);
}

TEST_CASE("psd_status classification") {
  const PsdStatus zero = psd_status(MatrixXd::Zero(3, 3), 1e-9);
  CHECK(zero.is_psd);
  CHECK_FALSE(zero.is_pd);

  const PsdStatus neg = psd_status(MatrixXd::Constant(1, 1, -10.0), 1e-9);
  CHECK_FALSE(neg.is_psd);

  // rank-1 slack with eigenvalues {0, 10/3}
  MatrixXd S(2, 2);
  S << 5.0 / 3.0, -5.0 / 3.0, -5.0 / 3.0, 5.0 / 3.0;
  const PsdStatus st = psd_status(S, 1e-9);
  CHECK(st.is_psd);
  CHECK_FALSE(st.is_pd);
  CHECK(st.min_eig == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("psd_status is similarity invariant") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const MatrixXd M = random_symmetric(n, rng, 2.0);
    const MatrixXd V = random_orthogonal(n, rng);
    const PsdStatus a = psd_status(M, 1e-9);
    const PsdStatus b = psd_status(symmetrized(V.transpose() * M * V), 1e-9);
    CHECK(a.is_psd == b.is_psd);
  }
}

TEST_CASE("numeric_rank") {
  MatrixXd M(2, 2);
  M << 1.0, 2.0, 2.0, 4.0;
  CHECK(numeric_rank(M, 1e-9) == 1);
  CHECK(numeric_rank(MatrixXd::Zero(3, 3), 1e-9) == 0);

  Eigen::Vector3d d(1.0, 1.0, 2.0);
  CHECK(numeric_rank(MatrixXd(d.asDiagonal()), 1e-9) == 3);
}

TEST_CASE("numeric_rank of random outer products is one") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    VectorXd x(n);
    do {
      for (int i = 0; i < n; ++i) x(i) = unif(rng);
    } while (x.norm() < 0.1);
    CHECK(numeric_rank(x * x.transpose(), 1e-9) == 1);
  }
}

TEST_CASE("rank1_extract recovers the lifted point") {
  MatrixXd X(2, 2);
  X << 1.0, 4.0, 4.0, 16.0;
  const auto r = rank1_extract(X, 1e-6);
  REQUIRE(r.has_value());
  CHECK_FALSE(r->x0_degenerate);
  CHECK(r->x(0) == Catch::Approx(1.0));
  CHECK(r->x(1) == Catch::Approx(4.0));

  CHECK_FALSE(rank1_extract(MatrixXd::Identity(2, 2), 1e-6).has_value());

  Eigen::Vector3d d(1.0, 1.0, 2.0);
  CHECK_FALSE(rank1_extract(MatrixXd(d.asDiagonal()), 1e-6).has_value());
}

TEST_CASE("rank1_extract reconstruction property") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = unif(rng);
    if (x.norm() < 0.1) continue;
    const MatrixXd X = x * x.transpose();
    const auto r = rank1_extract(X, 1e-6);
    REQUIRE(r.has_value());
    CHECK((X - r->x * r->x.transpose()).norm() <= 10.0 * 1e-6 * X.norm() + 1e-12);
  }
}

TEST_CASE("rank1_extract flags a vanishing homogenizing coordinate") {
  Eigen::Vector3d x(0.0, 1.0, -2.0);
  const auto r = rank1_extract(MatrixXd(x * x.transpose()), 1e-6);
  REQUIRE(r.has_value());
  CHECK(r->x0_degenerate);
  CHECK(r->x(1) > 0.0);  // first nonzero entry made positive
}

TEST_CASE("pinv_solve splits range and null components") {
  MatrixXd M(2, 2);
  M << 1.0, 0.0, 0.0, 0.0;
  const PinvSolveResult in_range = pinv_solve(M, (VectorXd(2) << 3.0, 0.0).finished());
  CHECK(in_range.x(0) == Catch::Approx(3.0));
  CHECK(in_range.range_residual <= 1e-12);

  const PinvSolveResult off_range = pinv_solve(M, (VectorXd(2) << 0.0, 1.0).finished());
  CHECK(off_range.range_residual == Catch::Approx(1.0));
}
