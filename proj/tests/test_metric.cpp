#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "carnot/algebra.hpp"
#include "carnot/metric.hpp"

using namespace carnot;

namespace {

Eigen::MatrixXd random_matrix(int n, std::mt19937& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = dist(gen);
  return m;
}

}  // namespace

TEST_CASE("vertical metric validation detects symmetry and definiteness failures") {
  CHECK(validate(VerticalMetric::identity(3)).ok());

  VerticalMetric asym{Eigen::MatrixXd::Identity(2, 2)};
  asym.G(0, 1) = 1e-6;
  CHECK_FALSE(validate(asym).ok());

  VerticalMetric indefinite{Eigen::MatrixXd::Identity(2, 2)};
  indefinite.G(1, 1) = -1.0;
  CHECK_FALSE(validate(indefinite).ok());

  VerticalMetric degenerate{Eigen::MatrixXd::Zero(2, 2)};
  degenerate.G(0, 0) = 1.0;
  CHECK_FALSE(validate(degenerate).ok());
}

TEST_CASE("j_matrix realizes the canonical complex structure on the Heisenberg algebra") {
  const auto a = make_heisenberg_aniso({1.0});
  const auto v = VerticalMetric::identity(1);
  const Eigen::MatrixXd j = j_matrix(a, v, Eigen::VectorXd::Ones(1)).M;
  Eigen::MatrixXd expected(2, 2);
  expected << 0, -1, 1, 0;
  CHECK((j - expected).norm() == doctest::Approx(0.0));
  CHECK((j * j + Eigen::MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("j_matrix vanishes at t = 0 and is linear in t") {
  const auto a = make_g_eps(2, 1.0);
  const auto v = VerticalMetric::identity(2);
  CHECK(j_matrix(a, v, Eigen::VectorXd::Zero(2)).M.norm() == doctest::Approx(0.0));

  std::mt19937 gen(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd s(2), t(2);
    for (int i = 0; i < 2; ++i) {
      s[i] = dist(gen);
      t[i] = dist(gen);
    }
    const double c1 = dist(gen), c2 = dist(gen);
    const Eigen::MatrixXd lhs = j_matrix(a, v, c1 * s + c2 * t).M;
    const Eigen::MatrixXd rhs = c1 * j_matrix(a, v, s).M + c2 * j_matrix(a, v, t).M;
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("j_matrix on the free algebra gives one rotation block") {
  const int m = 4;
  const auto a = make_free_step_two(m);
  const auto v = VerticalMetric::identity(a.m2);
  const Eigen::VectorXd t = Eigen::VectorXd::Unit(a.m2, free_pair_index(m, 0, 1));
  const Eigen::MatrixXd j = j_matrix(a, v, t).M;
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
  block(0, 1) = -1.0;
  block(1, 0) = 1.0;
  CHECK((j - block).norm() == doctest::Approx(0.0));
  Eigen::MatrixXd jsq_expected = Eigen::MatrixXd::Zero(m, m);
  jsq_expected(0, 0) = jsq_expected(1, 1) = -1.0;
  CHECK((j * j - jsq_expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("the defining identity of the J operator holds on random data") {
  std::mt19937 gen(23);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (const auto& a : {make_heisenberg_aniso({1.0, 2.0}), make_g_eps(2, 1.0),
                        make_free_step_two(3), make_g_bar_eps(2, 0.5)}) {
    // a generic SPD metric
    Eigen::MatrixXd r = random_matrix(a.m2, gen);
    VerticalMetric v{Eigen::MatrixXd(r * r.transpose() +
                                     0.5 * Eigen::MatrixXd::Identity(a.m2, a.m2))};
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd u(a.m), w(a.m), t(a.m2);
      for (int i = 0; i < a.m; ++i) {
        u[i] = dist(gen);
        w[i] = dist(gen);
      }
      for (int q = 0; q < a.m2; ++q) t[q] = dist(gen);
      const Eigen::MatrixXd j = j_matrix(a, v, t).M;
      const double lhs = (j * u).dot(w);
      const double rhs = bracket(a, u, w).dot(v.G * t);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + u.norm() * w.norm() * t.norm()));
      CHECK(std::abs((j * u).dot(u)) <= 1e-10 * (1.0 + u.squaredNorm() * t.norm()));
      CHECK((j + j.transpose()).norm() <= 1e-12 * (1.0 + j.norm()));
    }
  }
}

TEST_CASE("matrix norms: identities and the skew-square bounds") {
  CHECK(hs_norm(Eigen::MatrixXd::Identity(3, 3)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(op_norm(Eigen::MatrixXd::Identity(3, 3)) == doctest::Approx(1.0));

  Eigen::MatrixXd rot(2, 2);
  rot << 0, 1, -1, 0;
  CHECK(hs_norm(rot) == doctest::Approx(std::sqrt(2.0)));
  CHECK(op_norm(rot) == doctest::Approx(1.0));

  std::mt19937 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::MatrixXd raw = random_matrix(4, gen);
    const Eigen::MatrixXd skew = 0.5 * (raw - raw.transpose());
    const double hs2 = hs_norm(skew) * hs_norm(skew);
    const double sq = hs_norm(skew * skew);
    CHECK(sq >= hs2 / std::sqrt(4.0) - 1e-12);
    CHECK(sq <= hs2 / std::sqrt(2.0) + 1e-12);

    const Eigen::MatrixXd any = random_matrix(4, gen);
    CHECK(op_norm(any) <= hs_norm(any) + 1e-12);
    CHECK(hs_norm(any) <= 2.0 * op_norm(any) + 1e-12);
  }
}

TEST_CASE("h_type_defect vanishes exactly on H-type data") {
  for (int n : {1, 2, 3}) {
    const auto a = make_heisenberg_aniso(std::vector<double>(n, 1.0));
    CHECK(h_type_defect(a, VerticalMetric::identity(1), Eigen::VectorXd::Ones(1)) ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("h_type_defect on the free algebra at a pair direction") {
  for (int m : {3, 4, 5}) {
    const auto a = make_free_step_two(m);
    const Eigen::VectorXd t = Eigen::VectorXd::Unit(a.m2, free_pair_index(m, 0, 1));
    CHECK(h_type_defect(a, VerticalMetric::identity(a.m2), t) ==
          doctest::Approx(std::sqrt(m - 2.0)));
  }
}

TEST_CASE("h_type_defect against direct matrix arithmetic on a weighted Heisenberg algebra") {
  // coefficients (1, 2): the squared J at the unit direction is
  // diag(-1, -1, -4, -4), so the defect is || diag(0, 0, -3, -3) ||.
  const auto a = make_heisenberg_aniso({1.0, 2.0});
  const auto v = VerticalMetric::identity(1);
  Eigen::MatrixXd jsq = Eigen::MatrixXd::Zero(4, 4);
  jsq.diagonal() << -1, -1, -4, -4;
  const Eigen::MatrixXd j = j_matrix(a, v, Eigen::VectorXd::Ones(1)).M;
  CHECK((j * j - jsq).norm() == doctest::Approx(0.0));
  CHECK(h_type_defect(a, v, Eigen::VectorXd::Ones(1)) == doctest::Approx(std::sqrt(18.0)));
}

TEST_CASE("h_type_defect is 2-homogeneous") {
  const auto a = make_g_eps(2, 1.0);
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> dist(0.1, 3.0);
  Eigen::MatrixXd r = random_matrix(a.m2, gen);
  VerticalMetric v{
      Eigen::MatrixXd(r * r.transpose() + Eigen::MatrixXd::Identity(a.m2, a.m2))};
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd t(a.m2);
    for (int q = 0; q < a.m2; ++q) t[q] = dist(gen) - 1.5;
    const double lambda = dist(gen);
    const double lhs = h_type_defect(a, v, lambda * t);
    const double rhs = lambda * lambda * h_type_defect(a, v, t);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("orthonormal_vertical_j spans the same sums for different factorizations") {
  const auto a = make_g_eps(2, 1.0);
  std::mt19937 gen(41);
  Eigen::MatrixXd r = random_matrix(a.m2, gen);
  VerticalMetric v{
      Eigen::MatrixXd(r * r.transpose() + Eigen::MatrixXd::Identity(a.m2, a.m2))};

  // Cholesky-based orthonormal frame
  const auto js = orthonormal_vertical_j(a, v);
  Eigen::MatrixXd sum_chol = Eigen::MatrixXd::Zero(a.m, a.m);
  for (const auto& j : js) sum_chol += j * j;

  // eigendecomposition-based orthonormal frame as an independent route
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v.G);
  Eigen::MatrixXd sum_eig = Eigen::MatrixXd::Zero(a.m, a.m);
  for (int q = 0; q < a.m2; ++q) {
    const Eigen::VectorXd basis_q =
        eig.eigenvectors().col(q) / std::sqrt(eig.eigenvalues()[q]);
    const Eigen::MatrixXd j = j_matrix(a, v, basis_q).M;
    sum_eig += j * j;
  }
  CHECK((sum_chol - sum_eig).norm() <= 1e-10 * (1.0 + sum_eig.norm()));
}
