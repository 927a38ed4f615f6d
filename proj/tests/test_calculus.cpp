#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "carnot/algebra.hpp"
#include "carnot/calculus.hpp"
#include "carnot/deviation.hpp"
#include "carnot/metric.hpp"

using namespace carnot;

namespace {

GroupPoint random_point(const StepTwoAlgebra& a, std::mt19937& gen, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  GroupPoint p;
  p.x.resize(a.m);
  p.t.resize(a.m2);
  for (int i = 0; i < a.m; ++i) p.x[i] = dist(gen);
  for (int q = 0; q < a.m2; ++q) p.t[q] = dist(gen);
  return p;
}

GroupPoint random_point_away_from_origin(const StepTwoAlgebra& a, std::mt19937& gen) {
  for (;;) {
    GroupPoint p = random_point(a, gen);
    const double b = p.x.squaredNorm();
    if (std::pow(b * b + 16.0 * p.t.squaredNorm(), 0.25) > 0.3) return p;
  }
}

SolverConfig fast_config() {
  SolverConfig cfg;
  cfg.restarts = 4;
  cfg.max_iters = 150;
  cfg.tol = 1e-9;
  cfg.seed = 5;
  cfg.grid_density = 1024;
  return cfg;
}

}  // namespace

TEST_CASE("horizontal frame on the rank-2 Heisenberg algebra") {
  const auto a = make_heisenberg_aniso({1.0});
  GroupPoint p;
  p.x = Eigen::Vector2d(0.7, -0.3);
  p.t = Eigen::VectorXd::Constant(1, 0.2);
  const Eigen::MatrixXd frame = horizontal_frame(a, p);
  // X = d/dx - (y/2) d/dt, Y = d/dy + (x/2) d/dt
  CHECK(frame(0, 0) == doctest::Approx(1.0));
  CHECK(frame(1, 0) == doctest::Approx(0.0));
  CHECK(frame(2, 0) == doctest::Approx(-p.x[1] / 2));
  CHECK(frame(2, 1) == doctest::Approx(p.x[0] / 2));

  const Eigen::MatrixXd at_origin = horizontal_frame(a, GroupPoint::origin(a));
  CHECK((at_origin.topRows(2) - Eigen::MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0.0));
  CHECK(at_origin.bottomRows(1).norm() == doctest::Approx(0.0));
}

TEST_CASE("frame commutators reproduce the structure constants") {
  std::mt19937 gen(3);
  for (const auto& a : {make_heisenberg_aniso({1, 2}), make_g_eps(2, 1.0), make_free_step_two(3)}) {
    const GroupPoint p = random_point(a, gen);
    for (int q = 0; q < a.m2; ++q) {
      // finite-difference route through a plain evaluator of t_q
      ScalarField tq = ScalarField::finite_difference(
          [q](const GroupPoint& g) { return g.t[q]; });
      const Eigen::MatrixXd second = horizontal_second(tq, a, p);
      const Eigen::MatrixXd commutator = second - second.transpose();
      CHECK((commutator - a.B[q]).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
}

TEST_CASE("derivative suite against the finite-difference oracle") {
  std::mt19937 gen(11);
  const std::vector<StepTwoAlgebra> algebras = {
      make_heisenberg_aniso({1, 1}), make_heisenberg_aniso({1, 3}), make_free_step_two(3),
      make_g_eps(2, 1.0)};
  for (const auto& a : algebras) {
    const auto v = VerticalMetric::identity(a.m2);
    const ScalarField b_field = squared_horizontal_norm_field();
    const ScalarField c_field = squared_vertical_norm_field(v);
    const ScalarField n_field = kaplan_field(a, v);

    for (int trial = 0; trial < 25; ++trial) {
      const GroupPoint p = random_point_away_from_origin(a, gen);
      const Eigen::MatrixXd j = j_matrix(a, v, p.t).M;

      // grad_0 b = 2x and the symmetrized horizontal Hessian of b is 2 Id
      const Eigen::VectorXd grad_b = horizontal_gradient(b_field, a, p);
      CHECK((grad_b - 2.0 * p.x).cwiseAbs().maxCoeff() <= 1e-10);
      const Eigen::MatrixXd second_b = horizontal_second(b_field, a, p);
      CHECK((0.5 * (second_b + second_b.transpose()) - 2.0 * Eigen::MatrixXd::Identity(a.m, a.m))
                .cwiseAbs()
                .maxCoeff() <= 1e-10);

      // X_i t_q = beta_i^q / 2 and X_i X_j t_q = b_ij^q / 2
      for (int q = 0; q < a.m2; ++q) {
        ScalarField tq = coordinate_t_field(q);
        const Eigen::VectorXd grad_tq = horizontal_gradient(tq, a, p);
        const Eigen::VectorXd beta_q = -(a.B[q] * p.x);
        CHECK((grad_tq - 0.5 * beta_q).cwiseAbs().maxCoeff() <= 1e-12);
        const Eigen::MatrixXd second_tq = horizontal_second(tq, a, p);
        CHECK((second_tq - 0.5 * a.B[q]).cwiseAbs().maxCoeff() <= 1e-12);
      }

      // grad_0 c_v = J_t(x); symmetrized Hessian of c_v from the beta products
      const Eigen::VectorXd grad_c = horizontal_gradient(c_field, a, p);
      CHECK((grad_c - j * p.x).cwiseAbs().maxCoeff() <= 1e-10);
      const Eigen::MatrixXd second_c = horizontal_second(c_field, a, p);
      Eigen::MatrixXd beta(a.m, a.m2);
      for (int q = 0; q < a.m2; ++q) beta.col(q) = -(a.B[q] * p.x);
      CHECK((0.5 * (second_c + second_c.transpose()) - 0.5 * beta * v.G * beta.transpose())
                .cwiseAbs()
                .maxCoeff() <= 1e-10);

      // norms of the gradient of a_v and of N_v
      const double bb = p.x.squaredNorm();
      const double jx2 = (j * p.x).squaredNorm();
      const ScalarField a_field = kaplan_power_field(v, 1.0);
      const double grad_a_sq = norm_sq_horizontal_gradient(a_field, a, p);
      CHECK(grad_a_sq ==
            doctest::Approx(16.0 * (std::pow(bb, 3) + 16.0 * jx2)).epsilon(1e-10));

      const double n_val = n_field.value(p);
      const Eigen::VectorXd grad_n = horizontal_gradient(n_field, a, p);
      const Eigen::VectorXd expected_grad_n = (bb * p.x + 4.0 * j * p.x) / std::pow(n_val, 3);
      CHECK((grad_n - expected_grad_n).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(norm_sq_horizontal_gradient(n_field, a, p) ==
            doctest::Approx((std::pow(bb, 3) + 16.0 * jx2) / std::pow(n_val, 6))
                .epsilon(1e-10));

      // the full jets agree with finite differences
      for (const ScalarField* field : {&b_field, &c_field, &n_field}) {
        const Jet2 closed = field->jet(p);
        const Jet2 fd = finite_difference_jet(
            [&](const GroupPoint& g) { return field->value(g); }, p);
        CHECK(std::abs(closed.value - fd.value) <= 1e-9 * (1.0 + std::abs(fd.value)));
        CHECK((closed.grad - fd.grad).cwiseAbs().maxCoeff() <= 1e-7);
        CHECK((closed.hess - fd.hess).cwiseAbs().maxCoeff() <= 1e-6);
      }
    }
  }
}

TEST_CASE("sub-Laplacian basics") {
  std::mt19937 gen(13);
  for (const auto& a : {make_heisenberg_aniso({1, 2}), make_free_step_two(3)}) {
    const auto v = VerticalMetric::identity(a.m2);
    for (int trial = 0; trial < 10; ++trial) {
      const GroupPoint p = random_point(a, gen);
      CHECK(sub_laplacian(squared_horizontal_norm_field(), a, p) ==
            doctest::Approx(2.0 * a.m).epsilon(1e-10));
      // L c_v = (1/2) sum over the orthonormal frame of ||J_eps x||^2
      double expected = 0.0;
      for (const auto& jq : orthonormal_vertical_j(a, v)) {
        expected += 0.5 * (jq * p.x).squaredNorm();
      }
      CHECK(sub_laplacian(squared_vertical_norm_field(v), a, p) ==
            doctest::Approx(expected).epsilon(1e-10));
      // coordinate functions of the center are harmonic (diagonal b_ii = 0)
      for (int q = 0; q < a.m2; ++q) {
        CHECK(sub_laplacian(coordinate_t_field(q), a, p) == doctest::Approx(0.0));
      }
    }
  }
}

TEST_CASE("the Laplacian of the fourth-power gauge matches its closed form") {
  std::mt19937 gen(17);
  for (const auto& a : {make_free_step_two(3), make_heisenberg_aniso({1, 3})}) {
    const auto v = VerticalMetric::identity(a.m2);
    const ScalarField a_field = kaplan_power_field(v, 1.0);
    const auto js = orthonormal_vertical_j(a, v);
    for (int trial = 0; trial < 25; ++trial) {
      const GroupPoint p = random_point_away_from_origin(a, gen);
      double corr = 0.0;
      for (const auto& jq : js) {
        corr += p.x.squaredNorm() - (jq * p.x).squaredNorm();
      }
      const double expected =
          4.0 * (a.homogeneous_dimension() + 2.0) * p.x.squaredNorm() - 8.0 * corr;
      CHECK(sub_laplacian(a_field, a, p) == doctest::Approx(expected).epsilon(1e-7));
    }
  }
}

TEST_CASE("Kaplan quasinorm values") {
  const auto a = make_heisenberg_aniso({1.0});
  const auto v = VerticalMetric::identity(1);
  const ScalarField n_field = kaplan_field(a, v);

  GroupPoint axis;
  axis.x = Eigen::Vector2d(1.5, 0.0);
  axis.t = Eigen::VectorXd::Zero(1);
  CHECK(n_field.value(axis) == doctest::Approx(1.5));

  GroupPoint center;
  center.x = Eigen::Vector2d::Zero();
  center.t = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(n_field.value(center) == doctest::Approx(2.0));

  CHECK_THROWS_AS(n_field.value(GroupPoint::origin(a)), std::domain_error);
}

TEST_CASE("the fundamental-solution candidate is harmonic on H-type data") {
  std::mt19937 gen(19);
  for (int n : {1, 2, 3}) {
    const auto a = make_heisenberg_aniso(std::vector<double>(n, 1.0));
    const auto v = VerticalMetric::identity(1);
    const ScalarField u_field = kaplan_u_field(a, v);
    const ScalarField n_field = kaplan_field(a, v);
    for (int trial = 0; trial < 50; ++trial) {
      const GroupPoint p = random_point_away_from_origin(a, gen);
      const double n_val = n_field.value(p);
      if (n_val < 0.1) continue;
      const double lap = sub_laplacian(u_field, a, p);
      CHECK(std::abs(lap) * std::pow(n_val, a.homogeneous_dimension()) <= 1e-7);
    }
  }
}

TEST_CASE("infinity-Laplacian composition") {
  SUBCASE("flat reduction: a function of x alone") {
    const auto a = make_heisenberg_aniso({1, 1});
    std::mt19937 gen(23);
    for (int trial = 0; trial < 10; ++trial) {
      const GroupPoint p = random_point(a, gen);
      // For f = ||x||^2 the chain gives <grad(4b), 2x> / 2 = 8 ||x||^2.
      CHECK(infinity_laplacian(squared_horizontal_norm_field(), a, p) ==
            doctest::Approx(8.0 * p.x.squaredNorm()).epsilon(1e-10));
    }
  }
  SUBCASE("H-type quasinorm is infinity-harmonic") {
    const auto a = make_heisenberg_aniso({1.0});
    const auto v = VerticalMetric::identity(1);
    const ScalarField n_field = kaplan_field(a, v);
    std::mt19937 gen(29);
    for (int trial = 0; trial < 30; ++trial) {
      const GroupPoint p = random_point_away_from_origin(a, gen);
      CHECK(std::abs(infinity_laplacian(n_field, a, p)) <= 1e-9);
    }
  }
  SUBCASE("logarithm rule") {
    const auto a = make_heisenberg_aniso({1, 1});
    const auto v = VerticalMetric::identity(1);
    const ScalarField n_field = kaplan_field(a, v);
    ScalarField log_n = ScalarField::finite_difference(
        [&](const GroupPoint& g) { return std::log(n_field.value(g)); });
    std::mt19937 gen(31);
    for (int trial = 0; trial < 10; ++trial) {
      const GroupPoint p = random_point_away_from_origin(a, gen);
      const double n_val = n_field.value(p);
      const double lhs = infinity_laplacian(log_n, a, p);
      const double rhs = infinity_laplacian(n_field, a, p) / std::pow(n_val, 3) -
                         std::pow(norm_sq_horizontal_gradient(n_field, a, p), 2) /
                             std::pow(n_val, 4);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
    }
  }
}

TEST_CASE("eikonal defect closed form") {
  SUBCASE("vanishes identically on H-type data") {
    const auto a = make_heisenberg_aniso({1, 1});
    const auto v = VerticalMetric::identity(1);
    std::mt19937 gen(37);
    for (int trial = 0; trial < 20; ++trial) {
      CHECK(std::abs(eikonal_defect(a, v, random_point_away_from_origin(a, gen))) <= 1e-10);
    }
  }
  SUBCASE("explicit values on the weighted Heisenberg algebra") {
    const auto a = make_heisenberg_aniso({1, 2});
    const auto v = VerticalMetric::identity(1);
    GroupPoint p;
    p.x = Eigen::VectorXd::Zero(4);
    p.x[0] = 1.0;
    p.t = Eigen::VectorXd::Ones(1);
    CHECK(eikonal_defect(a, v, p) == doctest::Approx(0.0).epsilon(1e-12));
    GroupPoint q;
    q.x = Eigen::VectorXd::Zero(4);
    q.x[2] = 1.0;
    q.t = Eigen::VectorXd::Ones(1);
    CHECK(eikonal_defect(a, v, q) == doctest::Approx(-48.0 / std::pow(17.0, 1.5)));
  }
  SUBCASE("zero-homogeneity and the jet route") {
    const auto a = make_heisenberg_aniso({1, 2});
    const auto v = VerticalMetric::identity(1);
    const ScalarField n_field = kaplan_field(a, v);
    std::mt19937 gen(41);
    for (int trial = 0; trial < 15; ++trial) {
      const GroupPoint p = random_point_away_from_origin(a, gen);
      const double base = eikonal_defect(a, v, p);
      CHECK(eikonal_defect(a, v, dilate(p, 2.7)) == doctest::Approx(base).epsilon(1e-9));
      const double via_jets = p.x.squaredNorm() / std::pow(n_field.value(p), 2) -
                              norm_sq_horizontal_gradient(n_field, a, p);
      CHECK(base == doctest::Approx(via_jets).epsilon(1e-9));
    }
  }
}

TEST_CASE("harmonic defect closed form vs the jet route") {
  std::mt19937 gen(43);
  const auto a = make_free_step_two(3);
  const auto v = VerticalMetric::identity(a.m2);
  const ScalarField n_field = kaplan_field(a, v);
  const int q_hom = a.homogeneous_dimension();
  for (int trial = 0; trial < 25; ++trial) {
    const GroupPoint p = random_point_away_from_origin(a, gen);
    const double n_val = n_field.value(p);
    const double closed = harmonic_defect(a, v, p);
    const double via_jets = n_val * sub_laplacian(n_field, a, p) -
                            (q_hom - 1.0) * norm_sq_horizontal_gradient(n_field, a, p);
    CHECK(closed == doctest::Approx(via_jets).epsilon(1e-7));
    CHECK(harmonic_defect(a, v, dilate(p, 1.9)) == doctest::Approx(closed).epsilon(1e-9));
    CHECK(scaled_harmonic_defect(a, v, p) ==
          doctest::Approx((2.0 - q_hom) * closed).epsilon(1e-12));
    // the scaled form equals N^Q L(N^{2-Q}) assembled from jets
    const ScalarField u_field = kaplan_u_field(a, v);
    CHECK(scaled_harmonic_defect(a, v, p) ==
          doctest::Approx(std::pow(n_val, q_hom) * sub_laplacian(u_field, a, p))
              .epsilon(1e-7));
  }
}

TEST_CASE("defect sampling rejects the origin") {
  const auto a = make_heisenberg_aniso({1, 2});
  const auto v = VerticalMetric::identity(1);
  CHECK_THROWS_AS(eikonal_defect(a, v, GroupPoint::origin(a)), std::domain_error);
  CHECK_THROWS_AS(harmonic_defect(a, v, GroupPoint::origin(a)), std::domain_error);
}

TEST_CASE("sup_defect vanishes on H-type groups") {
  const auto cfg = fast_config();
  for (int n : {1, 2}) {
    const auto a = make_heisenberg_aniso(std::vector<double>(n, 1.0));
    const auto v = VerticalMetric::identity(1);
    CHECK(sup_defect(a, v, DefectKind::eikonal, cfg).sup <= 1e-8);
    CHECK(sup_defect(a, v, DefectKind::harmonic, cfg).sup <= 1e-8);
    CHECK(sup_defect(a, v, DefectKind::scaled_harmonic, cfg).sup <= 1e-8);
  }
}

TEST_CASE("sup_defect witness attains the reported supremum") {
  const auto cfg = fast_config();
  const auto a = make_heisenberg_aniso({1, 2});
  const auto v = VerticalMetric::identity(1);
  for (DefectKind kind : {DefectKind::eikonal, DefectKind::harmonic}) {
    const auto res = sup_defect(a, v, kind, cfg);
    const double at_witness = kind == DefectKind::eikonal
                                  ? eikonal_defect(a, v, res.witness)
                                  : harmonic_defect(a, v, res.witness);
    CHECK(std::abs(at_witness) == doctest::Approx(res.sup).epsilon(1e-8));
    CHECK(res.witness_interior);
  }
}

TEST_CASE("eikonal supremum sandwich at a fixed metric") {
  const auto cfg = fast_config();
  const auto a = make_heisenberg_aniso({1, 2});
  const double lambda0 = optimal_lambda_heis({1, 2});
  const VerticalMetric v{Eigen::MatrixXd::Constant(1, 1, lambda0 * lambda0)};
  const double dev = deviation_at_metric(a, v, cfg).value;
  const double sup = sup_defect(a, v, DefectKind::eikonal, cfg).sup;
  CHECK(sup >= dev * 2.0 / (3.0 * std::sqrt(3.0)) - 1e-6);
  CHECK(sup <= std::sqrt(double(a.m)) * dev + 1e-6);
}

TEST_CASE("finite differences contract under step halving") {
  const auto a = make_g_eps(2, 1.0);
  const auto v = VerticalMetric::identity(2);
  const ScalarField n_field = kaplan_field(a, v);
  std::mt19937 gen(47);
  auto value = [&](const GroupPoint& g) { return n_field.value(g); };
  for (int trial = 0; trial < 10; ++trial) {
    const GroupPoint p = random_point_away_from_origin(a, gen);
    const Jet2 coarse = finite_difference_jet(value, p, 1e-4);
    const Jet2 fine = finite_difference_jet(value, p, 5e-5);
    CHECK((coarse.grad - fine.grad).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((coarse.hess - fine.hess).cwiseAbs().maxCoeff() <= 1e-6);
  }
}
