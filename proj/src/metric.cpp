#include "carnot/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace carnot {

namespace {

// In-place lower Cholesky; returns false when a pivot drops below threshold.
bool cholesky_impl(const Eigen::MatrixXd& g, double pivot_threshold, Eigen::MatrixXd& lower) {
  const int n = static_cast<int>(g.rows());
  lower = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = g(j, j);
    for (int k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > pivot_threshold)) return false;
    lower(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / lower(j, j);
    }
  }
  return true;
}

double spd_pivot_threshold(const Eigen::MatrixXd& g) {
  const int n = static_cast<int>(g.rows());
  return 1e-12 * g.trace() / std::max(1, n);
}

}  // namespace

ValidationReport validate(const VerticalMetric& v) {
  ValidationReport report;
  const Eigen::MatrixXd& g = v.G;
  if (g.rows() != g.cols() || g.rows() == 0) {
    report.violations.push_back("Gram matrix must be square and nonempty");
    return report;
  }
  if (!g.allFinite()) {
    report.violations.push_back("Gram matrix has non-finite entries");
    return report;
  }
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    report.violations.push_back("Gram matrix is not symmetric within 1e-12");
  }
  Eigen::MatrixXd lower;
  if (!cholesky_impl(0.5 * (g + g.transpose()), spd_pivot_threshold(g), lower)) {
    report.violations.push_back("Gram matrix is not positive definite");
  }
  return report;
}

JMatrix j_matrix(const StepTwoAlgebra& a, const VerticalMetric& v, const Eigen::VectorXd& t) {
  if (t.size() != a.m2 || v.G.rows() != a.m2) {
    throw std::invalid_argument("j_matrix: vertical dimension mismatch");
  }
  const Eigen::VectorXd gt = v.G * t;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.m, a.m);
  for (int q = 0; q < a.m2; ++q) m -= gt[q] * a.B[q];
  return JMatrix{std::move(m)};
}

double hs_norm(const Eigen::MatrixXd& m) { return m.norm(); }

double op_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()[0];
}

double h_type_defect(const StepTwoAlgebra& a, const VerticalMetric& v, const Eigen::VectorXd& t) {
  const Eigen::MatrixXd j = j_matrix(a, v, t).M;
  const double tsq = v.norm_sq(t);
  Eigen::MatrixXd m = j * j;
  m.diagonal().array() += tsq;
  return m.norm();
}

Eigen::MatrixXd cholesky_lower(const VerticalMetric& v) {
  Eigen::MatrixXd lower;
  if (!cholesky_impl(0.5 * (v.G + v.G.transpose()), spd_pivot_threshold(v.G), lower)) {
    throw std::invalid_argument("vertical metric is not positive definite");
  }
  return lower;
}

std::vector<Eigen::MatrixXd> orthonormal_vertical_j(const StepTwoAlgebra& a,
                                                    const VerticalMetric& v) {
  const Eigen::MatrixXd lower = cholesky_lower(v);
  std::vector<Eigen::MatrixXd> js(a.m2);
  for (int q = 0; q < a.m2; ++q) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.m, a.m);
    for (int r = 0; r < a.m2; ++r) {
      if (lower(r, q) != 0.0) m -= lower(r, q) * a.B[r];
    }
    js[q] = std::move(m);
  }
  return js;
}

}  // namespace carnot
