#include "carnot/algebra.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace carnot {

GroupPoint GroupPoint::origin(const StepTwoAlgebra& a) {
  return GroupPoint{Eigen::VectorXd::Zero(a.m), Eigen::VectorXd::Zero(a.m2)};
}

ValidationReport validate(const StepTwoAlgebra& a) {
  ValidationReport report;
  auto fail = [&report](const std::string& msg) { report.violations.push_back(msg); };

  if (a.m < 2) fail("m = " + std::to_string(a.m) + " < 2");
  if (a.m2 < 1) fail("m2 = " + std::to_string(a.m2) + " < 1");
  const long max_m2 = static_cast<long>(a.m) * (a.m - 1) / 2;
  if (a.m >= 2 && a.m2 > max_m2) {
    fail("m2 = " + std::to_string(a.m2) + " exceeds m(m-1)/2 = " + std::to_string(max_m2));
  }
  if (static_cast<int>(a.B.size()) != a.m2) {
    fail("expected " + std::to_string(a.m2) + " structure matrices, got " +
         std::to_string(a.B.size()));
    return report;
  }
  for (int q = 0; q < a.m2; ++q) {
    if (a.B[q].rows() != a.m || a.B[q].cols() != a.m) {
      fail("B^" + std::to_string(q + 1) + " is not " + std::to_string(a.m) + "x" +
           std::to_string(a.m));
      return report;
    }
    if (!a.B[q].allFinite()) fail("B^" + std::to_string(q + 1) + " has non-finite entries");
  }

  // Skew-symmetry is exact as stored: no tolerance.
  for (int q = 0; q < a.m2; ++q) {
    for (int i = 0; i < a.m; ++i) {
      for (int j = i; j < a.m; ++j) {
        if (a.B[q](i, j) != -a.B[q](j, i)) {
          std::ostringstream os;
          os << "not skew-symmetric at (q=" << q + 1 << ",i=" << i + 1 << ",j=" << j + 1 << ")";
          fail(os.str());
        }
      }
    }
  }

  // Bracket-generating condition: the m2 x (m(m-1)/2) matrix of upper
  // triangular coefficients must have rank m2.
  if (report.ok() && a.m >= 2 && a.m2 >= 1) {
    Eigen::MatrixXd coeffs(a.m2, max_m2);
    for (int q = 0; q < a.m2; ++q) {
      int col = 0;
      for (int i = 0; i < a.m; ++i)
        for (int j = i + 1; j < a.m; ++j) coeffs(q, col++) = a.B[q](i, j);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(coeffs);
    double scale = coeffs.cwiseAbs().maxCoeff();
    lu.setThreshold(scale > 0 ? 1e-12 * scale : 1e-12);
    const int rank = static_cast<int>(lu.rank());
    if (rank < a.m2) {
      fail("rank " + std::to_string(rank) + " < m2=" + std::to_string(a.m2));
    }
  }
  return report;
}

Eigen::VectorXd bracket(const StepTwoAlgebra& a, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v) {
  if (u.size() != a.m || v.size() != a.m) {
    throw std::invalid_argument("bracket: horizontal vectors must have length m");
  }
  Eigen::VectorXd out(a.m2);
  for (int q = 0; q < a.m2; ++q) out[q] = u.dot(a.B[q] * v);
  return out;
}

GroupPoint dilate(const GroupPoint& p, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilate: scale factor must be positive");
  return GroupPoint{lambda * p.x, lambda * lambda * p.t};
}

StepTwoAlgebra make_heisenberg_aniso(const std::vector<double>& b) {
  if (b.empty()) throw std::invalid_argument("make_heisenberg_aniso: empty coefficient vector");
  for (double bj : b) {
    if (!(bj > 0.0) || !std::isfinite(bj)) {
      throw std::invalid_argument("make_heisenberg_aniso: coefficients must be positive");
    }
  }
  const int n = static_cast<int>(b.size());
  StepTwoAlgebra a;
  a.m = 2 * n;
  a.m2 = 1;
  a.B.assign(1, Eigen::MatrixXd::Zero(a.m, a.m));
  for (int j = 0; j < n; ++j) {
    a.B[0](2 * j, 2 * j + 1) = b[j];
    a.B[0](2 * j + 1, 2 * j) = -b[j];
  }
  return a;
}

int free_pair_index(int m, int i, int j) {
  if (!(0 <= i && i < j && j < m)) throw std::invalid_argument("free_pair_index: need 0 <= i < j < m");
  // pairs (0,1), (0,2), ..., (0,m-1), (1,2), ... in row-major order
  return i * m - i * (i + 1) / 2 + (j - i - 1);
}

StepTwoAlgebra make_free_step_two(int m) {
  if (m < 2) throw std::invalid_argument("make_free_step_two: rank must be at least 2");
  StepTwoAlgebra a;
  a.m = m;
  a.m2 = m * (m - 1) / 2;
  a.B.assign(a.m2, Eigen::MatrixXd::Zero(m, m));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const int q = free_pair_index(m, i, j);
      a.B[q](i, j) = 1.0;
      a.B[q](j, i) = -1.0;
    }
  }
  return a;
}

StepTwoAlgebra make_g_eps(int n, double eps) {
  if (n < 2) throw std::invalid_argument("make_g_eps: need n >= 2");
  if (eps < 0.0 || !std::isfinite(eps)) throw std::invalid_argument("make_g_eps: need eps >= 0");
  StepTwoAlgebra a;
  a.m = 2 * n;
  a.m2 = (eps == 0.0) ? 1 : 2;
  a.B.assign(a.m2, Eigen::MatrixXd::Zero(a.m, a.m));
  for (int j = 0; j < n; ++j) {
    a.B[0](2 * j, 2 * j + 1) = 1.0;
    a.B[0](2 * j + 1, 2 * j) = -1.0;
  }
  if (eps > 0.0) {
    // [X_1, X_2] = eps U; X_2 sits at index 2 in the interleaved basis.
    a.B[1](0, 2) = eps;
    a.B[1](2, 0) = -eps;
  }
  return a;
}

StepTwoAlgebra make_g_bar_eps(int n, double eps) {
  if (n < 2) throw std::invalid_argument("make_g_bar_eps: need n >= 2");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("make_g_bar_eps: need eps > 0");
  StepTwoAlgebra a;
  a.m = 2 * n;
  a.m2 = 1;
  a.B.assign(1, Eigen::MatrixXd::Zero(a.m, a.m));
  for (int j = 0; j < n; ++j) {
    a.B[0](2 * j, 2 * j + 1) = 1.0;
    a.B[0](2 * j + 1, 2 * j) = -1.0;
  }
  a.B[0](0, 2) = eps;
  a.B[0](2, 0) = -eps;
  return a;
}

}  // namespace carnot
