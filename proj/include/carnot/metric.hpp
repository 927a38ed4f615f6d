#pragma once

#include <Eigen/Dense>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

/// Inner product on the vertical layer, stored as the Gram matrix of the
/// standard vertical basis: ||t||_v^2 = t^T G t.
struct VerticalMetric {
  Eigen::MatrixXd G;

  static VerticalMetric identity(int m2) {
    return VerticalMetric{Eigen::MatrixXd::Identity(m2, m2)};
  }

  double norm_sq(const Eigen::VectorXd& t) const { return t.dot(G * t); }
};

/// Symmetry within 1e-12 (relative) and positive definiteness, detected by a
/// Cholesky factorization with pivot threshold 1e-12 * trace(G) / m2.
ValidationReport validate(const VerticalMetric& v);

/// Skew matrix of the J operator at a vertical vector.
struct JMatrix {
  Eigen::MatrixXd M;
};

/// The matrix M of J_t in the stored horizontal basis, characterized by
/// <M u, v> = bracket(u, v)^T G t. Explicitly M = -sum_q (G t)_q B^q.
JMatrix j_matrix(const StepTwoAlgebra& a, const VerticalMetric& v, const Eigen::VectorXd& t);

double hs_norm(const Eigen::MatrixXd& m);
double op_norm(const Eigen::MatrixXd& m);

/// || J_t^2 + ||t||_v^2 Id ||_HS, the pointwise failure of the H-type
/// identity in the direction t. Vanishes identically iff the group with
/// this vertical metric is H-type; 2-homogeneous in t.
double h_type_defect(const StepTwoAlgebra& a, const VerticalMetric& v, const Eigen::VectorXd& t);

/// Lower-triangular L with G = L L^T. Throws std::invalid_argument when a
/// pivot falls below 1e-12 * trace(G) / m2.
Eigen::MatrixXd cholesky_lower(const VerticalMetric& v);

/// J matrices of a g_v-orthonormal vertical basis (the columns of L^{-T}
/// for the Cholesky factor L). Entry q equals -sum_r L(r,q) B^r.
std::vector<Eigen::MatrixXd> orthonormal_vertical_j(const StepTwoAlgebra& a,
                                                    const VerticalMetric& v);

}  // namespace carnot
