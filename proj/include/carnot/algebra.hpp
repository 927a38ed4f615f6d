#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace carnot {

/// A step-two stratified Lie algebra presented by its structure constants.
///
/// The horizontal layer has dimension `m`, the vertical layer dimension `m2`.
/// `B[q](i,j)` holds the coefficient b_{ij}^q of the bracket
/// [X_i, X_j] = sum_q b_{ij}^q T_q in the stored basis; each B[q] is
/// skew-symmetric. The stored horizontal basis is orthonormal by convention,
/// so the horizontal metric never appears explicitly.
struct StepTwoAlgebra {
  int m = 0;
  int m2 = 0;
  std::vector<Eigen::MatrixXd> B;

  /// Q = m + 2*m2, the homogeneous dimension of the associated group.
  int homogeneous_dimension() const { return m + 2 * m2; }
};

/// A group element in exponential coordinates (x in R^m, t in R^m2).
struct GroupPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd t;

  static GroupPoint origin(const StepTwoAlgebra& a);
};

/// Outcome of structural validation: empty means every invariant holds.
struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks dimensions, skew-symmetry of every B^q, and the bracket-generating
/// condition (the stacked coefficient matrix has full vertical rank).
/// Violations are reported as data, never thrown.
ValidationReport validate(const StepTwoAlgebra& a);

/// Vertical component of [u, v]; entry q equals u^T B^q v.
Eigen::VectorXd bracket(const StepTwoAlgebra& a, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v);

/// Anisotropic dilation (x, t) -> (lambda x, lambda^2 t), lambda > 0.
GroupPoint dilate(const GroupPoint& p, double lambda);

/// Anisotropic Heisenberg algebra with [X_j, Y_j] = b_j T, basis order
/// X_1, Y_1, ..., X_n, Y_n. All b_j must be positive.
StepTwoAlgebra make_heisenberg_aniso(const std::vector<double>& b);

/// Free step-two algebra of rank m: vertical basis T_{ij} indexed by pairs
/// i < j in lexicographic order, with [X_i, X_j] = T_{ij}.
StepTwoAlgebra make_free_step_two(int m);

/// Rank-2n algebra with [X_j, Y_j] = T and [X_1, X_2] = eps * U.
/// For eps = 0 the center is one-dimensional (the U direction is dropped).
StepTwoAlgebra make_g_eps(int n, double eps);

/// Rank-2n algebra with one-dimensional center, [X_j, Y_j] = T and
/// [X_1, X_2] = eps * T, the stored basis orthonormal. Requires eps > 0.
StepTwoAlgebra make_g_bar_eps(int n, double eps);

/// Position of the pair (i, j), i < j (0-based), in the lexicographic
/// enumeration used by make_free_step_two.
int free_pair_index(int m, int i, int j);

}  // namespace carnot
