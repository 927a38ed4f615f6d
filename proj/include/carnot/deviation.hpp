#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/metric.hpp"

namespace carnot {

struct SolverConfig {
  int restarts = 12;
  int max_iters = 400;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  int grid_density = 4096;
  int threads = 1;

  /// Throws std::invalid_argument when a field is out of range
  /// (restarts >= 1, max_iters >= 1, tol in (0, 1e-2], grid_density >= 1).
  void check() const;
};

/// Result of a deviation computation. `value` is the deviation estimate,
/// `witness_t` a g_v-unit vertical direction attaining it, `metric` the
/// vertical metric used (the argmin candidate for the minimax problem,
/// or the fixed metric that was supplied).
struct DeviationReport {
  double value = 0.0;
  Eigen::VectorXd witness_t;
  VerticalMetric metric;
  bool inner_converged = false;
  bool outer_converged = false;
  long evaluations = 0;
};

/// sup of ||J_t^2 + Id||_HS / sqrt(m) over the g_v-unit sphere of vertical
/// directions. For m2 <= 3 the sphere is swept by a deterministic grid and
/// the best candidates are polished by projected gradient ascent; larger
/// vertical layers use seeded multistart ascent.
DeviationReport deviation_at_metric(const StepTwoAlgebra& a, const VerticalMetric& v,
                                    const SolverConfig& cfg);

/// The H-type deviation: the infimum of deviation_at_metric over all
/// vertical metrics, computed by derivative-free descent over a
/// log-Cholesky parametrization of the Gram matrix. The returned value is
/// an upper estimate (every explored metric is feasible); the identity
/// metric is always among the starting points.
DeviationReport deviation(const StepTwoAlgebra& a, const SolverConfig& cfg);

/// Optimal vertical scale for an anisotropic Heisenberg algebra with
/// coefficient vector b: ||b||_2 / ||b||_4^2, where ||b||_p denotes the
/// p-mean ( (1/n) sum b_j^p )^{1/p}.
double optimal_lambda_heis(const std::vector<double>& b);

/// Inner objective of the two-parameter deviation problem for the rank-2n
/// family with bracket pattern [X_j,Y_j] = T, [X_1,X_2] = eps U, with the
/// metric encoded in polar data (p, q, alpha) and the vertical direction by
/// the angle theta. The eps factor is absorbed into q.
double eval_dgen(int n, double p, double q, double alpha, double theta);

/// Least-squares common symmetric matrix S with J_t^2 = -||t||_v^2 S over a
/// fixed probe set of g_v-unit directions, plus the worst probe residual.
/// A residual near zero certifies a generalized H-type structure, in which
/// case the deviation at this metric equals ||Id - S||_HS / sqrt(m).
std::pair<Eigen::MatrixXd, double> generalized_s_matrix(const StepTwoAlgebra& a,
                                                        const VerticalMetric& v);

}  // namespace carnot
