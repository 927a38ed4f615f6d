#pragma once

#include <Eigen/Dense>
#include <functional>

#include "carnot/algebra.hpp"
#include "carnot/deviation.hpp"
#include "carnot/metric.hpp"

namespace carnot {

/// Two-jet of a scalar function in exponential coordinates. Gradient and
/// Hessian are indexed by the stacked coordinate vector (x_1..x_m, t_1..t_m2).
struct Jet2 {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// Central-difference two-jet with one Richardson extrapolation level.
/// Step size is h_scale * (1 + ||p||).
Jet2 finite_difference_jet(const std::function<double(const GroupPoint&)>& f, const GroupPoint& p,
                           double h_scale = 1e-4);

/// A scalar function on the group exposing a two-jet at every point, either
/// through exact closed-form jets or through finite differences of a plain
/// evaluator.
class ScalarField {
 public:
  enum class Mode { closed_form, finite_difference };

  static ScalarField closed_form(std::function<Jet2(const GroupPoint&)> jet);
  static ScalarField finite_difference(std::function<double(const GroupPoint&)> value,
                                       double declared_tol = 1e-6);

  Jet2 jet(const GroupPoint& p) const;
  double value(const GroupPoint& p) const;
  Mode mode() const { return mode_; }
  double declared_tolerance() const { return tol_; }

 private:
  ScalarField() = default;
  Mode mode_ = Mode::closed_form;
  double tol_ = 0.0;
  std::function<Jet2(const GroupPoint&)> jet_;
  std::function<double(const GroupPoint&)> value_;
};

/// Coefficients of the left-invariant horizontal frame at p, one column per
/// field: X_i = d/dx_i + (1/2) sum_q beta_i^q(x) d/dt_q with
/// beta_i^q(x) = -(B^q x)_i.
Eigen::MatrixXd horizontal_frame(const StepTwoAlgebra& a, const GroupPoint& p);

Eigen::VectorXd horizontal_gradient(const ScalarField& f, const StepTwoAlgebra& a,
                                    const GroupPoint& p);
double norm_sq_horizontal_gradient(const ScalarField& f, const StepTwoAlgebra& a,
                                   const GroupPoint& p);

/// Matrix of second horizontal derivatives X_i X_j f (not symmetrized).
Eigen::MatrixXd horizontal_second(const ScalarField& f, const StepTwoAlgebra& a,
                                  const GroupPoint& p);

double sub_laplacian(const ScalarField& f, const StepTwoAlgebra& a, const GroupPoint& p);

/// (1/2) < grad_0 ||grad_0 f||^2 , grad_0 f >, assembled from the two-jet.
double infinity_laplacian(const ScalarField& f, const StepTwoAlgebra& a, const GroupPoint& p);

/// ||x||^2 as a closed-form field.
ScalarField squared_horizontal_norm_field();
/// ||t||_v^2 as a closed-form field.
ScalarField squared_vertical_norm_field(const VerticalMetric& v);
/// Coordinate functions as closed-form fields.
ScalarField coordinate_x_field(int i);
ScalarField coordinate_t_field(int q);

/// (||x||^4 + 16 ||t||_v^2)^s with exact jets; singular at the origin.
ScalarField kaplan_power_field(const VerticalMetric& v, double s);
/// Kaplan quasinorm N_v (the power 1/4).
ScalarField kaplan_field(const StepTwoAlgebra& a, const VerticalMetric& v);
/// N_v^{2-Q}, the fundamental-solution candidate attached to the metric.
ScalarField kaplan_u_field(const StepTwoAlgebra& a, const VerticalMetric& v);

/// ||x||^2 / N^2 - ||grad_0 N||^2, evaluated by its algebraic closed form
/// 16 <(J_t^2 + ||t||_v^2 Id) x, x> / N^6. Zero-homogeneous; vanishes
/// identically exactly when the metric is H-type.
double eikonal_defect(const StepTwoAlgebra& a, const VerticalMetric& v, const GroupPoint& p);

/// N L(N) - (Q-1) ||grad_0 N||^2 through its two-term closed form; the
/// second term runs over a g_v-orthonormal vertical basis.
double harmonic_defect(const StepTwoAlgebra& a, const VerticalMetric& v, const GroupPoint& p);

/// N^Q L(N^{2-Q}) = (2-Q) * harmonic_defect.
double scaled_harmonic_defect(const StepTwoAlgebra& a, const VerticalMetric& v,
                              const GroupPoint& p);

struct DefectSample {
  GroupPoint point;
  double eikonal = 0.0;
  double harmonic = 0.0;
  double scaled_harmonic = 0.0;
};

DefectSample defect_sample(const StepTwoAlgebra& a, const VerticalMetric& v, const GroupPoint& p);

enum class DefectKind { eikonal, harmonic, scaled_harmonic };

struct SupDefectResult {
  double sup = 0.0;
  GroupPoint witness;
  long samples = 0;
  long evaluations = 0;
  bool witness_interior = true;
  double polish_gain = 0.0;
};

/// Estimates sup |defect| over the group minus the origin. All three
/// defects are zero-homogeneous, so the search runs over the compact slice
/// ||t||_v = 1, ||x|| <= 4. For each sampled vertical direction the optimal
/// horizontal direction is an extreme eigenvector of the relevant quadratic
/// form, and the radial profile is swept on a grid (the stationary radii
/// 2^{3/4} and L0 = 2^{3/4} (m+2)^{1/4} / (Q+2+m2)^{1/4} included) and then
/// polished.
SupDefectResult sup_defect(const StepTwoAlgebra& a, const VerticalMetric& v, DefectKind kind,
                           const SolverConfig& cfg);

}  // namespace carnot
