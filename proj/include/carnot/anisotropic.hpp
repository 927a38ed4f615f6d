#pragma once

#include <Eigen/Dense>

#include "carnot/algebra.hpp"
#include "carnot/deviation.hpp"

namespace carnot {

/// The anisotropic Heisenberg family treated by the closed-form
/// fundamental-solution machinery. The group of index n is the rank-2n
/// Heisenberg algebra with brackets [X_1,Y_1] = T, [X_j,Y_j] = 2T (j >= 2),
/// identified with C^n x R through z_j = x_j + i y_j.
namespace aniso {

/// Point (z_1, z', t) with z' = (z_2, ..., z_n) stored as interleaved real
/// pairs (x_j, y_j).
struct AnisoPoint {
  double x1 = 0.0;
  double y1 = 0.0;
  Eigen::VectorXd zprime;  // length 2(n-1)
  double t = 0.0;
};

/// The scalar triple A = |z_1|^2/4, B = A + ||z'||^2/2, C = sqrt(B^2+t^2)
/// together with the horizontal frame vectors u = grad_0 A, v = grad_0 B,
/// w = grad_0 t written in real coordinates (x_1, y_1, x_2, y_2, ...).
struct AbcFrame {
  double A = 0.0, B = 0.0, C = 0.0;
  Eigen::VectorXd uvec, vvec, wvec;
};

/// The underlying algebra (coefficients (1, 2, ..., 2)).
StepTwoAlgebra group_algebra(int n);

GroupPoint to_group_point(const AnisoPoint& p);
AnisoPoint from_group_point(int n, const GroupPoint& p);

AbcFrame abc_frame(int n, const AnisoPoint& p);

/// Fundamental solution (B+C)^{1/2} / (C (A+C)^{n-1/2}), up to the constant
/// multiple fixed by the normalization of the homogeneous norm below.
double fundamental_u(int n, const AnisoPoint& p);

/// Homogeneous norm 2^{1/2+1/4n} C^{1/2n} (A+C)^{1/2-1/4n} / (B+C)^{1/4n};
/// equals u^{1/(2-Q)} up to that fixed constant, Q = 2n+2.
double homogeneous_n(int n, const AnisoPoint& p);

struct Pqr {
  double P = 0.0, Q = 0.0, R = 0.0;
};

/// P = (C-2B)/(2C^2), Q = (C+2B)t/(2C^2(C+B)), R = 1/(C+A).
Pqr pqr(int n, const AnisoPoint& p);

/// grad_0 u / u assembled in real coordinates.
Eigen::VectorXd grad_log_u(int n, const AnisoPoint& p);

/// ||grad_0 u||^2 / u^2 through its closed form.
double grad_log_u_norm_sq(int n, const AnisoPoint& p);

/// L_infty(log u_s) for the one-parameter family u_s = (B+C)^{1/2}/(C(A+C)^s);
/// s = n - 1/2 recovers the fundamental solution. Exactly cubic in s.
double infinity_laplacian_log_u(int n, const AnisoPoint& p, double s);
double infinity_laplacian_log_u(int n, const AnisoPoint& p);

/// Residuals of the divergence/gradient closed forms. grad_* and div_*
/// compare closed forms against finite differences on the group;
/// harmonicity and scaled_harmonicity are closed-form identities.
struct DivergenceReport {
  double grad_p = 0.0, grad_q = 0.0, grad_r = 0.0;
  double div_u = 0.0, div_v = 0.0, div_w = 0.0;
  double harmonicity = 0.0;         // div_0(grad u / u) + ||grad u||^2/u^2
  double scaled_harmonicity = 0.0;  // N^Q L(u)
  double max_fd_residual() const;
};

DivergenceReport divergence_identities(int n, const AnisoPoint& p);

/// |div_0(grad u / u) + ||grad u||^2/u^2| from the closed forms alone.
double harmonicity_residual(int n, const AnisoPoint& p);
/// N^Q |L u| from the closed forms alone.
double scaled_harmonicity_residual(int n, const AnisoPoint& p);

/// Coefficients of grad_0(||grad_0 u||^2/u^2) = E_v v + E_w t w + E_u u.
struct GradNormSqDecomposition {
  double Ev = 0.0, Ew = 0.0, Eu = 0.0;
};

GradNormSqDecomposition grad_normsq_decomposition(int n, const AnisoPoint& p);

/// N * L_infty(N), assembled from L_infty(log u) and ||grad u||^2/u^2.
double infinity_laplacian_n(int n, const AnisoPoint& p);

/// Extracts the cubic coefficient of s -> L_infty(log u_s) by least-squares
/// fit over sample exponents and compares it with the closed form
/// F3 = (A B^2 + 2 B^2 C - A C^2) / (C^3 (C+A)^2), along with the identity
/// G2^2 - 2 F3 = 2 A t^2 / (C^3 (C+A)^2) for G2 = 2B/(C(C+A)).
struct F3FitResult {
  double f3_fit = 0.0;
  double f3_closed = 0.0;
  double fit_residual = 0.0;
  double identity_residual = 0.0;
};

F3FitResult f3_fit(int n, const AnisoPoint& p, int exponent_samples = 6);

/// Scan of sup |N L_infty N| over the t = 0 plane intersected with the unit
/// N-sphere. The defect there depends only on (|z_1|, ||z'||), so directions
/// are parametrized by one angle; each direction is brought onto the sphere
/// by radial bisection and the best angle is polished.
struct ConjectureScanResult {
  double sup = 0.0;
  AnisoPoint witness;
  double delta_sq = 0.0;  // 9(n-1) / (n(16n-15)), the squared deviation
  double ratio = 0.0;     // sup / delta_sq
  long samples = 0;
};

ConjectureScanResult conjecture_scan(int n, const SolverConfig& cfg);

/// Lands the direction (cos phi, sin phi) on the unit N-sphere inside the
/// t = 0 plane by bisection in the radial scale; returns the scaled point.
AnisoPoint slice_point(int n, double phi);

}  // namespace aniso
}  // namespace carnot
