#include "carnot/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nelder_mead.hpp"
#include "parallel.hpp"
#include "sphere_grid.hpp"

namespace carnot {

namespace {

Eigen::VectorXd stack_point(const GroupPoint& p) {
  Eigen::VectorXd z(p.x.size() + p.t.size());
  z << p.x, p.t;
  return z;
}

GroupPoint unstack_point(const Eigen::VectorXd& z, long m, long m2) {
  return GroupPoint{z.head(m), z.tail(m2)};
}

// Identity-metric homogeneous gauge, used only to reject near-origin input.
double reference_gauge(const GroupPoint& p) {
  const double b = p.x.squaredNorm();
  return std::pow(b * b + 16.0 * p.t.squaredNorm(), 0.25);
}

void require_away_from_origin(const StepTwoAlgebra& a, const VerticalMetric& v,
                              const GroupPoint& p) {
  if (p.x.size() != a.m || p.t.size() != a.m2) {
    throw std::invalid_argument("point dimension mismatch");
  }
  const double b = p.x.squaredNorm();
  const double n4 = b * b + 16.0 * v.norm_sq(p.t);
  const double gauge = reference_gauge(p);
  if (!(std::pow(n4, 0.25) >= 1e-3 * gauge) || gauge == 0.0) {
    throw std::domain_error("defect evaluation too close to the origin");
  }
}

}  // namespace

Jet2 finite_difference_jet(const std::function<double(const GroupPoint&)>& f, const GroupPoint& p,
                           double h_scale) {
  const long m = p.x.size(), m2 = p.t.size();
  const long d = m + m2;
  const Eigen::VectorXd z0 = stack_point(p);
  const double h = h_scale * (1.0 + z0.norm());

  auto eval = [&](const Eigen::VectorXd& z) { return f(unstack_point(z, m, m2)); };

  Jet2 jet;
  jet.value = eval(z0);
  jet.grad.resize(d);
  jet.hess.resize(d, d);

  auto grad_at = [&](long i, double step) {
    Eigen::VectorXd zp = z0, zm = z0;
    zp[i] += step;
    zm[i] -= step;
    return (eval(zp) - eval(zm)) / (2.0 * step);
  };
  auto hess_diag_at = [&](long i, double step) {
    Eigen::VectorXd zp = z0, zm = z0;
    zp[i] += step;
    zm[i] -= step;
    return (eval(zp) - 2.0 * jet.value + eval(zm)) / (step * step);
  };
  auto hess_off_at = [&](long i, long j, double step) {
    Eigen::VectorXd zpp = z0, zpm = z0, zmp = z0, zmm = z0;
    zpp[i] += step;
    zpp[j] += step;
    zpm[i] += step;
    zpm[j] -= step;
    zmp[i] -= step;
    zmp[j] += step;
    zmm[i] -= step;
    zmm[j] -= step;
    return (eval(zpp) - eval(zpm) - eval(zmp) + eval(zmm)) / (4.0 * step * step);
  };

  // One Richardson level: (4 D(h/2) - D(h)) / 3 removes the O(h^2) term.
  for (long i = 0; i < d; ++i) {
    jet.grad[i] = (4.0 * grad_at(i, h / 2) - grad_at(i, h)) / 3.0;
    jet.hess(i, i) = (4.0 * hess_diag_at(i, h / 2) - hess_diag_at(i, h)) / 3.0;
  }
  for (long i = 0; i < d; ++i) {
    for (long j = i + 1; j < d; ++j) {
      const double v = (4.0 * hess_off_at(i, j, h / 2) - hess_off_at(i, j, h)) / 3.0;
      jet.hess(i, j) = v;
      jet.hess(j, i) = v;
    }
  }
  return jet;
}

ScalarField ScalarField::closed_form(std::function<Jet2(const GroupPoint&)> jet) {
  ScalarField f;
  f.mode_ = Mode::closed_form;
  f.jet_ = std::move(jet);
  return f;
}

ScalarField ScalarField::finite_difference(std::function<double(const GroupPoint&)> value,
                                           double declared_tol) {
  ScalarField f;
  f.mode_ = Mode::finite_difference;
  f.tol_ = declared_tol;
  f.value_ = std::move(value);
  return f;
}

Jet2 ScalarField::jet(const GroupPoint& p) const {
  if (mode_ == Mode::closed_form) return jet_(p);
  return finite_difference_jet(value_, p);
}

double ScalarField::value(const GroupPoint& p) const {
  if (mode_ == Mode::closed_form) return jet_(p).value;
  return value_(p);
}

Eigen::MatrixXd horizontal_frame(const StepTwoAlgebra& a, const GroupPoint& p) {
  Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(a.m + a.m2, a.m);
  frame.topRows(a.m).setIdentity();
  for (int q = 0; q < a.m2; ++q) {
    const Eigen::VectorXd beta_q = -(a.B[q] * p.x);  // beta_i^q over i
    frame.row(a.m + q) = 0.5 * beta_q.transpose();
  }
  return frame;
}

Eigen::VectorXd horizontal_gradient(const ScalarField& f, const StepTwoAlgebra& a,
                                    const GroupPoint& p) {
  const Jet2 jet = f.jet(p);
  return horizontal_frame(a, p).transpose() * jet.grad;
}

double norm_sq_horizontal_gradient(const ScalarField& f, const StepTwoAlgebra& a,
                                   const GroupPoint& p) {
  return horizontal_gradient(f, a, p).squaredNorm();
}

Eigen::MatrixXd horizontal_second(const ScalarField& f, const StepTwoAlgebra& a,
                                  const GroupPoint& p) {
  const Jet2 jet = f.jet(p);
  const Eigen::MatrixXd frame = horizontal_frame(a, p);
  Eigen::MatrixXd second = frame.transpose() * jet.hess * frame;
  // X_i applied to the coefficients of X_j contributes (1/2) b_{ij}^q d/dt_q.
  for (int q = 0; q < a.m2; ++q) second += 0.5 * jet.grad[a.m + q] * a.B[q];
  return second;
}

double sub_laplacian(const ScalarField& f, const StepTwoAlgebra& a, const GroupPoint& p) {
  // The first-order term carries the diagonal b_{ii}^q, which vanishes for
  // skew structure constants; it is kept so that nothing is assumed.
  return horizontal_second(f, a, p).trace();
}

double infinity_laplacian(const ScalarField& f, const StepTwoAlgebra& a, const GroupPoint& p) {
  const Jet2 jet = f.jet(p);
  const Eigen::MatrixXd frame = horizontal_frame(a, p);
  const Eigen::VectorXd g = frame.transpose() * jet.grad;
  Eigen::MatrixXd second = frame.transpose() * jet.hess * frame;
  for (int q = 0; q < a.m2; ++q) second += 0.5 * jet.grad[a.m + q] * a.B[q];
  return g.dot(second * g);
}

ScalarField squared_horizontal_norm_field() {
  return ScalarField::closed_form([](const GroupPoint& p) {
    const long m = p.x.size(), d = m + p.t.size();
    Jet2 jet;
    jet.value = p.x.squaredNorm();
    jet.grad = Eigen::VectorXd::Zero(d);
    jet.grad.head(m) = 2.0 * p.x;
    jet.hess = Eigen::MatrixXd::Zero(d, d);
    jet.hess.topLeftCorner(m, m) = 2.0 * Eigen::MatrixXd::Identity(m, m);
    return jet;
  });
}

ScalarField squared_vertical_norm_field(const VerticalMetric& v) {
  const Eigen::MatrixXd g = v.G;
  return ScalarField::closed_form([g](const GroupPoint& p) {
    const long m = p.x.size(), m2 = p.t.size(), d = m + m2;
    Jet2 jet;
    jet.value = p.t.dot(g * p.t);
    jet.grad = Eigen::VectorXd::Zero(d);
    jet.grad.tail(m2) = 2.0 * g * p.t;
    jet.hess = Eigen::MatrixXd::Zero(d, d);
    jet.hess.bottomRightCorner(m2, m2) = 2.0 * g;
    return jet;
  });
}

ScalarField coordinate_x_field(int i) {
  return ScalarField::closed_form([i](const GroupPoint& p) {
    const long d = p.x.size() + p.t.size();
    Jet2 jet;
    jet.value = p.x[i];
    jet.grad = Eigen::VectorXd::Unit(d, i);
    jet.hess = Eigen::MatrixXd::Zero(d, d);
    return jet;
  });
}

ScalarField coordinate_t_field(int q) {
  return ScalarField::closed_form([q](const GroupPoint& p) {
    const long m = p.x.size();
    const long d = m + p.t.size();
    Jet2 jet;
    jet.value = p.t[q];
    jet.grad = Eigen::VectorXd::Unit(d, m + q);
    jet.hess = Eigen::MatrixXd::Zero(d, d);
    return jet;
  });
}

ScalarField kaplan_power_field(const VerticalMetric& v, double s) {
  const Eigen::MatrixXd g = v.G;
  return ScalarField::closed_form([g, s](const GroupPoint& p) {
    const long m = p.x.size(), m2 = p.t.size(), d = m + m2;
    const double b = p.x.squaredNorm();
    const double a_val = b * b + 16.0 * p.t.dot(g * p.t);
    if (!(a_val > 0.0)) throw std::domain_error("Kaplan quasinorm is singular at the origin");

    Eigen::VectorXd grad_a = Eigen::VectorXd::Zero(d);
    grad_a.head(m) = 4.0 * b * p.x;
    grad_a.tail(m2) = 32.0 * g * p.t;

    Eigen::MatrixXd hess_a = Eigen::MatrixXd::Zero(d, d);
    hess_a.topLeftCorner(m, m) =
        8.0 * p.x * p.x.transpose() + 4.0 * b * Eigen::MatrixXd::Identity(m, m);
    hess_a.bottomRightCorner(m2, m2) = 32.0 * g;

    const double as = std::pow(a_val, s);
    Jet2 jet;
    jet.value = as;
    jet.grad = s * as / a_val * grad_a;
    jet.hess = s * as / a_val * hess_a +
               s * (s - 1.0) * as / (a_val * a_val) * (grad_a * grad_a.transpose());
    return jet;
  });
}

ScalarField kaplan_field(const StepTwoAlgebra& a, const VerticalMetric& v) {
  if (v.G.rows() != a.m2) throw std::invalid_argument("kaplan_field: metric dimension mismatch");
  return kaplan_power_field(v, 0.25);
}

ScalarField kaplan_u_field(const StepTwoAlgebra& a, const VerticalMetric& v) {
  if (v.G.rows() != a.m2) throw std::invalid_argument("kaplan_u_field: metric dimension mismatch");
  return kaplan_power_field(v, 0.25 * (2.0 - a.homogeneous_dimension()));
}

double eikonal_defect(const StepTwoAlgebra& a, const VerticalMetric& v, const GroupPoint& p) {
  require_away_from_origin(a, v, p);
  const Eigen::MatrixXd j = j_matrix(a, v, p.t).M;
  const double tsq = v.norm_sq(p.t);
  const double b = p.x.squaredNorm();
  const double n4 = b * b + 16.0 * tsq;
  const Eigen::VectorXd jx = j * p.x;
  // <(J_t^2 + ||t||^2 Id) x, x> = ||t||^2 ||x||^2 - ||J_t x||^2
  return 16.0 * (tsq * b - jx.squaredNorm()) / std::pow(n4, 1.5);
}

double harmonic_defect(const StepTwoAlgebra& a, const VerticalMetric& v, const GroupPoint& p) {
  require_away_from_origin(a, v, p);
  const int q_hom = a.homogeneous_dimension();
  const double b = p.x.squaredNorm();
  const double tsq = v.norm_sq(p.t);
  const double n4 = b * b + 16.0 * tsq;

  const Eigen::MatrixXd j = j_matrix(a, v, p.t).M;
  const double quad_t = tsq * b - (j * p.x).squaredNorm();

  double quad_basis = 0.0;
  for (const Eigen::MatrixXd& jq : orthonormal_vertical_j(a, v)) {
    quad_basis += b - (jq * p.x).squaredNorm();
  }
  return 16.0 * (q_hom + 2) * quad_t / std::pow(n4, 1.5) - 2.0 * quad_basis / std::sqrt(n4);
}

double scaled_harmonic_defect(const StepTwoAlgebra& a, const VerticalMetric& v,
                              const GroupPoint& p) {
  return (2.0 - a.homogeneous_dimension()) * harmonic_defect(a, v, p);
}

DefectSample defect_sample(const StepTwoAlgebra& a, const VerticalMetric& v, const GroupPoint& p) {
  DefectSample sample;
  sample.point = p;
  sample.eikonal = eikonal_defect(a, v, p);
  sample.harmonic = harmonic_defect(a, v, p);
  sample.scaled_harmonic = (2.0 - a.homogeneous_dimension()) * sample.harmonic;
  return sample;
}

namespace {

struct SliceProblem {
  const StepTwoAlgebra& algebra;
  const VerticalMetric& metric;
  DefectKind kind;
  Eigen::MatrixXd basis_sum;  // sum_q (J_{eps_q}^2 + Id)
  double c_top;               // coefficient of the N^{-6} term
  double radius_cap = 4.0;

  SliceProblem(const StepTwoAlgebra& a, const VerticalMetric& v, DefectKind k)
      : algebra(a), metric(v), kind(k) {
    basis_sum = Eigen::MatrixXd::Identity(a.m, a.m) * static_cast<double>(a.m2);
    for (const Eigen::MatrixXd& jq : orthonormal_vertical_j(a, v)) basis_sum += jq * jq;
    c_top = (k == DefectKind::eikonal) ? 16.0 : 16.0 * (a.homogeneous_dimension() + 2);
  }

  double output_scale() const {
    return kind == DefectKind::scaled_harmonic
               ? std::abs(2.0 - static_cast<double>(algebra.homogeneous_dimension()))
               : 1.0;
  }

  // |defect| at x = r * xi maximized exactly over unit xi: the defect is a
  // quadratic form in x, so the best direction is an extreme eigenvector.
  double value_at_radius(const Eigen::MatrixXd& m_t, double r, Eigen::VectorXd* xi_out) const {
    const double r2 = r * r, n4 = r2 * r2 + 16.0;
    Eigen::MatrixXd w = (c_top * r2 / std::pow(n4, 1.5)) * m_t;
    if (kind != DefectKind::eikonal) w -= (2.0 * r2 / std::sqrt(n4)) * basis_sum;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
    const auto& vals = eig.eigenvalues();
    const int last = static_cast<int>(vals.size()) - 1;
    const int pick = std::abs(vals[0]) >= std::abs(vals[last]) ? 0 : last;
    if (xi_out) *xi_out = eig.eigenvectors().col(pick);
    return std::abs(vals[pick]);
  }

  // Sweep of the radial profile plus golden-section refinement.
  double best_over_radius(const Eigen::MatrixXd& m_t, double* r_out, Eigen::VectorXd* xi_out,
                          long* evals) const {
    const int q_hom = algebra.homogeneous_dimension();
    const double l0 = std::pow(2.0, 0.75) * std::pow(algebra.m + 2.0, 0.25) /
                      std::pow(q_hom + 2.0 + algebra.m2, 0.25);
    std::vector<double> radii = {std::pow(2.0, 0.75), l0};
    const int steps = 160;
    for (int i = 1; i <= steps; ++i) radii.push_back(radius_cap * i / steps);

    double best = -1.0, best_r = radii[0];
    for (double r : radii) {
      const double val = value_at_radius(m_t, r, nullptr);
      ++*evals;
      if (val > best) {
        best = val;
        best_r = r;
      }
    }
    double lo = std::max(1e-6, best_r - radius_cap / steps);
    double hi = std::min(radius_cap, best_r + radius_cap / steps);
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
    double f1 = value_at_radius(m_t, x1, nullptr), f2 = value_at_radius(m_t, x2, nullptr);
    *evals += 2;
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + golden * (hi - lo);
        f2 = value_at_radius(m_t, x2, nullptr);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - golden * (hi - lo);
        f1 = value_at_radius(m_t, x1, nullptr);
      }
      ++*evals;
    }
    const double r_star = 0.5 * (lo + hi);
    Eigen::VectorXd xi;
    const double val = value_at_radius(m_t, r_star, &xi);
    ++*evals;
    if (val >= best) {
      best = val;
      best_r = r_star;
    } else {
      value_at_radius(m_t, best_r, &xi);
      ++*evals;
    }
    if (r_out) *r_out = best_r;
    if (xi_out) *xi_out = xi;
    return best;
  }

  Eigen::MatrixXd m_of(const Eigen::VectorXd& t_unit) const {
    const Eigen::MatrixXd j = j_matrix(algebra, metric, t_unit).M;
    Eigen::MatrixXd m = j * j;
    m.diagonal().array() += 1.0;
    return m;
  }

  Eigen::VectorXd normalize(const Eigen::VectorXd& t) const {
    return t / std::sqrt(metric.norm_sq(t));
  }

  double value_of_direction(const Eigen::VectorXd& t, double* r_out, Eigen::VectorXd* xi_out,
                            long* evals) const {
    return best_over_radius(m_of(normalize(t)), r_out, xi_out, evals);
  }
};

}  // namespace

SupDefectResult sup_defect(const StepTwoAlgebra& a, const VerticalMetric& v, DefectKind kind,
                           const SolverConfig& cfg) {
  cfg.check();
  if (!validate(a).ok()) throw std::invalid_argument("sup_defect: invalid algebra");
  if (!validate(v).ok() || v.G.rows() != a.m2) {
    throw std::invalid_argument("sup_defect: invalid vertical metric");
  }
  const SliceProblem problem(a, v, kind);

  std::vector<Eigen::VectorXd> dirs;
  if (a.m2 == 1) {
    dirs.push_back(Eigen::VectorXd::Ones(1));
  } else if (a.m2 <= 3) {
    dirs = detail::sphere_directions(a.m2, std::max(cfg.grid_density / 4, 256), cfg.seed);
  } else {
    dirs = detail::sphere_directions(a.m2, std::max(cfg.grid_density / 4, 512), cfg.seed);
    for (int q = 0; q < a.m2; ++q) dirs.push_back(Eigen::VectorXd::Unit(a.m2, q));
  }

  SupDefectResult result;
  result.samples = static_cast<long>(dirs.size());

  std::vector<double> values(dirs.size());
  std::vector<long> chunk_evals(static_cast<std::size_t>(cfg.threads) + 1, 0);
  detail::parallel_chunks(static_cast<long>(dirs.size()), cfg.threads,
                          [&](long chunk, long begin, long end) {
                            long local = 0;
                            for (long i = begin; i < end; ++i) {
                              values[i] = problem.value_of_direction(dirs[i], nullptr, nullptr,
                                                                     &local);
                            }
                            chunk_evals[static_cast<std::size_t>(chunk)] += local;
                          });
  for (long c : chunk_evals) result.evaluations += c;

  long best_idx = 0;
  for (std::size_t i = 1; i < dirs.size(); ++i) {
    if (values[i] > values[best_idx]) best_idx = static_cast<long>(i);
  }
  double best_value = values[best_idx];
  Eigen::VectorXd best_t = problem.normalize(dirs[best_idx]);

  // Local polish over the vertical direction (the radial/horizontal part is
  // re-optimized inside the objective).
  if (a.m2 > 1) {
    long polish_evals = 0;
    auto objective = [&](const Eigen::VectorXd& t) -> double {
      if (t.norm() < 1e-9) return 0.0;
      return -problem.value_of_direction(t, nullptr, nullptr, &polish_evals);
    };
    const auto nm =
        detail::nelder_mead(objective, best_t, 0.05, std::min(cfg.max_iters, 200), 1e-13);
    if (-nm.value > best_value) {
      result.polish_gain = -nm.value - best_value;
      best_value = -nm.value;
      best_t = problem.normalize(nm.x);
    }
    result.evaluations += polish_evals;
  }

  double r_star = 0.0;
  Eigen::VectorXd xi;
  long final_evals = 0;
  problem.value_of_direction(best_t, &r_star, &xi, &final_evals);
  result.evaluations += final_evals;

  result.sup = problem.output_scale() * best_value;
  result.witness = GroupPoint{r_star * xi, best_t};
  result.witness_interior = r_star < problem.radius_cap - 1e-9;
  return result;
}

}  // namespace carnot
