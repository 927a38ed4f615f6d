#include "carnot/anisotropic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "carnot/calculus.hpp"

namespace carnot::aniso {

namespace {

// Forward-mode 2-jets in the three scalar coordinates (A, B, t). Any
// function built from them has grad_0 f = f_A u + f_B v + f_t w, since
// grad_0 A = u, grad_0 B = v, grad_0 t = w.
struct Abc2 {
  double v = 0.0;
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();

  static Abc2 constant(double c) {
    Abc2 r;
    r.v = c;
    return r;
  }
  static Abc2 var(double value, int index) {
    Abc2 r;
    r.v = value;
    r.g[index] = 1.0;
    return r;
  }
};

Abc2 operator+(const Abc2& a, const Abc2& b) {
  Abc2 r;
  r.v = a.v + b.v;
  r.g = a.g + b.g;
  r.h = a.h + b.h;
  return r;
}
Abc2 operator-(const Abc2& a, const Abc2& b) {
  Abc2 r;
  r.v = a.v - b.v;
  r.g = a.g - b.g;
  r.h = a.h - b.h;
  return r;
}
Abc2 operator*(double c, const Abc2& a) {
  Abc2 r;
  r.v = c * a.v;
  r.g = c * a.g;
  r.h = c * a.h;
  return r;
}
Abc2 operator*(const Abc2& a, const Abc2& b) {
  Abc2 r;
  r.v = a.v * b.v;
  r.g = a.g * b.v + b.g * a.v;
  r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}
Abc2 pow(const Abc2& a, double s) {
  Abc2 r;
  const double as = std::pow(a.v, s);
  r.v = as;
  r.g = s * as / a.v * a.g;
  r.h = s * as / a.v * a.h + s * (s - 1.0) * as / (a.v * a.v) * (a.g * a.g.transpose());
  return r;
}
Abc2 log(const Abc2& a) {
  Abc2 r;
  r.v = std::log(a.v);
  r.g = a.g / a.v;
  r.h = a.h / a.v - (a.g * a.g.transpose()) / (a.v * a.v);
  return r;
}

// First-order jets in (A, B, t), for quantities whose own gradient is all
// that is needed downstream.
struct Abc1 {
  double v = 0.0;
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
};

Abc1 operator+(const Abc1& a, const Abc1& b) { return {a.v + b.v, a.g + b.g}; }
Abc1 operator*(const Abc1& a, const Abc1& b) { return {a.v * b.v, a.g * b.v + b.g * a.v}; }
Abc1 operator*(double c, const Abc1& a) { return {c * a.v, c * a.g}; }

struct SlicePoint {
  double A = 0.0, B = 0.0, t = 0.0, C = 0.0;
};

SlicePoint scalars_of(const AnisoPoint& p) {
  SlicePoint s;
  s.A = 0.25 * (p.x1 * p.x1 + p.y1 * p.y1);
  s.B = s.A + 0.5 * p.zprime.squaredNorm();
  s.t = p.t;
  s.C = std::sqrt(s.B * s.B + s.t * s.t);
  return s;
}

void require_not_origin(const SlicePoint& s) {
  if (s.C == 0.0) throw std::domain_error("evaluation at the group identity");
}

// Everything derived from log u_s at one point: the frame coefficients of
// grad u/u, their derivatives, ||grad u||^2/u^2 as a 1-jet, and the two
// second-order scalars.
struct Derived {
  Eigen::Vector3d glu;    // coefficients of grad u/u in the frame (u, v, w)
  Eigen::Matrix3d hlu;    // their (A, B, t) partials
  Abc1 nsq;               // ||grad u||^2/u^2 with its (A, B, t) gradient
  double linf_logu = 0.0; // L_infty(log u_s)
};

Derived derive(const SlicePoint& s, double expo) {
  const Abc2 a = Abc2::var(s.A, 0);
  const Abc2 b = Abc2::var(s.B, 1);
  const Abc2 t = Abc2::var(s.t, 2);
  const Abc2 c = pow(b * b + t * t, 0.5);
  const Abc2 logu = 0.5 * log(b + c) - log(c) - expo * log(a + c);

  Derived d;
  d.glu = logu.g;
  d.hlu = logu.h;

  // Gram data of the frame: <u,u> = <u,v> = A, <v,v> = <w,w> = 2B - A,
  // the remaining products vanish.
  const Abc1 gram_uu{s.A, {1.0, 0.0, 0.0}};
  const Abc1 gram_vv{2.0 * s.B - s.A, {-1.0, 2.0, 0.0}};
  Abc1 cu{logu.g[0], logu.h.row(0)};
  Abc1 cv{logu.g[1], logu.h.row(1)};
  Abc1 cw{logu.g[2], logu.h.row(2)};
  d.nsq = cu * cu * gram_uu + 2.0 * (cu * cv * gram_uu) + cv * cv * gram_vv + cw * cw * gram_vv;

  const auto inner = [&](const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    return x[0] * y[0] * s.A + (x[0] * y[1] + x[1] * y[0]) * s.A +
           x[1] * y[1] * (2.0 * s.B - s.A) + x[2] * y[2] * (2.0 * s.B - s.A);
  };
  d.linf_logu = 0.5 * inner(d.nsq.g, d.glu);
  return d;
}

double divergence_of_grad_log_u(const SlicePoint& s, const Derived& d, int n) {
  // div_0(f u + g v + h w) = f + (2n-1) g + <grad f, u> + <grad g, v> + <grad h, w>
  const auto inner_with = [&](const Eigen::Vector3d& coeff, int frame_index) {
    // Gram column of the frame vector against (u, v, w)
    if (frame_index == 0) return coeff[0] * s.A + coeff[1] * s.A;            // against u
    if (frame_index == 1) return coeff[0] * s.A + coeff[1] * (2 * s.B - s.A);  // against v
    return coeff[2] * (2 * s.B - s.A);                                        // against w
  };
  double div = d.glu[0] + (2.0 * n - 1.0) * d.glu[1];
  div += inner_with(d.hlu.row(0), 0);
  div += inner_with(d.hlu.row(1), 1);
  div += inner_with(d.hlu.row(2), 2);
  return div;
}

double nbar_of(int n) { return n - 0.5; }

void check_n(int n) {
  if (n < 2) throw std::invalid_argument("anisotropic family needs n >= 2");
}

}  // namespace

StepTwoAlgebra group_algebra(int n) {
  check_n(n);
  std::vector<double> b(n, 2.0);
  b[0] = 1.0;
  return make_heisenberg_aniso(b);
}

GroupPoint to_group_point(const AnisoPoint& p) {
  GroupPoint g;
  g.x.resize(2 + p.zprime.size());
  g.x[0] = p.x1;
  g.x[1] = p.y1;
  g.x.tail(p.zprime.size()) = p.zprime;
  g.t.resize(1);
  g.t[0] = p.t;
  return g;
}

AnisoPoint from_group_point(int n, const GroupPoint& g) {
  check_n(n);
  if (g.x.size() != 2 * n || g.t.size() != 1) {
    throw std::invalid_argument("from_group_point: dimension mismatch");
  }
  AnisoPoint p;
  p.x1 = g.x[0];
  p.y1 = g.x[1];
  p.zprime = g.x.tail(2 * (n - 1));
  p.t = g.t[0];
  return p;
}

AbcFrame abc_frame(int n, const AnisoPoint& p) {
  check_n(n);
  if (p.zprime.size() != 2 * (n - 1)) {
    throw std::invalid_argument("abc_frame: z' must have length 2(n-1)");
  }
  const SlicePoint s = scalars_of(p);
  AbcFrame f;
  f.A = s.A;
  f.B = s.B;
  f.C = s.C;
  const int d = 2 * n;
  f.uvec = Eigen::VectorXd::Zero(d);
  f.uvec[0] = 0.5 * p.x1;
  f.uvec[1] = 0.5 * p.y1;
  f.vvec = f.uvec;
  f.vvec.tail(d - 2) = p.zprime;
  f.wvec = Eigen::VectorXd::Zero(d);
  f.wvec[0] = -0.5 * p.y1;
  f.wvec[1] = 0.5 * p.x1;
  for (int j = 0; j < n - 1; ++j) {
    f.wvec[2 + 2 * j] = -p.zprime[2 * j + 1];
    f.wvec[2 + 2 * j + 1] = p.zprime[2 * j];
  }
  return f;
}

double fundamental_u(int n, const AnisoPoint& p) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  return std::sqrt(s.B + s.C) / (s.C * std::pow(s.A + s.C, n - 0.5));
}

double homogeneous_n(int n, const AnisoPoint& p) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  const double inv4n = 1.0 / (4.0 * n);
  return std::pow(2.0, 0.5 + inv4n) * std::pow(s.C, 2.0 * inv4n) *
         std::pow(s.A + s.C, 0.5 - inv4n) / std::pow(s.B + s.C, inv4n);
}

Pqr pqr(int n, const AnisoPoint& p) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  Pqr out;
  out.P = (s.C - 2.0 * s.B) / (2.0 * s.C * s.C);
  out.Q = (s.C + 2.0 * s.B) * s.t / (2.0 * s.C * s.C * (s.C + s.B));
  out.R = 1.0 / (s.C + s.A);
  return out;
}

Eigen::VectorXd grad_log_u(int n, const AnisoPoint& p) {
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  const AbcFrame f = abc_frame(n, p);
  const Pqr c = pqr(n, p);
  const double nb = nbar_of(n);
  return (c.P - nb * (s.B / s.C) * c.R) * f.vvec - (c.Q + nb * (s.t / s.C) * c.R) * f.wvec -
         nb * c.R * f.uvec;
}

double grad_log_u_norm_sq(int n, const AnisoPoint& p) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  return derive(s, nbar_of(n)).nsq.v;
}

double infinity_laplacian_log_u(int n, const AnisoPoint& p, double expo) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  return derive(s, expo).linf_logu;
}

double infinity_laplacian_log_u(int n, const AnisoPoint& p) {
  return infinity_laplacian_log_u(n, p, nbar_of(n));
}

double DivergenceReport::max_fd_residual() const {
  return std::max({grad_p, grad_q, grad_r, div_u, div_v, div_w});
}

DivergenceReport divergence_identities(int n, const AnisoPoint& p) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  const StepTwoAlgebra algebra = group_algebra(n);
  const GroupPoint gp = to_group_point(p);
  const Derived d = derive(s, nbar_of(n));

  DivergenceReport report;

  // Finite-difference side: scalar fields evaluated through the group
  // structure, differentiated by the left-invariant frame.
  const auto fd_gradient = [&](const std::function<double(const AnisoPoint&)>& fn) {
    ScalarField field = ScalarField::finite_difference(
        [n, &fn](const GroupPoint& g) { return fn(from_group_point(n, g)); });
    return horizontal_gradient(field, algebra, gp);
  };

  const AbcFrame f = abc_frame(n, p);
  const double C = s.C, B = s.B, A = s.A, t = s.t;
  const double C2 = C * C, C4 = C2 * C2;

  // grad_0 P = ((4B^2 - BC - 2C^2)/(2C^4)) v - ((2B - C)/(2C^4)) t w
  {
    const Eigen::VectorXd closed =
        ((4 * B * B - B * C - 2 * C2) / (2 * C4)) * f.vvec - ((2 * B - C) / (2 * C4)) * t * f.wvec;
    const Eigen::VectorXd fd =
        fd_gradient([n](const AnisoPoint& q) { return pqr(n, q).P; });
    report.grad_p = (closed - fd).cwiseAbs().maxCoeff();
  }
  // grad_0 Q = ((C - 4B)/(2C^4)) t v - ((C^3 + 3BC^2 - 3B^2C - 4B^3)/(2C^4(C+B))) w
  {
    const Eigen::VectorXd closed =
        ((C - 4 * B) / (2 * C4)) * t * f.vvec -
        ((C * C2 + 3 * B * C2 - 3 * B * B * C - 4 * B * B * B) / (2 * C4 * (C + B))) * f.wvec;
    const Eigen::VectorXd fd =
        fd_gradient([n](const AnisoPoint& q) { return pqr(n, q).Q; });
    report.grad_q = (closed - fd).cwiseAbs().maxCoeff();
  }
  // grad_0 R = -(B/(C(C+A)^2)) v - (t/(C(C+A)^2)) w - (1/(C+A)^2) u
  {
    const double ca2 = (C + A) * (C + A);
    const Eigen::VectorXd closed =
        -(B / (C * ca2)) * f.vvec - (t / (C * ca2)) * f.wvec - (1.0 / ca2) * f.uvec;
    const Eigen::VectorXd fd =
        fd_gradient([n](const AnisoPoint& q) { return pqr(n, q).R; });
    report.grad_r = (closed - fd).cwiseAbs().maxCoeff();
  }

  // Frame divergences: div(u) = 1, div(v) = 2n-1, div(w) = 0, each computed
  // by horizontally differentiating the coefficient functions.
  const auto fd_divergence = [&](int which) {
    double div = 0.0;
    for (int i = 0; i < algebra.m; ++i) {
      ScalarField coeff = ScalarField::finite_difference([n, which, i](const GroupPoint& g) {
        const AbcFrame fr = abc_frame(n, from_group_point(n, g));
        const Eigen::VectorXd& vec = which == 0 ? fr.uvec : (which == 1 ? fr.vvec : fr.wvec);
        return vec[i];
      });
      div += horizontal_gradient(coeff, algebra, gp)[i];
    }
    return div;
  };
  report.div_u = std::abs(fd_divergence(0) - 1.0);
  report.div_v = std::abs(fd_divergence(1) - (2.0 * n - 1.0));
  report.div_w = std::abs(fd_divergence(2));

  report.harmonicity = harmonicity_residual(n, p);
  report.scaled_harmonicity = scaled_harmonicity_residual(n, p);
  return report;
}

double harmonicity_residual(int n, const AnisoPoint& p) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  const Derived d = derive(s, nbar_of(n));
  return std::abs(divergence_of_grad_log_u(s, d, n) + d.nsq.v);
}

double scaled_harmonicity_residual(int n, const AnisoPoint& p) {
  // N^Q L u = N^Q u (div_0(grad u/u) + ||grad u||^2/u^2)
  const double nq = std::pow(homogeneous_n(n, p), 2 * n + 2);
  return nq * fundamental_u(n, p) * harmonicity_residual(n, p);
}

GradNormSqDecomposition grad_normsq_decomposition(int n, const AnisoPoint& p) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  const double A = s.A, B = s.B, C = s.C, t = s.t;
  const double nb = nbar_of(n);
  const double CA = C + A, CB = C + B;
  const double C2 = C * C, C3 = C2 * C, C4 = C2 * C2;

  GradNormSqDecomposition e;
  e.Ev = (A * B - 2 * B * C + A * C + 2 * t * t) / (2 * C3 * CB) +
         nb * (A * (C - B) * (C + 2 * B) * (A + 2 * C) + C2 * (C2 - 2 * B * B)) / (C4 * CA * CA) +
         nb * nb * (2 * CA * t * t - 2 * B * B * C) / (C3 * CA * CA);
  e.Ew = (A - 2 * B) * (B + 2 * C) / (2 * C3 * CB * CB) -
         nb * (2 * B * C2 + A * (C - 2 * B) * (2 * C - A)) / (C4 * CA * CA) -
         nb * nb * (2 * B * (A + 2 * C)) / (C3 * CA * CA);
  e.Eu = -1.0 / (2 * C * CB) - nb / (CA * CA) - nb * nb * 2 * B / (C * CA * CA);
  return e;
}

double infinity_laplacian_n(int n, const AnisoPoint& p) {
  check_n(n);
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);
  const Derived d = derive(s, nbar_of(n));
  const double nn = static_cast<double>(n);
  const double linf_over_n3 =
      (-1.0 / (8.0 * nn * nn * nn)) * d.linf_logu +
      (1.0 / (16.0 * nn * nn * nn * nn)) * d.nsq.v * d.nsq.v;
  const double norm = homogeneous_n(n, p);
  return std::pow(norm, 4.0) * linf_over_n3;
}

F3FitResult f3_fit(int n, const AnisoPoint& p, int exponent_samples) {
  check_n(n);
  if (exponent_samples < 4) throw std::invalid_argument("f3_fit: need at least 4 exponents");
  const SlicePoint s = scalars_of(p);
  require_not_origin(s);

  Eigen::MatrixXd vandermonde(exponent_samples, 4);
  Eigen::VectorXd values(exponent_samples);
  for (int k = 0; k < exponent_samples; ++k) {
    const double expo = 1.0 + k;
    vandermonde(k, 0) = 1.0;
    vandermonde(k, 1) = expo;
    vandermonde(k, 2) = expo * expo;
    vandermonde(k, 3) = expo * expo * expo;
    values[k] = derive(s, expo).linf_logu;
  }
  const Eigen::VectorXd coeffs = vandermonde.colPivHouseholderQr().solve(values);

  F3FitResult out;
  out.f3_fit = coeffs[3];
  out.fit_residual = (vandermonde * coeffs - values).cwiseAbs().maxCoeff();

  const double A = s.A, B = s.B, C = s.C, t = s.t;
  const double CA = C + A;
  out.f3_closed = (A * B * B + 2 * B * B * C - A * C * C) / (C * C * C * CA * CA);
  const double g2 = 2 * B / (C * CA);
  out.identity_residual =
      std::abs(g2 * g2 - 2 * out.f3_closed - 2 * A * t * t / (C * C * C * CA * CA));
  return out;
}

AnisoPoint slice_point(int n, double phi) {
  check_n(n);
  AnisoPoint dir;
  dir.x1 = std::cos(phi);
  dir.zprime = Eigen::VectorXd::Zero(2 * (n - 1));
  dir.zprime[0] = std::sin(phi);
  dir.t = 0.0;

  const auto scaled = [&](double r) {
    AnisoPoint q = dir;
    q.x1 *= r;
    q.y1 *= r;
    q.zprime *= r;
    return q;
  };
  double lo = 1e-3, hi = 10.0;
  double flo = homogeneous_n(n, scaled(lo)) - 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = homogeneous_n(n, scaled(mid)) - 1.0;
    if ((flo <= 0.0) == (fmid <= 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return scaled(0.5 * (lo + hi));
}

ConjectureScanResult conjecture_scan(int n, const SolverConfig& cfg) {
  check_n(n);
  cfg.check();

  const auto objective = [&](double phi) {
    return std::abs(infinity_laplacian_n(n, slice_point(n, phi)));
  };

  const int count = std::max(cfg.grid_density / 4, 256);
  ConjectureScanResult result;
  result.samples = count + 1;
  double best_phi = 0.0, best = -1.0;
  for (int k = 0; k <= count; ++k) {
    const double phi = 0.5 * M_PI * k / count;
    const double val = objective(phi);
    if (val > best) {
      best = val;
      best_phi = phi;
    }
  }

  // golden-section polish around the best grid angle
  double lo = std::max(0.0, best_phi - 0.5 * M_PI / count);
  double hi = std::min(0.5 * M_PI, best_phi + 0.5 * M_PI / count);
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = objective(x1);
    }
    result.samples += 1;
  }
  const double polished_phi = 0.5 * (lo + hi);
  if (objective(polished_phi) > best) {
    best = objective(polished_phi);
    best_phi = polished_phi;
  }

  result.sup = best;
  result.witness = slice_point(n, best_phi);
  result.delta_sq = 9.0 * (n - 1.0) / (n * (16.0 * n - 15.0));
  result.ratio = result.sup / result.delta_sq;
  return result;
}

}  // namespace carnot::aniso
