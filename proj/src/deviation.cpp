#include "carnot/deviation.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <stdexcept>

#include "nelder_mead.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sphere_grid.hpp"

namespace carnot {

namespace {

using detail::SplitMix64;

void require_valid(const StepTwoAlgebra& a, const VerticalMetric& v) {
  if (v.G.rows() != a.m2) throw std::invalid_argument("vertical metric dimension mismatch");
  if (!validate(v).ok()) throw std::invalid_argument("invalid vertical metric");
}

// Sign convention: flip so the first coordinate above noise is positive.
// The defect is even in t, so t and -t are the same witness.
void canonicalize_sign(Eigen::VectorXd& t) {
  for (int i = 0; i < t.size(); ++i) {
    if (std::abs(t[i]) > 1e-13) {
      if (t[i] < 0) t = -t;
      return;
    }
  }
}

bool abs_lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size() && i < b.size(); ++i) {
    const double da = std::abs(a[i]), db = std::abs(b[i]);
    if (da != db) return da > db;
  }
  return false;
}

// sup_{t^T G t = 1} || J_t^2 + Id ||_HS^2 as a smooth quartic. J is linear
// in t through the precombined matrices bhat_k = sum_q G(q,k) B^q.
struct InnerProblem {
  const StepTwoAlgebra& algebra;
  Eigen::MatrixXd G;
  std::vector<Eigen::MatrixXd> bhat;

  InnerProblem(const StepTwoAlgebra& a, const VerticalMetric& v) : algebra(a), G(v.G) {
    bhat.assign(a.m2, Eigen::MatrixXd::Zero(a.m, a.m));
    for (int k = 0; k < a.m2; ++k) {
      for (int q = 0; q < a.m2; ++q) {
        if (G(q, k) != 0.0) bhat[k] += G(q, k) * a.B[q];
      }
    }
  }

  Eigen::MatrixXd j_of(const Eigen::VectorXd& t) const {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(algebra.m, algebra.m);
    for (int k = 0; k < algebra.m2; ++k) j -= t[k] * bhat[k];
    return j;
  }

  Eigen::VectorXd normalize(const Eigen::VectorXd& t) const {
    const double n = std::sqrt(t.dot(G * t));
    if (!(n > 0)) throw std::invalid_argument("cannot normalize a null vertical vector");
    return t / n;
  }

  double objective(const Eigen::VectorXd& t) const {
    const Eigen::MatrixXd j = j_of(t);
    Eigen::MatrixXd m = j * j;
    m.diagonal().array() += t.dot(G * t);
    return m.squaredNorm();
  }

  double objective_grad(const Eigen::VectorXd& t, Eigen::VectorXd& grad) const {
    const Eigen::MatrixXd j = j_of(t);
    Eigen::MatrixXd m = j * j;
    m.diagonal().array() += t.dot(G * t);
    const Eigen::MatrixXd p = j * m + m * j;
    const Eigen::VectorXd gt = G * t;
    const double tr = m.trace();
    grad.resize(t.size());
    for (int k = 0; k < t.size(); ++k) {
      grad[k] = 2.0 * (p.cwiseProduct(bhat[k]).sum() + 2.0 * gt[k] * tr);
    }
    return m.squaredNorm();
  }
};

struct PolishResult {
  double value = 0.0;
  Eigen::VectorXd t;
  bool converged = false;
  long evaluations = 0;
};

// Projected gradient ascent with Armijo backtracking on the G-sphere.
PolishResult polish_ascent(const InnerProblem& prob, const Eigen::VectorXd& start, int max_iters,
                           double tol) {
  PolishResult res;
  Eigen::VectorXd t = prob.normalize(start);
  Eigen::VectorXd grad;
  double f = prob.objective_grad(t, grad);
  ++res.evaluations;
  double step = 0.5;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd normal = prob.G * t;
    const double nn = normal.squaredNorm();
    Eigen::VectorXd dir = grad - (grad.dot(normal) / nn) * normal;
    const double dn = dir.norm();
    if (dn <= std::sqrt(tol) * (1.0 + std::abs(f))) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    double alpha = step;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd cand = prob.normalize(t + alpha * dir);
      const double fc = prob.objective(cand);
      ++res.evaluations;
      if (fc >= f + 1e-4 * alpha * dn * dn) {
        t = cand;
        f = prob.objective_grad(t, grad);
        ++res.evaluations;
        step = std::min(1.0, alpha * 2.0);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
  }
  res.value = f;
  res.t = t;
  return res;
}

struct InnerResult {
  double value = 0.0;  // defect / sqrt(m)
  Eigen::VectorXd witness;
  bool converged = false;
  long evaluations = 0;
};

InnerResult finish_inner(const InnerProblem& prob, const std::vector<PolishResult>& candidates,
                         double tol, long extra_evals) {
  InnerResult out;
  double best = -1.0;
  for (const auto& c : candidates) best = std::max(best, c.value);
  const double cutoff = best - tol * (1.0 + std::abs(best));
  int chosen = -1;
  Eigen::VectorXd chosen_t;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].value < cutoff) continue;
    Eigen::VectorXd t = candidates[i].t;
    canonicalize_sign(t);
    if (chosen < 0 || abs_lex_greater(t, chosen_t)) {
      chosen = static_cast<int>(i);
      chosen_t = t;
    }
  }
  out.value = std::sqrt(std::max(0.0, best)) / std::sqrt(static_cast<double>(prob.algebra.m));
  out.witness = chosen_t;
  out.converged = candidates[static_cast<std::size_t>(chosen)].converged;
  out.evaluations = extra_evals;
  for (const auto& c : candidates) out.evaluations += c.evaluations;
  return out;
}

// effort = 0: reduced multistart for the outer loop's exploration phase;
// effort = 1: full configuration (public results).
InnerResult inner_sup(const StepTwoAlgebra& a, const VerticalMetric& v, const SolverConfig& cfg,
                      int effort) {
  const InnerProblem prob(a, v);
  const int m2 = a.m2;
  std::vector<PolishResult> candidates;
  long extra_evals = 0;

  if (m2 == 1) {
    PolishResult single;
    single.t = prob.normalize(Eigen::VectorXd::Ones(1));
    single.value = prob.objective(single.t);
    single.converged = true;
    single.evaluations = 1;
    candidates.push_back(std::move(single));
    return finish_inner(prob, candidates, cfg.tol, extra_evals);
  }

  std::vector<Eigen::VectorXd> starts;
  if (m2 <= 3) {
    const int density = std::max(cfg.grid_density, effort > 0 ? 2000 : 512);
    const auto dirs = detail::sphere_directions(m2, density, cfg.seed);
    std::vector<double> values(dirs.size());
    std::vector<long> chunk_evals(static_cast<std::size_t>(cfg.threads) + 1, 0);
    detail::parallel_chunks(static_cast<long>(dirs.size()), cfg.threads,
                            [&](long chunk, long begin, long end) {
                              long count = 0;
                              for (long i = begin; i < end; ++i) {
                                values[i] = prob.objective(prob.normalize(dirs[i]));
                                ++count;
                              }
                              chunk_evals[static_cast<std::size_t>(chunk)] += count;
                            });
    for (long c : chunk_evals) extra_evals += c;

    std::vector<long> idx(dirs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<long>(i);
    const std::size_t keep = std::min<std::size_t>(8, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](long x, long y) {
      if (values[x] != values[y]) return values[x] > values[y];
      return x < y;
    });
    for (std::size_t k = 0; k < keep; ++k) starts.push_back(dirs[idx[k]]);
  } else {
    for (int q = 0; q < m2; ++q) starts.push_back(Eigen::VectorXd::Unit(m2, q));
    if (effort > 0) {
      int budget = 40;
      for (int q = 0; q < m2 && budget > 0; ++q) {
        for (int r = q + 1; r < m2 && budget > 0; ++r) {
          Eigen::VectorXd plus = Eigen::VectorXd::Zero(m2);
          plus[q] = plus[r] = 1.0;
          starts.push_back(plus);
          Eigen::VectorXd minus = Eigen::VectorXd::Zero(m2);
          minus[q] = 1.0;
          minus[r] = -1.0;
          starts.push_back(minus);
          budget -= 2;
        }
      }
    }
    const int randoms = effort > 0 ? std::max(cfg.restarts, m2) : std::min(cfg.restarts, 8);
    for (int s = 0; s < randoms; ++s) {
      SplitMix64 rng = detail::stream(cfg.seed, 1000 + static_cast<std::uint64_t>(s));
      starts.push_back(rng.gaussian_vector(m2));
    }
  }

  const int iters = effort > 0 ? cfg.max_iters : std::min(cfg.max_iters, 150);
  candidates.resize(starts.size());
  detail::parallel_chunks(static_cast<long>(starts.size()), cfg.threads,
                          [&](long, long begin, long end) {
                            for (long i = begin; i < end; ++i) {
                              candidates[i] = polish_ascent(prob, starts[i], iters, cfg.tol);
                            }
                          });
  return finish_inner(prob, candidates, cfg.tol, extra_evals);
}

// Unconstrained parametrization of SPD matrices: G = L L^T with the
// diagonal of L stored in log scale.
Eigen::MatrixXd metric_from_params(int m2, const Eigen::VectorXd& theta) {
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(m2, m2);
  int k = 0;
  for (int i = 0; i < m2; ++i) {
    for (int j = 0; j <= i; ++j, ++k) {
      if (i == j) {
        lower(i, j) = std::exp(std::clamp(theta[k], -8.0, 8.0));
      } else {
        lower(i, j) = std::clamp(theta[k], -1e3, 1e3);
      }
    }
  }
  return lower * lower.transpose();
}

}  // namespace

void SolverConfig::check() const {
  if (restarts < 1) throw std::invalid_argument("SolverConfig: restarts must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (!(tol > 0.0) || tol > 1e-2) throw std::invalid_argument("SolverConfig: tol must lie in (0, 1e-2]");
  if (grid_density < 1) throw std::invalid_argument("SolverConfig: grid_density must be >= 1");
  if (threads < 1) throw std::invalid_argument("SolverConfig: threads must be >= 1");
}

DeviationReport deviation_at_metric(const StepTwoAlgebra& a, const VerticalMetric& v,
                                    const SolverConfig& cfg) {
  cfg.check();
  require_valid(a, v);
  const InnerResult inner = inner_sup(a, v, cfg, /*effort=*/1);
  DeviationReport report;
  report.value = inner.value;
  report.witness_t = inner.witness;
  report.metric = v;
  report.inner_converged = inner.converged;
  report.outer_converged = true;  // nothing to optimize over
  report.evaluations = inner.evaluations;
  return report;
}

DeviationReport deviation(const StepTwoAlgebra& a, const SolverConfig& cfg) {
  cfg.check();
  if (!validate(a).ok()) throw std::invalid_argument("deviation: invalid algebra");
  const int m2 = a.m2;
  const int dim = m2 * (m2 + 1) / 2;

  long total_evals = 0;
  struct Tracked {
    double explore_value;
    Eigen::VectorXd theta;
  };
  std::vector<Tracked> tracked;

  auto explore = [&](const Eigen::VectorXd& theta) {
    const VerticalMetric metric{metric_from_params(m2, theta)};
    const InnerResult inner = inner_sup(a, metric, cfg, /*effort=*/0);
    total_evals += inner.evaluations;
    tracked.push_back({inner.value, theta});
    return inner.value;
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(dim));
  if (m2 == 1) {
    // 1-D family: a coarse log-scale sweep pins the basin before polishing.
    double best_theta = 0.0, best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 160; ++i) {
      Eigen::VectorXd theta(1);
      theta[0] = -4.0 + 8.0 * i / 160.0;
      const double value = explore(theta);
      if (value < best_value) {
        best_value = value;
        best_theta = theta[0];
      }
    }
    Eigen::VectorXd seed_theta(1);
    seed_theta[0] = best_theta;
    starts.push_back(seed_theta);
  }
  for (int s = static_cast<int>(starts.size()); s < cfg.restarts; ++s) {
    SplitMix64 rng = detail::stream(cfg.seed, 2000 + static_cast<std::uint64_t>(s));
    starts.push_back(0.5 * rng.gaussian_vector(dim));
  }

  bool outer_converged = false;
  double best_explored = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto nm = detail::nelder_mead(explore, starts[s], 0.25, cfg.max_iters, cfg.tol);
    if (nm.value < best_explored) {
      best_explored = nm.value;
      outer_converged = nm.converged;
    }
  }

  // Re-evaluate the most promising metrics (identity always included) at
  // full effort; the exploration pass may under-resolve the inner supremum.
  std::stable_sort(tracked.begin(), tracked.end(),
                   [](const Tracked& x, const Tracked& y) { return x.explore_value < y.explore_value; });
  std::vector<Eigen::VectorXd> finalists;
  finalists.push_back(Eigen::VectorXd::Zero(dim));
  for (const auto& tr : tracked) {
    if (finalists.size() >= 4) break;
    bool dup = false;
    for (const auto& f : finalists) dup = dup || (f - tr.theta).norm() < 1e-12;
    if (!dup) finalists.push_back(tr.theta);
  }

  DeviationReport best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& theta : finalists) {
    const VerticalMetric metric{metric_from_params(m2, theta)};
    DeviationReport rep = deviation_at_metric(a, metric, cfg);
    total_evals += rep.evaluations;
    if (rep.value < best.value) best = rep;
  }
  best.outer_converged = outer_converged;
  best.evaluations = total_evals;
  return best;
}

double optimal_lambda_heis(const std::vector<double>& b) {
  if (b.empty()) throw std::invalid_argument("optimal_lambda_heis: empty coefficient vector");
  double s2 = 0.0, s4 = 0.0;
  for (double bj : b) {
    if (!(bj > 0.0)) throw std::invalid_argument("optimal_lambda_heis: coefficients must be positive");
    s2 += bj * bj;
    s4 += bj * bj * bj * bj;
  }
  const double n = static_cast<double>(b.size());
  return std::sqrt(s2 / n) / std::sqrt(s4 / n);
}

double eval_dgen(int n, double p, double q, double alpha, double theta) {
  if (n < 2) throw std::invalid_argument("eval_dgen: need n >= 2");
  if (!(p > 0.0) || !(q > 0.0)) throw std::invalid_argument("eval_dgen: need p, q > 0");
  const double x = p * std::cos(theta - alpha);
  const double c = std::cos(theta);
  const double y2 = q * q * c * c;
  const double one_minus_x2 = 1.0 - x * x;
  const double value = one_minus_x2 * one_minus_x2 +
                       (2.0 / n) * (2.0 * x * x - 1.0) * y2 + (1.0 / n) * y2 * y2;
  return std::sqrt(std::max(0.0, value));
}

std::pair<Eigen::MatrixXd, double> generalized_s_matrix(const StepTwoAlgebra& a,
                                                        const VerticalMetric& v) {
  require_valid(a, v);
  const Eigen::MatrixXd lower = cholesky_lower(v);
  const Eigen::MatrixXd basis = lower.transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(a.m2, a.m2));  // columns: g_v-orthonormal vertical basis

  std::vector<Eigen::VectorXd> probes;
  for (int q = 0; q < a.m2; ++q) probes.push_back(basis.col(q));
  for (int q = 0; q < a.m2; ++q) {
    for (int r = q + 1; r < a.m2; ++r) {
      probes.push_back((basis.col(q) + basis.col(r)) / std::sqrt(2.0));
    }
  }

  std::vector<Eigen::MatrixXd> per_probe;
  per_probe.reserve(probes.size());
  for (const auto& t : probes) {
    const Eigen::MatrixXd j = j_matrix(a, v, t).M;
    per_probe.push_back(-(j * j) / v.norm_sq(t));
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(a.m, a.m);
  for (const auto& sp : per_probe) s += sp;
  s /= static_cast<double>(per_probe.size());
  double residual = 0.0;
  for (const auto& sp : per_probe) residual = std::max(residual, (sp - s).norm());
  return {s, residual};
}

}  // namespace carnot
