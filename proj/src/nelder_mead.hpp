#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

namespace carnot::detail {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  long evaluations = 0;
};

// Standard Nelder-Mead simplex minimization. Deterministic for a fixed
// starting point; ties in the ordering are broken by index.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& start, double initial_step,
                                    int max_iters, double tol) {
  const int n = static_cast<int>(start.size());
  NelderMeadResult result;

  std::vector<Eigen::VectorXd> xs(n + 1, start);
  std::vector<double> fs(n + 1);
  for (int i = 1; i <= n; ++i) xs[i][i - 1] += initial_step;
  for (int i = 0; i <= n; ++i) {
    fs[i] = f(xs[i]);
    ++result.evaluations;
  }

  std::vector<int> order(n + 1);
  auto sort_order = [&] {
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
  };

  for (int iter = 0; iter < max_iters; ++iter) {
    sort_order();
    const int best = order[0], worst = order[n], second_worst = order[n - 1];

    const double spread = std::abs(fs[worst] - fs[best]);
    if (spread <= tol * (1.0 + std::abs(fs[best]))) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= n;

    auto eval = [&](const Eigen::VectorXd& x) {
      ++result.evaluations;
      return f(x);
    };

    const Eigen::VectorXd reflected = centroid + (centroid - xs[worst]);
    const double fr = eval(reflected);
    if (fr < fs[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        xs[worst] = expanded;
        fs[worst] = fe;
      } else {
        xs[worst] = reflected;
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = reflected;
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (xs[worst] - centroid));
      const double fc = eval(contracted);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = contracted;
        fs[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = eval(xs[i]);
        }
      }
    }
  }

  sort_order();
  result.x = xs[order[0]];
  result.value = fs[order[0]];
  return result;
}

}  // namespace carnot::detail
