#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "rng.hpp"

namespace carnot::detail {

// Deterministic direction samples on the Euclidean unit sphere S^{d-1}.
// d = 1 gives the single point +1, d = 2 a uniform half-circle (the use
// sites are even functions of the direction), d = 3 a Fibonacci lattice,
// and d > 3 seeded uniform samples.
inline std::vector<Eigen::VectorXd> sphere_directions(int d, int count, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> dirs;
  if (d <= 0 || count <= 0) return dirs;
  if (d == 1) {
    dirs.push_back(Eigen::VectorXd::Ones(1));
    return dirs;
  }
  if (d == 2) {
    dirs.reserve(count);
    for (int k = 0; k < count; ++k) {
      const double theta = M_PI * (k + 0.5) / count;
      Eigen::VectorXd v(2);
      v << std::cos(theta), std::sin(theta);
      dirs.push_back(v);
    }
    return dirs;
  }
  if (d == 3) {
    dirs.reserve(count);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * k;
      Eigen::VectorXd v(3);
      v << r * std::cos(phi), r * std::sin(phi), z;
      dirs.push_back(v);
    }
    return dirs;
  }
  SplitMix64 rng = stream(seed, 0x5f3759df);
  dirs.reserve(count);
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd v = rng.gaussian_vector(d);
    const double norm = v.norm();
    if (norm < 1e-12) {
      --k;
      continue;
    }
    dirs.push_back(v / norm);
  }
  return dirs;
}

}  // namespace carnot::detail
