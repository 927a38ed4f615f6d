#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace carnot::detail {

// splitmix64: tiny, platform-independent generator so that seeded runs are
// reproducible byte-for-byte regardless of the standard library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in (0, 1)
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = uniform();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(6.283185307179586 * v);
    have_spare_ = true;
    return r * std::cos(6.283185307179586 * v);
  }

  Eigen::VectorXd gaussian_vector(int n) {
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = gaussian();
    return out;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Independent stream per (seed, branch) pair.
inline SplitMix64 stream(std::uint64_t seed, std::uint64_t branch) {
  SplitMix64 mixer(seed ^ (0xA5A5A5A55A5A5A5Aull + branch * 0x9E3779B97F4A7C15ull));
  mixer.next_u64();
  return SplitMix64(mixer.next_u64());
}

}  // namespace carnot::detail
