#pragma once

// Counter-based random streams.
//
// Every stream is addressed by a (seed, index) pair and is a pure function of
// that key, so a Monte Carlo loop can hand sample i to any worker and get the
// same draws.  Uniforms come from a SplitMix64 counter sequence; normals from
// Box-Muller so the output does not depend on the standard library's
// distribution implementation.

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace bayesoed {

namespace detail {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t index)
      : base_(detail::mix64(detail::mix64(seed + detail::kGoldenGamma) ^
                            (index * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL))) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    const std::uint64_t bits = detail::mix64(base_ + (++counter_) * detail::kGoldenGamma);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal();
    return z;
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bayesoed
