#pragma once

#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "bayesoed/errors.hpp"
#include "bayesoed/numerics.hpp"
#include "bayesoed/random.hpp"
#include "bayesoed/spd_matrix.hpp"

namespace bayesoed {

/// Gaussian measure N(mean, cov) on R^n.
class GaussianMeasure {
 public:
  GaussianMeasure(Vector mean, SpdMatrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() != cov_.dim()) {
      std::ostringstream os;
      os << "GaussianMeasure: mean has dimension " << mean_.size() << " but covariance has dimension "
         << cov_.dim();
      throw ValidationError(os.str());
    }
    if (!mean_.allFinite()) throw ValidationError("GaussianMeasure: non-finite mean");
  }

  static GaussianMeasure centered(SpdMatrix cov) {
    const auto n = cov.dim();
    return {Vector::Zero(n), std::move(cov)};
  }

  Eigen::Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const SpdMatrix& cov() const { return cov_; }

  GaussianMeasure with_mean(Vector mean) const { return {std::move(mean), cov_}; }

 private:
  Vector mean_;
  SpdMatrix cov_;
};

/// Square matrix acting on R^n; no symmetry assumed.
class LinearOperator {
 public:
  explicit LinearOperator(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw ValidationError("LinearOperator: matrix is not square");
  }
  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }

 private:
  Matrix entries_;
};

/// KL divergence D(mu1 || mu2) between Gaussian measures:
///   1/2 [ -log(det S1 / det S2) - n + tr(S2^{-1} S1) + (a1-a2)^T S2^{-1} (a1-a2) ].
/// The trace and quadratic terms are evaluated through L2^{-1} so both are sums
/// of squares.
inline double kl_divergence(const GaussianMeasure& mu1, const GaussianMeasure& mu2) {
  if (mu1.dim() != mu2.dim()) {
    std::ostringstream os;
    os << "kl_divergence: dimension mismatch (" << mu1.dim() << " vs " << mu2.dim() << ")";
    throw ValidationError(os.str());
  }
  const auto n = static_cast<double>(mu1.dim());
  const double log_ratio = mu1.cov().log_det() - mu2.cov().log_det();
  const double trace_term = mu2.cov().solve_factor(mu1.cov().factor()).squaredNorm();
  const double quad_term = mu2.cov().solve_factor(mu1.mean() - mu2.mean()).squaredNorm();
  return 0.5 * (-log_ratio - n + trace_term + quad_term);
}

/// E_mu[x^T Q x] = tr(Q C) + a^T Q a.  Only the symmetric part of Q contributes.
inline double expect_quadratic(const GaussianMeasure& mu, const LinearOperator& q) {
  if (q.dim() != mu.dim()) {
    std::ostringstream os;
    os << "expect_quadratic: operator has dimension " << q.dim() << ", measure has " << mu.dim();
    throw ValidationError(os.str());
  }
  const Matrix sym = 0.5 * (q.matrix() + q.matrix().transpose());
  const double trace_term = sym.cwiseProduct(mu.cov().matrix()).sum();
  const double mean_term = mu.mean().dot(sym * mu.mean());
  return trace_term + mean_term;
}

/// Draw number `index` of the stream keyed by `seed`: mean + L z.
inline Vector draw(const GaussianMeasure& mu, std::uint64_t seed, std::uint64_t index) {
  NormalStream stream(seed, index);
  return mu.mean() + mu.cov().apply_factor(stream.normal_vector(mu.dim()));
}

/// `count` draws; draw i depends only on (seed, i).
inline std::vector<Vector> sample(const GaussianMeasure& mu, std::uint64_t seed, std::size_t count,
                                  unsigned workers = 1) {
  if (count < 1) throw ValidationError("sample: count must be at least 1");
  std::vector<Vector> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = draw(mu, seed, i); }, workers);
  return out;
}

}  // namespace bayesoed
