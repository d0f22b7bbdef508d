#pragma once

#include <cstdint>
#include <sstream>
#include <utility>

#include "bayesoed/errors.hpp"
#include "bayesoed/gaussian.hpp"
#include "bayesoed/random.hpp"
#include "bayesoed/spd_matrix.hpp"

namespace bayesoed {

/// Parameter-to-observable map F : R^n -> R^q.
class ForwardModel {
 public:
  explicit ForwardModel(Matrix f) : f_(std::move(f)) {
    if (f_.rows() < 1 || f_.cols() < 1) throw ValidationError("ForwardModel: F must be at least 1x1");
    if (!f_.allFinite()) throw ValidationError("ForwardModel: non-finite entries in F");
  }
  const Matrix& matrix() const { return f_; }
  Eigen::Index observations() const { return f_.rows(); }
  Eigen::Index parameters() const { return f_.cols(); }

 private:
  Matrix f_;
};

/// y = F m + eta, eta ~ N(0, noise_cov), m ~ prior.
class BayesLinearProblem {
 public:
  BayesLinearProblem(ForwardModel forward, SpdMatrix noise_cov, GaussianMeasure prior)
      : forward_(std::move(forward)), noise_cov_(std::move(noise_cov)), prior_(std::move(prior)) {
    if (noise_cov_.dim() != forward_.observations() || prior_.dim() != forward_.parameters()) {
      std::ostringstream os;
      os << "BayesLinearProblem: F is " << forward_.observations() << "x" << forward_.parameters()
         << " but noise covariance is " << noise_cov_.dim() << "x" << noise_cov_.dim()
         << " and prior has dimension " << prior_.dim();
      throw ValidationError(os.str());
    }
  }

  const ForwardModel& forward() const { return forward_; }
  const Matrix& f() const { return forward_.matrix(); }
  const SpdMatrix& noise_cov() const { return noise_cov_; }
  const GaussianMeasure& prior() const { return prior_; }
  Eigen::Index n() const { return forward_.parameters(); }
  Eigen::Index q() const { return forward_.observations(); }

  BayesLinearProblem with_prior_mean(Vector mean) const {
    return {forward_, noise_cov_, prior_.with_mean(std::move(mean))};
  }

 private:
  ForwardModel forward_;
  SpdMatrix noise_cov_;
  GaussianMeasure prior_;
};

/// H = F^T Gn^{-1} F, its prior-preconditioned form H~ = R H R with R the
/// symmetric root of the prior covariance, and S = (H~ + I)^{-1}.
struct HessianBundle {
  Matrix h;
  Matrix h_tilde;
  SpdMatrix s;
  SpdMatrix prior_sqrt;
};

inline HessianBundle hessian_bundle(const BayesLinearProblem& p) {
  // Whitened forward map: W^T W = F^T Gn^{-1} F.
  const Matrix whitened = p.noise_cov().solve_factor(p.f());
  Matrix h = whitened.transpose() * whitened;
  h = 0.5 * (h + h.transpose());

  SpdMatrix root = symmetric_sqrt(p.prior().cov());
  const Matrix g = whitened * root.matrix();
  Matrix h_tilde = g.transpose() * g;
  h_tilde = 0.5 * (h_tilde + h_tilde.transpose());

  Matrix shifted = h_tilde;
  shifted.diagonal().array() += 1.0;
  SpdMatrix s(SpdMatrix(shifted).inverse());
  return {std::move(h), std::move(h_tilde), std::move(s), std::move(root)};
}

/// Posterior precision H + Gpr^{-1}.
inline SpdMatrix posterior_precision(const BayesLinearProblem& p) {
  const Matrix whitened = p.noise_cov().solve_factor(p.f());
  Matrix precision = whitened.transpose() * whitened + p.prior().cov().inverse();
  return SpdMatrix(0.5 * (precision + precision.transpose()));
}

/// Gpost = (H + Gpr^{-1})^{-1}; independent of the data.
inline SpdMatrix posterior_covariance(const BayesLinearProblem& p) {
  const Eigen::LDLT<Matrix> ldlt(posterior_precision(p).matrix());
  const Matrix cov = ldlt.solve(Matrix::Identity(p.n(), p.n()));
  return SpdMatrix(0.5 * (cov + cov.transpose()));
}

/// Posterior N(m_post, Gpost) with m_post = Gpost (F^T Gn^{-1} y + Gpr^{-1} m_pr).
inline GaussianMeasure posterior(const BayesLinearProblem& p, const Vector& y) {
  if (y.size() != p.q()) {
    std::ostringstream os;
    os << "posterior: data has length " << y.size() << ", expected " << p.q();
    throw ValidationError(os.str());
  }
  const Eigen::LDLT<Matrix> ldlt(posterior_precision(p).matrix());
  const Vector rhs = p.f().transpose() * p.noise_cov().solve(y) + p.prior().cov().solve(p.prior().mean());
  Vector mean = ldlt.solve(rhs);
  const Matrix cov = ldlt.solve(Matrix::Identity(p.n(), p.n()));
  return {std::move(mean), SpdMatrix(0.5 * (cov + cov.transpose()))};
}

/// Gpost assembled as R S R.
inline SpdMatrix posterior_cov_via_s(const BayesLinearProblem& p) {
  const HessianBundle b = hessian_bundle(p);
  const Matrix& r = b.prior_sqrt.matrix();
  Matrix cov = r * b.s.matrix() * r;
  return SpdMatrix(0.5 * (cov + cov.transpose()));
}

/// Data-independent pieces of the posterior, precomputed for repeated use:
/// m_post(y) = m_pr + gain (y - F m_pr).
struct PosteriorMap {
  SpdMatrix cov;
  Matrix gain;  // Gpost F^T Gn^{-1}, n x q

  explicit PosteriorMap(const BayesLinearProblem& p)
      : cov(posterior_covariance(p)),
        gain(posterior_precision(p).solve(p.noise_cov().solve(p.f()).transpose())) {}
};

/// A synthetic experiment: true parameter and the data it produced.
struct Observation {
  Vector m_true;
  Vector y;
};

/// Joint draw m ~ prior, y = F m + eta keyed by (seed, index).  The n prior
/// normals come first in the stream, then the q noise normals.
inline Observation synthesize_observation(const BayesLinearProblem& p, std::uint64_t seed,
                                          std::uint64_t index) {
  NormalStream stream(seed, index);
  const Vector z_prior = stream.normal_vector(p.n());
  const Vector z_noise = stream.normal_vector(p.q());
  Observation obs;
  obs.m_true = p.prior().mean() + p.prior().cov().apply_factor(z_prior);
  obs.y = p.f() * obs.m_true + p.noise_cov().apply_factor(z_noise);
  return obs;
}

}  // namespace bayesoed
