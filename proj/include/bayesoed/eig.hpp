#pragma once

// Expected information gain (EIG) of a linear-Gaussian inverse problem,
//
//   EIG = E_prior E_{y|m} D_kl(post || prior)
//       = 1/2 log det Gpr - 1/2 log det Gpost     (closed form)
//       = 1/2 log det(H~ + I)                     (log-det form)
//
// and the Monte Carlo estimators used to check both against the definition.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bayesoed/errors.hpp"
#include "bayesoed/gaussian.hpp"
#include "bayesoed/inverse_problem.hpp"
#include "bayesoed/numerics.hpp"

namespace bayesoed {

struct McConfig {
  std::uint64_t seed = 0;
  std::size_t n_samples = 100000;
  unsigned workers = 1;  // 0 = hardware concurrency; never changes the result

  void validate() const {
    if (n_samples < 2) throw ValidationError("McConfig: n_samples must be at least 2");
  }
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct LemmaCheck {
  double estimate = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
};

struct EigReport {
  double closed_form = 0.0;
  double logdet_form = 0.0;
  std::optional<double> mc_estimate;
  std::optional<double> mc_std_error;
  std::optional<std::size_t> mc_samples;

  bool operator==(const EigReport&) const = default;
};

inline double eig_closed_form(const BayesLinearProblem& p) {
  return 0.5 * p.prior().cov().log_det() - 0.5 * posterior_covariance(p).log_det();
}

inline double eig_logdet_form(const HessianBundle& b) {
  Matrix shifted = b.h_tilde;
  shifted.diagonal().array() += 1.0;
  try {
    return 0.5 * SpdMatrix(shifted).log_det();
  } catch (const NumericalError&) {
    throw NumericalError("eig_logdet_form: H~ + I is not positive definite (indefinite H~)");
  }
}

inline double eig_logdet_form(const BayesLinearProblem& p) { return eig_logdet_form(hessian_bundle(p)); }

/// tr(S H~).
inline double lemma_trace(const HessianBundle& b) { return b.s.matrix().cwiseProduct(b.h_tilde).sum(); }

inline double lemma_trace(const BayesLinearProblem& p) { return lemma_trace(hessian_bundle(p)); }

namespace detail {

/// Per-sample evaluator for D_kl(post(y) || prior).  Only the mean term of the
/// Gaussian KL depends on y; the log-det ratio and the trace term are fixed.
/// They are taken in whitened coordinates, where
///   log(det Gpr / det Gpost) = log det(H~ + I)   and   tr(Gpr^{-1} Gpost) = tr(S).
class PosteriorKlSampler {
 public:
  explicit PosteriorKlSampler(const BayesLinearProblem& p) : problem_(p), map_(p) {
    const HessianBundle b = hessian_bundle(p);
    const auto n = static_cast<double>(p.n());
    constant_ = 0.5 * (2.0 * eig_logdet_form(b) - n + b.s.matrix().trace());
  }

  /// Prior-whitened posterior mean shift Lpr^{-1} (m_post - m_pr) for sample index.
  Vector whitened_shift(std::uint64_t seed, std::uint64_t index) const {
    const Observation obs = synthesize_observation(problem_, seed, index);
    const Vector innovation = obs.y - problem_.f() * problem_.prior().mean();
    return problem_.prior().cov().solve_factor(map_.gain * innovation);
  }

  double kl(std::uint64_t seed, std::uint64_t index) const {
    return constant_ + 0.5 * whitened_shift(seed, index).squaredNorm();
  }

 private:
  const BayesLinearProblem& problem_;
  PosteriorMap map_;
  double constant_ = 0.0;
};

template <typename PerSample>
McEstimate run_monte_carlo(const McConfig& cfg, PerSample&& per_sample) {
  cfg.validate();
  std::vector<double> values(cfg.n_samples);
  parallel_for(cfg.n_samples, [&](std::size_t i) { values[i] = per_sample(i); }, cfg.workers);
  const MeanAndError me = mean_and_std_error(values);
  return {me.mean, me.std_error, cfg.n_samples};
}

}  // namespace detail

/// Monte Carlo estimate of E_prior E_{y|m} D_kl(post || prior) from joint
/// (m, y) draws.
inline McEstimate eig_monte_carlo(const BayesLinearProblem& p, const McConfig& cfg) {
  const detail::PosteriorKlSampler sampler(p);
  return detail::run_monte_carlo(cfg, [&](std::size_t i) { return sampler.kl(cfg.seed, i); });
}

/// Monte Carlo average of (m_post - m_pr)^T Gpr^{-1} (m_post - m_pr) against
/// the reference tr(S H~).  Only defined for a centered prior.
inline LemmaCheck lemma_mc_check(const BayesLinearProblem& p, const McConfig& cfg) {
  if (!p.prior().mean().isZero(0.0)) {
    throw ValidationError("lemma_mc_check: the trace identity is only checked for a zero prior mean");
  }
  const detail::PosteriorKlSampler sampler(p);
  const McEstimate mc = detail::run_monte_carlo(
      cfg, [&](std::size_t i) { return sampler.whitened_shift(cfg.seed, i).squaredNorm(); });
  return {mc.estimate, mc.std_error, lemma_trace(p)};
}

inline EigReport eig_report(const BayesLinearProblem& p, std::optional<McConfig> cfg = std::nullopt) {
  EigReport r;
  r.closed_form = eig_closed_form(p);
  r.logdet_form = eig_logdet_form(p);
  if (cfg) {
    const McEstimate mc = eig_monte_carlo(p, *cfg);
    r.mc_estimate = mc.estimate;
    r.mc_std_error = mc.std_error;
    r.mc_samples = mc.samples;
  }
  return r;
}

}  // namespace bayesoed
