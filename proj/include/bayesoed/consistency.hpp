#pragma once

// Battery of identity checks for one inverse problem: the two closed forms of
// the EIG, the posterior covariance routes, the trace identities behind them,
// the Monte Carlo estimators and the low-rank path.

#include <cmath>
#include <string>
#include <vector>

#include "bayesoed/eig.hpp"
#include "bayesoed/inverse_problem.hpp"
#include "bayesoed/lowrank.hpp"

namespace bayesoed {

struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;  // absolute, already scaled
  bool passed = false;

  bool operator==(const IdentityCheck&) const = default;
};

/// Scalar tolerance scaled as tol * (1 + |reference|).
inline IdentityCheck scalar_check(std::string name, double value, double reference, double rel_tol) {
  const double tol = rel_tol * (1.0 + std::abs(reference));
  return {std::move(name), value, reference, tol, std::abs(value - reference) <= tol};
}

/// Frobenius-relative matrix agreement; value holds ||a - b||_F, reference ||b||_F.
inline IdentityCheck matrix_check(std::string name, const Matrix& a, const Matrix& b, double rel_tol) {
  const double diff = (a - b).norm();
  const double scale = b.norm();
  const double tol = rel_tol * scale;
  return {std::move(name), diff, scale, tol, diff <= tol};
}

/// Monte Carlo estimate within `sigmas` standard errors of the reference.
inline IdentityCheck statistical_check(std::string name, double estimate, double std_error, double reference,
                                       double sigmas = 3.0) {
  const double tol = sigmas * std_error;
  return {std::move(name), estimate, reference, tol, std::abs(estimate - reference) <= tol};
}

inline constexpr double kClosedFormTolerance = 1e-9;
inline constexpr double kIdentityTolerance = 1e-10;

/// tr(Gpr^{-1} Gpost) computed from the posterior covariance directly.
inline double prior_relative_trace(const BayesLinearProblem& p, const SpdMatrix& post_cov) {
  return p.prior().cov().solve(post_cov.matrix()).trace();
}

/// tr(S^2 H~) + tr(S^2 H~^2), the two terms of the inner expectation.
inline double inner_expectation_terms(const HessianBundle& b) {
  const Matrix s2 = b.s.matrix() * b.s.matrix();
  return (s2 * b.h_tilde).trace() + (s2 * b.h_tilde * b.h_tilde).trace();
}

inline std::vector<IdentityCheck> run_consistency_checks(const BayesLinearProblem& p, const McConfig& mc) {
  std::vector<IdentityCheck> out;
  const HessianBundle b = hessian_bundle(p);
  const double closed = eig_closed_form(p);
  const double logdet = eig_logdet_form(b);
  out.push_back(scalar_check("eig_closed_form == eig_logdet_form", closed, logdet, kClosedFormTolerance));

  const SpdMatrix direct = posterior_covariance(p);
  out.push_back(matrix_check("posterior covariance: direct == R S R", posterior_cov_via_s(p).matrix(),
                             direct.matrix(), kIdentityTolerance));

  const double trace_s = b.s.matrix().trace();
  out.push_back(scalar_check("tr(Gpr^-1 Gpost) == tr(S)", prior_relative_trace(p, direct), trace_s,
                             kIdentityTolerance));
  const double lemma = lemma_trace(b);
  out.push_back(scalar_check("tr(S^2 H~) + tr(S^2 H~^2) == tr(S H~)", inner_expectation_terms(b), lemma,
                             kIdentityTolerance));
  out.push_back(scalar_check("tr(S H~) == n - tr(S)", lemma, static_cast<double>(p.n()) - trace_s,
                             kIdentityTolerance));

  const auto spectrum = full_spectrum(b.h_tilde);
  const auto full = truncated_spectrum(b.h_tilde, RankPolicy{spectrum.size()});
  out.push_back(scalar_check("low-rank EIG at full rank == eig_logdet_form", eig_from_lowrank(full), logdet,
                             kIdentityTolerance));
  const std::size_t half = spectrum.size() / 2;
  const auto truncated = truncated_spectrum(b.h_tilde, RankPolicy{half});
  out.push_back(scalar_check("truncation_error certificate", logdet - eig_from_lowrank(truncated),
                             truncation_error(spectrum, half), 1e-12));

  const McEstimate eig_mc = eig_monte_carlo(p, mc);
  out.push_back(statistical_check("Monte Carlo EIG within 3 standard errors", eig_mc.estimate, eig_mc.std_error,
                                  closed));
  // The trace identity is stated for a centered prior; the EIG does not depend
  // on the prior mean, so the check runs on the centered problem.
  const LemmaCheck lm = lemma_mc_check(p.with_prior_mean(Vector::Zero(p.n())), mc);
  out.push_back(statistical_check("Monte Carlo E[m_post^T Gpr^-1 m_post] within 3 standard errors", lm.estimate,
                                  lm.std_error, lm.reference));
  return out;
}

}  // namespace bayesoed
