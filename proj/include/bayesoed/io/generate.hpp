#pragma once

// Synthetic problem generators.
//
// Both kinds produce a CandidatePool (independent noise per row), which also
// serves as the full inverse problem with every row selected.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bayesoed/design.hpp"
#include "bayesoed/errors.hpp"
#include "bayesoed/random.hpp"

namespace bayesoed::io {

enum class GeneratorKind { kRandom, kDeconvolution1d };

inline GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "random") return GeneratorKind::kRandom;
  if (s == "deconvolution-1d") return GeneratorKind::kDeconvolution1d;
  throw ValidationError("unknown generator kind '" + s + "' (expected random or deconvolution-1d)");
}

struct GenerateParams {
  GeneratorKind kind = GeneratorKind::kRandom;
  long n = 4;
  long q = 6;
  std::uint64_t seed = 0;
  std::optional<double> noise_std;  // default 1 (random) or 0.05 (deconvolution)
  double prior_jitter = 1e-2;
  double kernel_width = 0.05;   // deconvolution blur width w
  double length_scale = 0.1;    // deconvolution prior correlation length
  double prior_std = 1.0;       // deconvolution prior marginal std
  std::vector<double> stations;  // deconvolution; uniform midpoints when empty

  void validate() const {
    std::ostringstream os;
    if (n < 1 || q < 1) os << "dimensions must be at least 1 (n=" << n << ", q=" << q << ")";
    else if (noise_std && !(*noise_std > 0.0)) os << "noise std must be positive";
    else if (!(prior_jitter >= 0.0)) os << "prior jitter must be nonnegative";
    else if (kind == GeneratorKind::kDeconvolution1d && !(kernel_width > 0.0)) os << "kernel width must be positive";
    else if (kind == GeneratorKind::kDeconvolution1d && !(length_scale > 0.0)) os << "length scale must be positive";
    else if (kind == GeneratorKind::kDeconvolution1d && !(prior_std > 0.0)) os << "prior std must be positive";
    else if (!stations.empty() && static_cast<long>(stations.size()) != q)
      os << stations.size() << " stations given for q=" << q;
    if (!os.str().empty()) throw ValidationError("generate: " + os.str());
  }
};

namespace detail {

inline Matrix normal_matrix(std::uint64_t seed, std::uint64_t stream, long rows, long cols) {
  NormalStream s(seed, stream);
  Matrix m(rows, cols);
  for (long c = 0; c < cols; ++c)
    for (long r = 0; r < rows; ++r) m(r, c) = s.normal();
  return m;
}

inline double grid_point(long j, long n) {
  return n == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(n - 1);
}

inline CandidatePool generate_random(const GenerateParams& p) {
  const Matrix f = normal_matrix(p.seed, 0, p.q, p.n);
  const Matrix a = normal_matrix(p.seed, 1, p.n, p.n);
  Matrix prior = a.transpose() * a / static_cast<double>(p.n);
  prior = 0.5 * (prior + prior.transpose());
  prior.diagonal().array() += p.prior_jitter;
  const double sd = p.noise_std.value_or(1.0);
  const Vector var = Vector::Constant(p.q, sd * sd);
  return {f, var, GaussianMeasure::centered(SpdMatrix(prior))};
}

inline CandidatePool generate_deconvolution(const GenerateParams& p) {
  std::vector<double> stations = p.stations;
  if (stations.empty())
    for (long i = 0; i < p.q; ++i) stations.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(p.q));

  const double w = p.kernel_width;
  const double h = 1.0 / static_cast<double>(p.n);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * w);
  Matrix f(p.q, p.n);
  for (long i = 0; i < p.q; ++i) {
    for (long j = 0; j < p.n; ++j) {
      const double d = grid_point(j, p.n) - stations[static_cast<std::size_t>(i)];
      f(i, j) = h * norm * std::exp(-d * d / (2.0 * w * w));
    }
  }

  Matrix prior(p.n, p.n);
  const double ell = p.length_scale;
  for (long i = 0; i < p.n; ++i) {
    for (long j = 0; j < p.n; ++j) {
      const double d = grid_point(i, p.n) - grid_point(j, p.n);
      prior(i, j) = p.prior_std * p.prior_std * std::exp(-d * d / (2.0 * ell * ell));
    }
  }
  prior.diagonal().array() += p.prior_jitter;

  const double sd = p.noise_std.value_or(0.05);
  const Vector var = Vector::Constant(p.q, sd * sd);
  std::vector<std::string> labels;
  for (long i = 0; i < p.q; ++i) {
    std::ostringstream os;
    os << "x=" << stations[static_cast<std::size_t>(i)];
    labels.push_back(os.str());
  }
  return {f, var, GaussianMeasure::centered(SpdMatrix(prior)), labels};
}

}  // namespace detail

inline CandidatePool generate(const GenerateParams& params) {
  params.validate();
  return params.kind == GeneratorKind::kRandom ? detail::generate_random(params)
                                               : detail::generate_deconvolution(params);
}

}  // namespace bayesoed::io
