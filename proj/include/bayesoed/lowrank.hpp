#pragma once

// Spectral (low-rank) representation of the prior-preconditioned Hessian H~
// and EIG evaluation from it: EIG = 1/2 sum_i log(1 + lambda_i).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <variant>
#include <vector>

#include "bayesoed/errors.hpp"
#include "bayesoed/random.hpp"
#include "bayesoed/spd_matrix.hpp"

namespace bayesoed {

/// Eigenvalues below this fraction of the largest are clamped to zero.
inline constexpr double kEigenvalueFloor = 1e-12;

struct LowRankHessian {
  std::vector<double> eigenvalues;  // nonincreasing, >= 0
  Matrix eigenvectors;              // n x r, orthonormal columns

  std::size_t rank() const { return eigenvalues.size(); }
};

struct RankPolicy {
  std::size_t rank;
};

/// Keep the fewest eigenpairs whose discarded tail satisfies
/// sum_{i>r} log(1 + lambda_i) <= tolerance.
struct TailTolerancePolicy {
  double tolerance;
};

using TruncationPolicy = std::variant<RankPolicy, TailTolerancePolicy>;

namespace detail {

inline void floor_spectrum(std::vector<double>& values) {
  const double top = values.empty() ? 0.0 : std::max(values.front(), 0.0);
  for (double& v : values) {
    if (v < kEigenvalueFloor * top || v <= 0.0) v = 0.0;
  }
}

struct SortedEigen {
  std::vector<double> values;
  Matrix vectors;
};

/// Symmetric eigendecomposition sorted nonincreasing, floored.
inline SortedEigen sorted_eigen(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success || !solver.eigenvalues().allFinite()) {
    throw NumericalError("symmetric eigendecomposition failed");
  }
  const auto n = sym.rows();
  SortedEigen out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[static_cast<std::size_t>(i)] = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  floor_spectrum(out.values);
  return out;
}

inline void require_symmetric(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) throw ValidationError(std::string(who) + ": matrix is not square");
  if (!m.allFinite()) throw ValidationError(std::string(who) + ": non-finite entries");
  if (relative_asymmetry(m) > 1e-10) throw ValidationError(std::string(who) + ": matrix is not symmetric");
}

}  // namespace detail

/// Full spectrum of a symmetric PSD matrix, nonincreasing and floored.
inline std::vector<double> full_spectrum(const Matrix& h_tilde) {
  detail::require_symmetric(h_tilde, "full_spectrum");
  return detail::sorted_eigen(0.5 * (h_tilde + h_tilde.transpose())).values;
}

/// 1/2 sum_{i>r} log(1 + lambda_i): exact gap between the full and the rank-r EIG.
inline double truncation_error(const std::vector<double>& spectrum, std::size_t r) {
  if (r > spectrum.size()) {
    std::ostringstream os;
    os << "truncation_error: rank " << r << " exceeds spectrum length " << spectrum.size();
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (spectrum[i] < 0.0 || (i > 0 && spectrum[i] > spectrum[i - 1])) {
      throw ValidationError("truncation_error: spectrum must be nonnegative and nonincreasing");
    }
  }
  double tail = 0.0;
  for (std::size_t i = r; i < spectrum.size(); ++i) tail += std::log1p(spectrum[i]);
  return 0.5 * tail;
}

/// Dense truncated eigendecomposition of H~.  Exactly-zero (floored)
/// eigenvalues are never kept, so H~ = 0 yields rank 0 under either policy.
inline LowRankHessian truncated_spectrum(const Matrix& h_tilde, const TruncationPolicy& policy) {
  detail::require_symmetric(h_tilde, "truncated_spectrum");
  const auto eig = detail::sorted_eigen(0.5 * (h_tilde + h_tilde.transpose()));
  const auto positive = static_cast<std::size_t>(
      std::count_if(eig.values.begin(), eig.values.end(), [](double v) { return v > 0.0; }));

  std::size_t keep = 0;
  if (const auto* by_rank = std::get_if<RankPolicy>(&policy)) {
    keep = std::min(by_rank->rank, positive);
  } else {
    const double tol = std::get<TailTolerancePolicy>(policy).tolerance;
    if (!(tol >= 0.0)) throw ValidationError("truncated_spectrum: tail tolerance must be nonnegative");
    // Walk back from the end accumulating the tail until it would exceed tol.
    keep = positive;
    double tail = 0.0;
    while (keep > 0) {
      const double next = tail + std::log1p(eig.values[keep - 1]);
      if (next > tol) break;
      tail = next;
      --keep;
    }
  }

  LowRankHessian out;
  out.eigenvalues.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(keep));
  out.eigenvectors = eig.vectors.leftCols(static_cast<Eigen::Index>(keep));
  return out;
}

inline double eig_from_lowrank(const LowRankHessian& lr) {
  double s = 0.0;
  for (double v : lr.eigenvalues) s += std::log1p(v);
  return 0.5 * s;
}

/// y = H~ x.
using MatVec = std::function<Vector(const Vector&)>;

struct RandomizedOptions {
  std::size_t oversampling = 8;
  std::size_t power_iterations = 1;
  std::uint64_t seed = 0;
};

namespace detail {

inline Matrix apply_columns(const MatVec& apply, const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Vector col = apply(x.col(j));
    if (col.size() != x.rows()) {
      std::ostringstream os;
      os << "randomized_spectrum: callback returned a vector of length " << col.size() << ", expected "
         << x.rows();
      throw ValidationError(os.str());
    }
    y.col(j) = col;
  }
  return y;
}

inline Matrix orthonormal_basis(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

}  // namespace detail

/// Randomized range finder with power iterations followed by Rayleigh-Ritz.
/// Gaussian test column j is drawn from stream (seed, j).
inline LowRankHessian randomized_spectrum(const MatVec& apply, std::size_t n, std::size_t r,
                                          const RandomizedOptions& opts) {
  const std::size_t width = r + opts.oversampling;
  if (n < 1) throw ValidationError("randomized_spectrum: n must be positive");
  if (width > n) {
    std::ostringstream os;
    os << "randomized_spectrum: rank + oversampling (" << width << ") exceeds dimension " << n;
    throw ValidationError(os.str());
  }
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(width);

  Matrix omega(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    NormalStream stream(opts.seed, static_cast<std::uint64_t>(j));
    omega.col(j) = stream.normal_vector(rows);
  }

  Matrix y = detail::apply_columns(apply, omega);
  for (std::size_t t = 0; t < opts.power_iterations; ++t) {
    y = detail::apply_columns(apply, detail::orthonormal_basis(y));
  }
  const Matrix q = detail::orthonormal_basis(y);
  const Matrix aq = detail::apply_columns(apply, q);
  Matrix t = q.transpose() * aq;
  t = 0.5 * (t + t.transpose());

  const auto ritz = detail::sorted_eigen(t);
  LowRankHessian out;
  out.eigenvalues.assign(ritz.values.begin(), ritz.values.begin() + static_cast<std::ptrdiff_t>(r));
  out.eigenvectors = q * ritz.vectors.leftCols(static_cast<Eigen::Index>(r));
  return out;
}

/// Convenience overload for an explicit matrix.
inline LowRankHessian randomized_spectrum(const Matrix& h_tilde, std::size_t r,
                                          const RandomizedOptions& opts = {}) {
  detail::require_symmetric(h_tilde, "randomized_spectrum");
  return randomized_spectrum([&h_tilde](const Vector& x) -> Vector { return h_tilde * x; },
                             static_cast<std::size_t>(h_tilde.rows()), r, opts);
}

}  // namespace bayesoed
