#pragma once

// Bayesian D-optimal sensor selection.  A design picks rows of a candidate
// observation pool, each with its own independent noise variance; the
// objective is the EIG 1/2 log det(H~(d) + I) of the restricted problem.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bayesoed/eig.hpp"
#include "bayesoed/errors.hpp"
#include "bayesoed/gaussian.hpp"
#include "bayesoed/inverse_problem.hpp"

namespace bayesoed {

/// Gains closer than this are ties; the lowest index wins.
inline constexpr double kTieTolerance = 1e-12;

/// Upper bound on the number of designs exhaustive() will enumerate.
inline constexpr double kExhaustiveLimit = 1e6;

class CandidatePool {
 public:
  CandidatePool(Matrix rows, Vector noise_variances, GaussianMeasure prior,
                std::vector<std::string> labels = {})
      : rows_(std::move(rows)),
        variances_(std::move(noise_variances)),
        prior_(std::move(prior)),
        labels_(std::move(labels)) {
    std::ostringstream os;
    if (rows_.rows() < 1) os << "CandidatePool: pool has no candidate rows";
    else if (rows_.cols() != prior_.dim())
      os << "CandidatePool: rows have " << rows_.cols() << " columns but prior has dimension " << prior_.dim();
    else if (variances_.size() != rows_.rows())
      os << "CandidatePool: " << variances_.size() << " noise variances for " << rows_.rows() << " rows";
    else if (!rows_.allFinite()) os << "CandidatePool: non-finite candidate rows";
    else if (!labels_.empty() && labels_.size() != static_cast<std::size_t>(rows_.rows()))
      os << "CandidatePool: " << labels_.size() << " labels for " << rows_.rows() << " rows";
    else
      for (Eigen::Index i = 0; i < variances_.size(); ++i)
        if (!(variances_(i) > 0.0) || !std::isfinite(variances_(i))) {
          os << "CandidatePool: noise variance " << i << " is not a positive finite number";
          break;
        }
    if (!os.str().empty()) throw ValidationError(os.str());
  }

  const Matrix& rows() const { return rows_; }
  const Vector& noise_variances() const { return variances_; }
  const GaussianMeasure& prior() const { return prior_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  Eigen::Index n() const { return rows_.cols(); }

 private:
  Matrix rows_;
  Vector variances_;
  GaussianMeasure prior_;
  std::vector<std::string> labels_;
};

/// Binary selection over the candidate pool.
class Design {
 public:
  explicit Design(std::vector<std::uint8_t> selected) : selected_(std::move(selected)) {
    for (auto v : selected_)
      if (v > 1) throw ValidationError("Design: entries must be 0 or 1");
  }

  static Design none(std::size_t size) { return Design(std::vector<std::uint8_t>(size, 0)); }
  static Design all(std::size_t size) { return Design(std::vector<std::uint8_t>(size, 1)); }
  static Design from_indices(std::size_t size, const std::vector<std::size_t>& indices) {
    Design d = none(size);
    for (auto i : indices) {
      if (i >= size) throw ValidationError("Design: index out of range");
      d.selected_[i] = 1;
    }
    return d;
  }

  std::size_t size() const { return selected_.size(); }
  bool selected(std::size_t i) const { return selected_.at(i) != 0; }
  void set(std::size_t i, bool on) { selected_.at(i) = on ? 1 : 0; }
  const std::vector<std::uint8_t>& mask() const { return selected_; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto v : selected_) c += v;
    return c;
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < selected_.size(); ++i)
      if (selected_[i]) out.push_back(i);
    return out;
  }

  friend bool operator==(const Design&, const Design&) = default;

 private:
  std::vector<std::uint8_t> selected_;
};

struct DesignStep {
  std::size_t step = 0;
  std::optional<std::size_t> added;
  std::optional<std::size_t> removed;  // exchange swaps only
  double criterion = 0.0;

  bool operator==(const DesignStep&) const = default;
};

struct DesignResult {
  Design design;
  double criterion = 0.0;
  std::vector<DesignStep> trace;
};

namespace detail {

inline void check_design(const CandidatePool& pool, const Design& d) {
  if (d.size() != pool.size()) {
    std::ostringstream os;
    os << "design has length " << d.size() << " but pool has " << pool.size() << " candidates";
    throw ValidationError(os.str());
  }
}

}  // namespace detail

/// Problem with the selected rows and a diagonal noise covariance.  An empty
/// design becomes the single zero-row problem, whose EIG is 0.
inline BayesLinearProblem restrict(const CandidatePool& pool, const Design& d) {
  detail::check_design(pool, d);
  const auto idx = d.indices();
  if (idx.empty()) {
    return {ForwardModel(Matrix::Zero(1, pool.n())), SpdMatrix::identity(1), pool.prior()};
  }
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix f(k, pool.n());
  Vector var(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    f.row(r) = pool.rows().row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]));
    var(r) = pool.noise_variances()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]));
  }
  return {ForwardModel(std::move(f)), SpdMatrix(Matrix(var.asDiagonal())), pool.prior()};
}

inline double criterion(const CandidatePool& pool, const Design& d) { return eig_logdet_form(restrict(pool, d)); }

/// Precomputed prior-whitened candidate rows g_i = R f_i / sigma_i, so that
/// H~(d) = sum_{i in d} g_i g_i^T.
class DesignEvaluator {
 public:
  explicit DesignEvaluator(const CandidatePool& pool) : pool_(pool) {
    const SpdMatrix root = symmetric_sqrt(pool.prior().cov());
    whitened_ = root.matrix() * pool.rows().transpose();  // n x q
    for (Eigen::Index i = 0; i < whitened_.cols(); ++i)
      whitened_.col(i) /= std::sqrt(pool.noise_variances()(i));
  }

  /// Full re-evaluation: 1/2 log det(I + sum g_i g_i^T).
  double operator()(const Design& d) const {
    detail::check_design(pool_, d);
    const auto n = whitened_.rows();
    Matrix m = Matrix::Identity(n, n);
    for (auto i : d.indices()) {
      const auto col = whitened_.col(static_cast<Eigen::Index>(i));
      m.noalias() += col * col.transpose();
    }
    return 0.5 * SpdMatrix(m).log_det();
  }

  const Matrix& whitened_rows() const { return whitened_; }
  const CandidatePool& pool() const { return pool_; }

 private:
  const CandidatePool& pool_;
  Matrix whitened_;
};

struct GreedyOptions {
  /// Score candidates by 1/2 log(1 + g^T M^{-1} g) against the factorized
  /// current information matrix M instead of re-evaluating the criterion.
  bool rank_one_updates = false;
};

/// Forward greedy selection of k candidates.
inline DesignResult greedy(const CandidatePool& pool, std::size_t k, const GreedyOptions& opts = {}) {
  if (k < 1 || k > pool.size()) {
    std::ostringstream os;
    os << "greedy: budget " << k << " outside [1, " << pool.size() << "]";
    throw ValidationError(os.str());
  }
  const DesignEvaluator eval(pool);
  const auto n = pool.n();
  Design d = Design::none(pool.size());
  double current = 0.0;
  Matrix information = Matrix::Identity(n, n);
  std::vector<DesignStep> trace;

  for (std::size_t step = 1; step <= k; ++step) {
    std::optional<SpdMatrix> factored;
    if (opts.rank_one_updates) factored.emplace(information);
    std::size_t best = pool.size();
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (d.selected(i)) continue;
      double gain = 0.0;
      if (factored) {
        const Vector g = eval.whitened_rows().col(static_cast<Eigen::Index>(i));
        gain = 0.5 * std::log1p(g.dot(factored->solve(g)));
      } else {
        Design trial = d;
        trial.set(i, true);
        gain = eval(trial) - current;
      }
      if (gain > best_gain + kTieTolerance) {
        best_gain = gain;
        best = i;
      }
    }
    d.set(best, true);
    const auto g = eval.whitened_rows().col(static_cast<Eigen::Index>(best));
    information.noalias() += g * g.transpose();
    current = opts.rank_one_updates ? current + best_gain : eval(d);
    trace.push_back({step, best, std::nullopt, current});
  }
  return {d, criterion(pool, d), std::move(trace)};
}

/// Best-improvement 1-swap local search starting from d.
inline DesignResult exchange(const CandidatePool& pool, const Design& start) {
  detail::check_design(pool, start);
  const DesignEvaluator eval(pool);
  Design d = start;
  double current = eval(d);
  std::vector<DesignStep> trace;

  for (std::size_t step = 1;; ++step) {
    const auto chosen = d.indices();
    double best_value = current;
    std::optional<std::pair<std::size_t, std::size_t>> best_swap;
    for (auto out : chosen) {
      for (std::size_t in = 0; in < pool.size(); ++in) {
        if (d.selected(in)) continue;
        Design trial = d;
        trial.set(out, false);
        trial.set(in, true);
        const double value = eval(trial);
        if (value > best_value + kTieTolerance) {
          best_value = value;
          best_swap = {out, in};
        }
      }
    }
    if (!best_swap) break;
    d.set(best_swap->first, false);
    d.set(best_swap->second, true);
    current = best_value;
    trace.push_back({step, best_swap->second, best_swap->first, current});
  }
  return {d, criterion(pool, d), std::move(trace)};
}

/// Number of k-subsets of q items, as a double (no overflow).
inline double binomial(std::size_t q, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(q - k + i) / static_cast<double>(i);
  return std::round(c);
}

/// Enumerate every size-k design in lexicographic order and return the first maximizer.
inline DesignResult exhaustive(const CandidatePool& pool, std::size_t k) {
  const std::size_t q = pool.size();
  if (k < 1 || k > q) {
    std::ostringstream os;
    os << "exhaustive: budget " << k << " outside [1, " << q << "]";
    throw ValidationError(os.str());
  }
  if (binomial(q, k) > kExhaustiveLimit) {
    std::ostringstream os;
    os << "exhaustive: C(" << q << ", " << k << ") designs exceeds the limit of " << kExhaustiveLimit;
    throw ValidationError(os.str());
  }
  const DesignEvaluator eval(pool);
  std::vector<std::size_t> combo(k);
  for (std::size_t i = 0; i < k; ++i) combo[i] = i;

  std::vector<std::size_t> best_combo = combo;
  double best_value = -std::numeric_limits<double>::infinity();
  while (true) {
    const double value = eval(Design::from_indices(q, combo));
    if (value > best_value + kTieTolerance) {
      best_value = value;
      best_combo = combo;
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && combo[i - 1] == q - k + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
  const Design d = Design::from_indices(q, best_combo);
  return {d, criterion(pool, d), {}};
}

}  // namespace bayesoed
