#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "bayesoed/errors.hpp"

namespace bayesoed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative Frobenius asymmetry accepted by SpdMatrix before symmetrizing.
inline constexpr double kSymmetryTolerance = 1e-12;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline double relative_asymmetry(const Matrix& m) {
  const double scale = m.norm();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).norm() / scale;
}

/// Dense symmetric positive definite matrix with its Cholesky factor M = L L^T.
///
/// Construction fails hard: a non-square, non-finite, asymmetric (beyond
/// kSymmetryTolerance relative) or non-positive-definite input throws.  There
/// is no automatic regularization; use with_jitter() to add an explicit
/// diagonal shift.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& m) { init(m); }

  /// Construct from m + jitter * I.  jitter must be >= 0.
  static SpdMatrix with_jitter(const Matrix& m, double jitter) {
    if (!(jitter >= 0.0)) throw ValidationError("SpdMatrix: jitter must be nonnegative");
    if (m.rows() != m.cols()) throw ValidationError("SpdMatrix: matrix is not square");
    Matrix shifted = m;
    shifted.diagonal().array() += jitter;
    return SpdMatrix(shifted);
  }

  static SpdMatrix identity(Eigen::Index n) { return SpdMatrix(Matrix::Identity(n, n)); }

  Eigen::Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }

  /// Lower-triangular factor L.
  Matrix factor() const { return llt_.matrixL(); }

  /// 2 * sum(log L_ii).
  double log_det() const {
    const auto& lu = llt_.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < lu.rows(); ++i) s += std::log(lu(i, i));
    return 2.0 * s;
  }

  template <typename Rhs>
  typename Rhs::PlainObject solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    check_rows(rhs.rows());
    return llt_.solve(rhs);
  }

  Vector solve(const Vector& rhs) const {
    check_rows(rhs.rows());
    return llt_.solve(rhs);
  }

  /// L * z.
  template <typename Rhs>
  typename Rhs::PlainObject apply_factor(const Eigen::MatrixBase<Rhs>& z) const {
    check_rows(z.rows());
    return llt_.matrixL() * z;
  }

  /// L^{-1} * b, a single triangular solve.
  template <typename Rhs>
  typename Rhs::PlainObject solve_factor(const Eigen::MatrixBase<Rhs>& b) const {
    check_rows(b.rows());
    return llt_.matrixL().solve(b);
  }

  Matrix inverse() const {
    Matrix inv = llt_.solve(Matrix::Identity(dim(), dim()));
    return 0.5 * (inv + inv.transpose());
  }

 private:
  void init(const Matrix& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
      std::ostringstream os;
      os << "SpdMatrix: expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
      throw ValidationError(os.str());
    }
    if (!all_finite(m)) throw ValidationError("SpdMatrix: non-finite entries");
    const double asym = relative_asymmetry(m);
    if (asym > kSymmetryTolerance) {
      std::ostringstream os;
      os << "SpdMatrix: matrix is not symmetric (relative asymmetry " << asym << ")";
      throw ValidationError(os.str());
    }
    matrix_ = 0.5 * (m + m.transpose());
    llt_.compute(matrix_);
    bool ok = llt_.info() == Eigen::Success;
    if (ok) {
      const auto& lu = llt_.matrixLLT();
      for (Eigen::Index i = 0; i < lu.rows(); ++i) {
        if (!(lu(i, i) > 0.0) || !std::isfinite(lu(i, i))) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) throw NumericalError("SpdMatrix: matrix is not positive definite");
  }

  void check_rows(Eigen::Index rows) const {
    if (rows != dim()) {
      std::ostringstream os;
      os << "SpdMatrix: right-hand side has " << rows << " rows, expected " << dim();
      throw ValidationError(os.str());
    }
  }

  Matrix matrix_;
  Eigen::LLT<Matrix> llt_;
};

inline double log_det(const SpdMatrix& m) { return m.log_det(); }

/// Symmetric positive definite square root R (R * R = m) via eigendecomposition.
inline SpdMatrix symmetric_sqrt(const SpdMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix());
  if (eig.info() != Eigen::Success || !eig.eigenvalues().allFinite()) {
    throw NumericalError("symmetric_sqrt: eigendecomposition failed");
  }
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = eig.eigenvectors();
  Matrix r = v * root.asDiagonal() * v.transpose();
  return SpdMatrix(0.5 * (r + r.transpose()));
}

}  // namespace bayesoed
