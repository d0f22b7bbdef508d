#include <cmath>

#include <gtest/gtest.h>

#include "bayesoed/eig.hpp"
#include "bayesoed/lowrank.hpp"
#include "test_support.hpp"

namespace bayesoed {
namespace {

using testing::Rng;

Matrix exact_rank(Rng& rng, Eigen::Index n, Eigen::Index r) {
  const Matrix g = testing::gaussian_matrix(rng, n, r);
  Matrix h = g * g.transpose();
  return 0.5 * (h + h.transpose());
}

/// Q diag(values) Q^T with a random orthogonal Q.
Matrix with_spectrum(Rng& rng, const Vector& values) {
  const auto n = values.size();
  const Matrix q = testing::gaussian_matrix(rng, n, n).householderQr().householderQ();
  Matrix h = q * values.asDiagonal() * q.transpose();
  return 0.5 * (h + h.transpose());
}

double orthonormality_defect(const Matrix& v) {
  return (v.transpose() * v - Matrix::Identity(v.cols(), v.cols())).norm();
}

TEST(TruncatedSpectrum, ZeroMatrix) {
  const auto lr = truncated_spectrum(Matrix::Zero(4, 4), RankPolicy{2});
  EXPECT_EQ(lr.rank(), 0u);
  EXPECT_EQ(truncated_spectrum(Matrix::Zero(4, 4), TailTolerancePolicy{0.0}).rank(), 0u);
  EXPECT_EQ(eig_from_lowrank(lr), 0.0);
}

TEST(TruncatedSpectrum, Diagonal) {
  const auto lr = truncated_spectrum(Matrix(Eigen::Vector3d(3.0, 1.0, 0.0).asDiagonal()), RankPolicy{2});
  ASSERT_EQ(lr.rank(), 2u);
  EXPECT_NEAR(lr.eigenvalues[0], 3.0, 1e-15);
  EXPECT_NEAR(lr.eigenvalues[1], 1.0, 1e-15);
  EXPECT_LE(orthonormality_defect(lr.eigenvectors), 1e-10);
}

TEST(TruncatedSpectrum, RecoversExactRank) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = exact_rank(rng, 8, 3);
    const auto lr = truncated_spectrum(h, TailTolerancePolicy{0.0});
    ASSERT_EQ(lr.rank(), 3u);
    const Vector lambda = Eigen::Map<const Vector>(lr.eigenvalues.data(), 3);
    const Matrix rebuilt = lr.eigenvectors * lambda.asDiagonal() * lr.eigenvectors.transpose();
    EXPECT_LE((rebuilt - h).norm(), 1e-9 * h.norm());
    EXPECT_LE(orthonormality_defect(lr.eigenvectors), 1e-10);
  }
}

TEST(TruncatedSpectrum, TolerancePolicyKeepsTailBelowTau) {
  Rng rng(2);
  Vector values(6);
  values << 5.0, 2.0, 0.5, 0.1, 0.01, 0.001;
  const Matrix h = with_spectrum(rng, values);
  const auto spectrum = full_spectrum(h);
  for (double tau : {0.0, 0.005, 0.05, 0.5, 10.0}) {
    const auto lr = truncated_spectrum(h, TailTolerancePolicy{tau});
    EXPECT_LE(2.0 * truncation_error(spectrum, lr.rank()), tau + 1e-14);
    if (lr.rank() > 0) EXPECT_GT(2.0 * truncation_error(spectrum, lr.rank() - 1), tau);
  }
  EXPECT_THROW(truncated_spectrum(h, TailTolerancePolicy{-1.0}), ValidationError);
}

TEST(TruncatedSpectrum, RejectsAsymmetric) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 1) = 0.5;
  EXPECT_THROW(truncated_spectrum(m, RankPolicy{1}), ValidationError);
}

TEST(TruncatedSpectrum, NegativeRoundoffFloored) {
  const auto spectrum = full_spectrum(Matrix(Eigen::Vector3d(1.0, -1e-15, 0.0).asDiagonal()));
  for (double v : spectrum) EXPECT_GE(v, 0.0);
}

TEST(EigFromLowrank, Examples) {
  EXPECT_EQ(eig_from_lowrank(LowRankHessian{}), 0.0);
  LowRankHessian lr;
  lr.eigenvalues = {3.0, 1.0};
  EXPECT_NEAR(eig_from_lowrank(lr), 0.5 * (std::log(2.0) + std::log(4.0)), 1e-15);
}

TEST(EigFromLowrank, FullRankMatchesDense) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testing::random_problem(rng, 1 + trial % 8, 1 + trial % 6);
    const auto b = hessian_bundle(p);
    const auto lr = truncated_spectrum(b.h_tilde, RankPolicy{static_cast<std::size_t>(p.n())});
    const double dense = eig_logdet_form(b);
    EXPECT_NEAR(eig_from_lowrank(lr), dense, 1e-10 * (1.0 + dense));
  }
}

TEST(EigFromLowrank, MonotoneInRankAndCertified) {
  Rng rng(4);
  const auto p = testing::random_problem(rng, 7, 5);
  const auto b = hessian_bundle(p);
  const auto spectrum = full_spectrum(b.h_tilde);
  const double dense = eig_logdet_form(b);
  double previous = 0.0;
  for (std::size_t r = 0; r <= spectrum.size(); ++r) {
    const double value = eig_from_lowrank(truncated_spectrum(b.h_tilde, RankPolicy{r}));
    EXPECT_GE(value, previous);
    EXPECT_LE(value, dense + 1e-12);
    EXPECT_NEAR(dense - value, truncation_error(spectrum, r), 1e-12 * (1.0 + dense));
    previous = value;
  }
}

TEST(TruncationError, Examples) {
  EXPECT_EQ(truncation_error({3.0, 1.0, 1.0}, 3), 0.0);
  EXPECT_NEAR(truncation_error({3.0, 1.0, 1.0}, 1), std::log(2.0), 1e-15);
  EXPECT_THROW(truncation_error({3.0, 1.0}, 3), ValidationError);
  EXPECT_THROW(truncation_error({1.0, 3.0}, 1), ValidationError);
}

TEST(RandomizedSpectrum, ExactRankTwo) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = exact_rank(rng, 20, 2);
    const auto dense = full_spectrum(h);
    const auto lr = randomized_spectrum(h, 2, {.oversampling = 6, .power_iterations = 1, .seed = 11});
    ASSERT_EQ(lr.rank(), 2u);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(lr.eigenvalues[i], dense[i], 1e-8 * dense[i]);
    EXPECT_LE(orthonormality_defect(lr.eigenvectors), 1e-10);
  }
}

TEST(RandomizedSpectrum, ZeroOperator) {
  const auto lr = randomized_spectrum(Matrix::Zero(10, 10), 3, {.oversampling = 5});
  ASSERT_EQ(lr.rank(), 3u);
  for (double v : lr.eigenvalues) EXPECT_EQ(v, 0.0);
}

TEST(RandomizedSpectrum, FastDecayEig) {
  Rng rng(6);
  Vector values(30);
  for (int i = 0; i < 30; ++i) values(i) = std::pow(2.0, -(i + 1));
  const Matrix h = with_spectrum(rng, values);
  const auto dense = truncated_spectrum(h, RankPolicy{8});
  const auto lr = randomized_spectrum(h, 8, {});
  EXPECT_NEAR(eig_from_lowrank(lr), eig_from_lowrank(dense), 1e-4);
}

TEST(RandomizedSpectrum, DeterministicAndBoundedByDense) {
  Rng rng(7);
  Vector values(25);
  for (int i = 0; i < 25; ++i) values(i) = 10.0 / (1.0 + i * i);
  const Matrix h = with_spectrum(rng, values);
  const auto dense = full_spectrum(h);
  const auto a = randomized_spectrum(h, 5, {.seed = 3});
  const auto b = randomized_spectrum(h, 5, {.seed = 3});
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  for (std::size_t i = 0; i < a.rank(); ++i) EXPECT_LE(a.eigenvalues[i], dense[i] * (1.0 + 1e-8));
}

TEST(RandomizedSpectrum, Errors) {
  const MatVec wrong = [](const Vector& x) -> Vector { return Vector::Zero(x.size() + 1); };
  EXPECT_THROW(randomized_spectrum(wrong, 10, 2, {}), ValidationError);
  EXPECT_THROW(randomized_spectrum(Matrix::Identity(5, 5), 2, {.oversampling = 8}), ValidationError);
}

}  // namespace
}  // namespace bayesoed
