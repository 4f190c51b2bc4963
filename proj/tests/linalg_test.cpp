#include "dualqp/linalg.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace dualqp {
namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  DenseMatrix m(r, c);
  for (double& v : m.data()) v = nd(gen);
  return m;
}

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

TEST(MatVec, Examples) {
  EXPECT_EQ(mat_vec(DenseMatrix::identity(2), Vector{3, -1}), (Vector{3, -1}));
  EXPECT_EQ(mat_vec(DenseMatrix::from_rows({{1, 2}, {3, 4}}), Vector{1, 1}), (Vector{3, 7}));
  EXPECT_EQ(mat_vec(DenseMatrix(3, 2), Vector{5, -7}), (Vector{0, 0, 0}));
}

TEST(MatVec, DimensionMismatchThrows) {
  EXPECT_THROW(mat_vec(DenseMatrix(2, 3), Vector{1, 2}), DimensionError);
}

TEST(MatVec, TransposeProductMatchesExplicitTranspose) {
  std::mt19937_64 gen(3);
  const DenseMatrix m = random_matrix(5, 3, gen);
  const Vector v{0.5, -1.0, 2.0, 0.25, 3.0};
  Vector out(3);
  mat_t_vec_into(m, v, out);
  const Vector ref = mat_vec(m.transposed(), v);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out[i], ref[i], 1e-14);
}

TEST(EigExtremes, Examples) {
  EigExtremes e = eig_extremes_spd(DenseMatrix::identity(3));
  EXPECT_DOUBLE_EQ(e.lambda_min, 1.0);
  EXPECT_DOUBLE_EQ(e.lambda_max, 1.0);
  e = eig_extremes_spd(DenseMatrix::diagonal(Vector{2, 5}));
  EXPECT_NEAR(e.lambda_min, 2.0, 1e-14);
  EXPECT_NEAR(e.lambda_max, 5.0, 1e-14);
  e = eig_extremes_spd(DenseMatrix::from_rows({{2, 1}, {1, 2}}));
  EXPECT_NEAR(e.lambda_min, 1.0, 1e-14);
  EXPECT_NEAR(e.lambda_max, 3.0, 1e-14);
}

TEST(EigExtremes, ClosedForm2x2) {
  // Eigenvalues of [[a,b],[b,c]]: (a+c)/2 +- sqrt(((a-c)/2)^2 + b^2).
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ud(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = 5.0 + ud(gen), c = 5.0 + ud(gen), b = ud(gen);
    const double mid = 0.5 * (a + c), rad = std::hypot(0.5 * (a - c), b);
    const EigExtremes e = symmetric_eig_extremes(DenseMatrix::from_rows({{a, b}, {b, c}}));
    EXPECT_NEAR(e.lambda_min, mid - rad, 1e-8);
    EXPECT_NEAR(e.lambda_max, mid + rad, 1e-8);
  }
}

TEST(EigExtremes, MatchesEigenSolverOnRandomSpd) {
  std::mt19937_64 gen(5);
  for (std::size_t n : {3u, 10u, 40u, 120u}) {
    const DenseMatrix m = random_matrix(n, n, gen);
    DenseMatrix q = gram(m);
    for (std::size_t i = 0; i < n; ++i) q(i, i) += 1e-3;
    const EigExtremes e = eig_extremes_spd(q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(q));
    const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    EXPECT_NEAR(e.lambda_max, lmax, 1e-10 * lmax) << "n=" << n;
    EXPECT_NEAR(e.lambda_min, lmin, 1e-10 * lmax) << "n=" << n;
  }
}

TEST(EigExtremes, ClusteredSpectrum) {
  Vector d(30, 1.0);
  d[7] = 1.0 + 1e-9;
  d[20] = 1.0 - 1e-9;
  const EigExtremes e = eig_extremes_spd(DenseMatrix::diagonal(d));
  EXPECT_NEAR(e.lambda_max, 1.0 + 1e-9, 1e-14);
  EXPECT_NEAR(e.lambda_min, 1.0 - 1e-9, 1e-14);
}

TEST(EigExtremes, RejectsIndefiniteAndNonFinite) {
  try {
    eig_extremes_spd(DenseMatrix::diagonal(Vector{1.0, -2.0}));
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("Assumption 1(b)"), std::string::npos);
  }
  DenseMatrix bad = DenseMatrix::identity(2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(eig_extremes_spd(bad), std::invalid_argument);
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(DenseMatrix::identity(4)), 1.0, 1e-14);
  EXPECT_NEAR(spectral_norm(DenseMatrix::diagonal(Vector{3, -4})), 4.0, 1e-14);
  EXPECT_NEAR(spectral_norm(DenseMatrix::from_rows({{0, 2}, {0, 0}})), 2.0, 1e-14);
  EXPECT_EQ(spectral_norm(DenseMatrix(0, 3)), 0.0);
}

TEST(SpectralNorm, MatchesSvdAndBoundedByFrobenius) {
  std::mt19937_64 gen(9);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{7, 3}, {3, 7}, {75, 50}}) {
    const DenseMatrix m = random_matrix(r, c, gen);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    const double ref = svd.singularValues()(0);
    EXPECT_NEAR(spectral_norm(m), ref, 1e-10 * ref);
    EXPECT_LE(spectral_norm(m), frobenius_norm(m));
  }
}

TEST(FrobeniusNorm, Examples) {
  EXPECT_DOUBLE_EQ(frobenius_norm(DenseMatrix::identity(2)), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(frobenius_norm(DenseMatrix::from_rows({{1, 2}, {3, 4}})), std::sqrt(30.0));
  EXPECT_EQ(frobenius_norm(DenseMatrix(2, 2)), 0.0);
}

TEST(BoxProject, Examples) {
  const Box unit = make_box({0, 0}, {1, 1});
  EXPECT_EQ(box_project(Vector{-1, 2}, unit), (Vector{0, 1}));
  EXPECT_EQ(box_project(Vector{0.25, 0.75}, unit), (Vector{0.25, 0.75}));
  const Box half = make_box({0}, {kInf});
  EXPECT_EQ(box_project(Vector{1e9}, half), (Vector{1e9}));
}

TEST(BoxProject, IdempotentAndNonexpansive) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd(0.0, 3.0);
  const Box box = make_box(Vector(6, -1.0), Vector(6, 2.0));
  for (int trial = 0; trial < 200; ++trial) {
    Vector a(6), b(6);
    for (auto& v : a) v = nd(gen);
    for (auto& v : b) v = nd(gen);
    const Vector pa = box_project(a, box), pb = box_project(b, box);
    EXPECT_EQ(box_project(pa, box), pa);
    EXPECT_LE(dist2(pa, pb), dist2(a, b) + 1e-15);
  }
}

TEST(NonnegProject, Examples) {
  EXPECT_EQ(nonneg_project(Vector{-1, 2}), (Vector{0, 2}));
  EXPECT_EQ(nonneg_project(Vector{0, 3, 4}), (Vector{0, 3, 4}));
  const Vector z = nonneg_project(Vector{0.0, -0.0});
  EXPECT_FALSE(std::signbit(z[0]));
  EXPECT_FALSE(std::signbit(z[1]));
}

TEST(MatVecProfile, CountsOnlyWhileEnabled) {
  const DenseMatrix m = DenseMatrix::identity(3);
  const Vector v{1, 2, 3};
  mat_vec(m, v);
  ScopedMatVecProfile scope;
  mat_vec(m, v);
  Vector out(3);
  mat_t_vec_into(m, v, out);
  const MatVecProfile p = scope.snapshot();
  EXPECT_EQ(p.calls, 2u);
  EXPECT_EQ(p.flops, 36u);
}

}  // namespace
}  // namespace dualqp
