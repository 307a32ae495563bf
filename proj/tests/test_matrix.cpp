#include "selfenc/matrix.hpp"

#include <cmath>
#include <gtest/gtest.h>

#include "selfenc/rng.hpp"

namespace selfenc {
namespace {

// Element-wise triple-loop product, written independently of the library
// implementation so the two can check each other.
Matrix oracle_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) sum += a(i, k) * b(k, j);
      out(i, j) = sum;
    }
  return out;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

TEST(Matrix, ConstructionValidates) {
  EXPECT_THROW(Matrix(0, 3), std::invalid_argument);
  EXPECT_THROW(Matrix(3, 0), std::invalid_argument);
  const Matrix m(2, 3);
  EXPECT_EQ(m.rows, 2u);
  EXPECT_EQ(m.cols, 3u);
  EXPECT_EQ(m.data.size(), 6u);
  for (double v : m.data) EXPECT_EQ(v, 0.0);
}

TEST(Matrix, FromRowsRejectsRagged) {
  EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), std::invalid_argument);
  const Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(m(1, 0), 3.0);
}

TEST(Matmul, IdentityCase) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(Matrix::identity(2), a), a);
  EXPECT_EQ(matmul(a, Matrix::identity(2)), a);
}

TEST(Matmul, ProjectorCase) {
  const Matrix p = Matrix::from_rows({{1, 0}, {0, 0}});
  const Matrix v = Matrix::from_rows({{5}, {7}});
  EXPECT_EQ(matmul(p, v), Matrix::from_rows({{5}, {0}}));
}

TEST(Matmul, MatchesTripleLoopOracle) {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.below(6), k = 1 + rng.below(6), n = 1 + rng.below(6);
    const Matrix a = random_matrix(m, k, rng, -5.0, 5.0);
    const Matrix b = random_matrix(k, n, rng, -5.0, 5.0);
    EXPECT_LE(max_abs_diff(matmul(a, b), oracle_matmul(a, b)), 1e-12);
  }
  // A rectangular case with all three dimensions distinct: 3x4 by 4x2.
  const Matrix a = random_matrix(3, 4, rng);
  const Matrix b = random_matrix(4, 2, rng);
  EXPECT_LE(max_abs_diff(matmul(a, b), oracle_matmul(a, b)), 1e-12);
}

TEST(Matmul, DimensionMismatchNamesBothShapes) {
  const Matrix a(2, 3), b(2, 3);
  try {
    matmul(a, b);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Matmul, AssociativeWithinTolerance) {
  Rng rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(1 + rng.below(5), 1 + rng.below(5), rng);
    const Matrix b = random_matrix(a.cols, 1 + rng.below(5), rng);
    const Matrix c = random_matrix(b.cols, 1 + rng.below(5), rng);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    const double denom = std::max(1.0, frobenius_norm(left));
    Matrix diff = left;
    for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= right.data[i];
    EXPECT_LE(frobenius_norm(diff) / denom, 1e-9);
  }
}

TEST(Transpose, InvolutionIsExact) {
  Rng rng(303);
  const Matrix a = random_matrix(4, 7, rng);
  EXPECT_EQ(transpose(transpose(a)), a);
  EXPECT_EQ(transpose(a)(2, 3), a(3, 2));
}

TEST(Matvec, MatchesMatmulColumn) {
  Rng rng(404);
  const Matrix a = random_matrix(3, 4, rng);
  const std::vector<double> x = {1.0, -2.0, 0.5, 3.0};
  const std::vector<double> b = {0.1, 0.2, 0.3};
  Matrix col(4, 1);
  for (std::size_t i = 0; i < 4; ++i) col(i, 0) = x[i];
  const Matrix want = matmul(a, col);
  const std::vector<double> got = matvec(a, x, b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want(i, 0) + b[i], 1e-15);
  EXPECT_THROW(matvec(a, {1.0, 2.0}), std::invalid_argument);
}

TEST(Invert, IdentityAndDiagonal) {
  EXPECT_LE(max_abs_diff(invert(Matrix::identity(3)), Matrix::identity(3)), 1e-15);
  const Matrix d = Matrix::from_rows({{2, 0}, {0, 4}});
  EXPECT_LE(max_abs_diff(invert(d), Matrix::from_rows({{0.5, 0}, {0, 0.25}})), 1e-15);
}

TEST(Invert, UpperTriangularHandCase) {
  const Matrix m = Matrix::from_rows({{1, 1}, {0, 1}});
  const Matrix inv = invert(m);
  EXPECT_LE(max_abs_diff(inv, Matrix::from_rows({{1, -1}, {0, 1}})), 1e-12);
  EXPECT_LE(max_abs_diff(matmul(m, inv), Matrix::identity(2)), 1e-12);
}

TEST(Invert, MultiplyBackWithinTolerance) {
  Rng rng(505);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    // Diagonally dominant, hence well conditioned.
    Matrix m = random_matrix(n, n, rng);
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 3.0;
    const Matrix inv = invert(m);
    Matrix residual = matmul(m, inv);
    for (std::size_t i = 0; i < n; ++i) residual(i, i) -= 1.0;
    EXPECT_LE(frobenius_norm(residual), 1e-9);
    // Double inversion returns close to the original.
    EXPECT_LE(max_abs_diff(invert(inv), m), 1e-6);
  }
}

TEST(Invert, SingularMatrixIsRejected) {
  EXPECT_THROW(invert(Matrix::from_rows({{1, 2}, {2, 4}})), SingularMatrixError);
  EXPECT_THROW(invert(Matrix::from_rows({{0, 0}, {0, 0}})), SingularMatrixError);
  EXPECT_THROW(invert(Matrix(2, 3)), std::invalid_argument);  // not square
}

TEST(Invert, PartialPivotingHandlesZeroLeadingPivot) {
  const Matrix m = Matrix::from_rows({{0, 1}, {1, 0}});
  const Matrix inv = invert(m);
  EXPECT_LE(max_abs_diff(matmul(m, inv), Matrix::identity(2)), 1e-12);
}

TEST(Norms, FrobeniusAndMaxAbsDiff) {
  const Matrix m = Matrix::from_rows({{3, 4}});
  EXPECT_DOUBLE_EQ(frobenius_norm(m), 5.0);
  const Matrix a = Matrix::from_rows({{1, 2}});
  const Matrix b = Matrix::from_rows({{1.5, 1}});
  EXPECT_DOUBLE_EQ(max_abs_diff(a, b), 1.0);
  EXPECT_THROW(max_abs_diff(a, Matrix(2, 2)), std::invalid_argument);
}

}  // namespace
}  // namespace selfenc
