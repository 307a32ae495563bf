#pragma once

// Dense row-major matrices and the handful of operations the encoder needs:
// products, transpose, Gauss-Jordan inverse. Everything is double precision;
// the affine-invariance checks need tolerances that float cannot reach.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace selfenc {

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Row-major matrix of doubles. Immutable by convention once handed to another
// module; safe to share for concurrent reads.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;

  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {
    if (r == 0 || c == 0)
      throw std::invalid_argument("Matrix: dimensions must be at least 1x1, got " +
                                  std::to_string(r) + "x" + std::to_string(c));
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> init) {
    Matrix m(init.size(), init.begin()->size());
    std::size_t i = 0;
    for (const auto& row : init) {
      if (row.size() != m.cols)
        throw std::invalid_argument("Matrix::from_rows: ragged initializer");
      std::size_t j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  // A single point as a 1 x d matrix.
  static Matrix row_vector(const std::vector<double>& x) {
    Matrix m(1, x.size());
    std::copy(x.begin(), x.end(), m.data.begin());
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }
  double* row_ptr(std::size_t i) { return data.data() + i * cols; }

  std::vector<double> row_copy(std::size_t i) const {
    return std::vector<double>(row_ptr(i), row_ptr(i) + cols);
  }

  bool operator==(const Matrix& other) const {
    return rows == other.rows && cols == other.cols && data == other.data;
  }
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: inner dimensions differ, " + shape_str(a) +
                                " times " + shape_str(b));
  Matrix out(a.rows, b.cols);
  // i-k-j order keeps the inner loop contiguous in both b and out.
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  return out;
}

// y = M x + v for a column vector x (v may be empty for a pure linear map).
inline std::vector<double> matvec(const Matrix& m, const std::vector<double>& x,
                                  const std::vector<double>& v = {}) {
  if (m.cols != x.size())
    throw std::invalid_argument("matvec: matrix " + shape_str(m) + " times vector of size " +
                                std::to_string(x.size()));
  if (!v.empty() && v.size() != m.rows)
    throw std::invalid_argument("matvec: offset size mismatch");
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double acc = v.empty() ? 0.0 : v[i];
    const double* row = m.row_ptr(i);
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

// Gauss-Jordan inverse with partial pivoting. Pivots below 1e-12 in magnitude
// are treated as singular.
inline Matrix invert(const Matrix& m) {
  if (m.rows != m.cols)
    throw std::invalid_argument("invert: matrix must be square, got " + shape_str(m));
  const std::size_t n = m.rows;
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
    if (std::fabs(a(pivot, col)) < 1e-12)
      throw SingularMatrixError("invert: singular matrix (pivot " +
                                std::to_string(a(pivot, col)) + " in column " +
                                std::to_string(col) + ")");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(col, j), a(pivot, j));
        std::swap(inv(col, j), inv(pivot, j));
      }
    }
    const double scale = 1.0 / a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) *= scale;
      inv(col, j) *= scale;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= factor * a(col, j);
        inv(r, j) -= factor * inv(col, j);
      }
    }
  }
  return inv;
}

inline double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.data) acc += v * v;
  return std::sqrt(acc);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("max_abs_diff: shapes differ, " + shape_str(a) + " vs " +
                                shape_str(b));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
  return worst;
}

}  // namespace selfenc
