#include "rlab/matrix.hpp"

#include <cmath>
#include <string>

#include "rlab/errors.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ContractViolation(msg);
}

}  // namespace

bool Matrix::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
  // i,k,j order keeps the inner loop contiguous in both b and c.
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows == b.rows, "matmul_tn: row counts differ");
  Matrix c(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  }
  return t;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  require(a.rows == b.rows, "hcat: row counts differ");
  Matrix c(a.rows, a.cols + b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* crow = c.row(i);
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) crow[j] = arow[j];
    for (std::size_t j = 0; j < b.cols; ++j) crow[a.cols + j] = brow[j];
  }
  return c;
}

void add_row_inplace(Matrix& m, const Matrix& row) {
  require(row.rows == 1 && row.cols == m.cols,
          "add_row_inplace: row vector shape mismatch");
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* mrow = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) mrow[j] += row.values[j];
  }
}

void add_scaled_inplace(Matrix& dst, const Matrix& src, double scale) {
  require(dst.same_shape(src), "add_scaled_inplace: shape mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst.values[i] += scale * src.values[i];
}

void scale_inplace(Matrix& m, double scale) {
  for (double& v : m.values) v *= scale;
}

Matrix column_sums(const Matrix& m) {
  Matrix s(1, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* mrow = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) s.values[j] += mrow[j];
  }
  return s;
}

Matrix column_means(const Matrix& m) {
  require(m.rows > 0, "column_means: empty matrix");
  Matrix s = column_sums(m);
  scale_inplace(s, 1.0 / static_cast<double>(m.rows));
  return s;
}

Matrix sample_gaussian(Rng& rng, double mean, double stddev, std::size_t rows,
                       std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.values) v = rng.normal(mean, stddev);
  return m;
}

}  // namespace rlab
