#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rlab {

class Rng;

// Dense row-major matrix of doubles. Row vectors are 1 x n matrices.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  double* row(std::size_t i) { return values.data() + i * cols; }
  const double* row(std::size_t i) const { return values.data() + i * cols; }

  std::size_t size() const { return values.size(); }
  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool all_finite() const;
};

// C = A * B. Shapes (r x k) * (k x c) -> (r x c).
Matrix matmul(const Matrix& a, const Matrix& b);

// C = A^T * B. Shapes (k x r) and (k x c) -> (r x c).
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Column-wise concatenation; both inputs need the same row count.
Matrix hcat(const Matrix& a, const Matrix& b);

// Adds a 1 x cols row vector to every row of m.
void add_row_inplace(Matrix& m, const Matrix& row);

void add_scaled_inplace(Matrix& dst, const Matrix& src, double scale);
void scale_inplace(Matrix& m, double scale);

Matrix column_sums(const Matrix& m);   // 1 x cols
Matrix column_means(const Matrix& m);  // 1 x cols

// Matrix with iid N(mean, stddev^2) entries; consumes rows*cols normals.
Matrix sample_gaussian(Rng& rng, double mean, double stddev, std::size_t rows,
                       std::size_t cols);

}  // namespace rlab
