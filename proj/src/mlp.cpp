#include "rlab/mlp.hpp"

#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                      double limit) {
  Matrix m(rows, cols);
  for (double& v : m.values) v = rng.uniform(-limit, limit);
  return m;
}

// z = x W^T + b, computed as x * transpose(W) to keep the inner loop
// contiguous.
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix z = matmul(x, transpose(w));
  add_row_inplace(z, b);
  return z;
}

void relu_inplace(Matrix& m) {
  for (double& v : m.values) {
    if (v < 0.0) v = 0.0;
  }
}

// Zeroes grad entries where the post-relu activation is zero.
void relu_mask_inplace(Matrix& grad, const Matrix& activated) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (activated.values[i] <= 0.0) grad.values[i] = 0.0;
  }
}

}  // namespace

Gradients zero_gradients(const MlpParams& p) {
  Gradients g;
  g.w1 = Matrix(p.w1.rows, p.w1.cols);
  g.b1 = Matrix(p.b1.rows, p.b1.cols);
  g.w2 = Matrix(p.w2.rows, p.w2.cols);
  g.b2 = Matrix(p.b2.rows, p.b2.cols);
  g.w3 = Matrix(p.w3.rows, p.w3.cols);
  g.b3 = Matrix(p.b3.rows, p.b3.cols);
  return g;
}

MlpParams init_mlp(std::size_t in, std::size_t hidden, std::size_t out,
                   OutputActivation activation, double bound, Rng& rng) {
  if (in == 0 || hidden == 0 || out == 0)
    throw ContractViolation("init_mlp: zero dimension");
  if (activation == OutputActivation::BoundedTanh && !(bound > 0.0))
    throw ContractViolation("init_mlp: bound must be positive");
  MlpParams p;
  double l1 = 1.0 / std::sqrt(static_cast<double>(in));
  double l2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.w1 = uniform_matrix(rng, hidden, in, l1);
  p.b1 = uniform_matrix(rng, 1, hidden, l1);
  p.w2 = uniform_matrix(rng, hidden, hidden, l2);
  p.b2 = uniform_matrix(rng, 1, hidden, l2);
  p.w3 = uniform_matrix(rng, out, hidden, l2);
  p.b3 = uniform_matrix(rng, 1, out, l2);
  p.output = activation;
  p.bound = bound;
  return p;
}

Matrix mlp_forward(const MlpParams& p, const Matrix& input,
                   ForwardCache* cache) {
  if (input.cols != p.in_dim())
    throw ContractViolation("mlp_forward: input width mismatch");
  if (input.rows == 0) throw ContractViolation("mlp_forward: empty batch");

  Matrix h1 = affine(input, p.w1, p.b1);
  relu_inplace(h1);
  Matrix h2 = affine(h1, p.w2, p.b2);
  relu_inplace(h2);
  Matrix y = affine(h2, p.w3, p.b3);
  if (p.output == OutputActivation::BoundedTanh) {
    for (double& v : y.values) v = p.bound * std::tanh(v);
  }

  if (cache != nullptr) {
    cache->input = input;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->output = y;
  }
  return y;
}

BackwardResult mlp_backward(const MlpParams& p, const ForwardCache& c,
                            const Matrix& output_grad) {
  if (!output_grad.same_shape(c.output))
    throw ContractViolation("mlp_backward: output_grad shape mismatch");
  if (c.input.cols != p.in_dim() || c.h1.cols != p.hidden_dim())
    throw ContractViolation("mlp_backward: cache does not match params");

  Matrix dz3 = output_grad;
  if (p.output == OutputActivation::BoundedTanh) {
    // y = bound * tanh(z3), so dy/dz3 = bound - y^2 / bound.
    for (std::size_t i = 0; i < dz3.size(); ++i) {
      double y = c.output.values[i];
      dz3.values[i] *= p.bound - y * y / p.bound;
    }
  }

  BackwardResult r;
  r.grads.w3 = matmul_tn(dz3, c.h2);
  r.grads.b3 = column_sums(dz3);

  Matrix dz2 = matmul(dz3, p.w3);
  relu_mask_inplace(dz2, c.h2);
  r.grads.w2 = matmul_tn(dz2, c.h1);
  r.grads.b2 = column_sums(dz2);

  Matrix dz1 = matmul(dz2, p.w2);
  relu_mask_inplace(dz1, c.h1);
  r.grads.w1 = matmul_tn(dz1, c.input);
  r.grads.b1 = column_sums(dz1);

  r.input_grad = matmul(dz1, p.w1);
  return r;
}

}  // namespace rlab
