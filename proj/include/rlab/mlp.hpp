#pragma once

#include <cstddef>

#include "rlab/matrix.hpp"

namespace rlab {

class Rng;

enum class OutputActivation {
  Identity,     // critics
  BoundedTanh,  // actors: bound * tanh(z)
};

// Three affine layers with relu between them:
//   h1 = relu(x W1^T + b1), h2 = relu(h1 W2^T + b2), y = f(h2 W3^T + b3).
// Weights are stored (out_features x in_features), biases as 1 x out rows.
struct MlpParams {
  Matrix w1, b1;
  Matrix w2, b2;
  Matrix w3, b3;
  OutputActivation output = OutputActivation::Identity;
  double bound = 1.0;  // only used by BoundedTanh

  std::size_t in_dim() const { return w1.cols; }
  std::size_t hidden_dim() const { return w1.rows; }
  std::size_t out_dim() const { return w3.rows; }
};

// Parameter-shaped gradient container.
struct Gradients {
  Matrix w1, b1;
  Matrix w2, b2;
  Matrix w3, b3;
};

Gradients zero_gradients(const MlpParams& params);

// Activations kept from a forward pass for the backward pass.
// h1 and h2 are post-relu, output is post-activation.
struct ForwardCache {
  Matrix input;
  Matrix h1;
  Matrix h2;
  Matrix output;
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) for each layer's weights and
// biases. Draw order is fixed: w1, b1, w2, b2, w3, b3, row-major.
MlpParams init_mlp(std::size_t in, std::size_t hidden, std::size_t out,
                   OutputActivation activation, double bound, Rng& rng);

// Batched forward; input is batch x in. Fills cache when given.
Matrix mlp_forward(const MlpParams& params, const Matrix& input,
                   ForwardCache* cache = nullptr);

struct BackwardResult {
  Gradients grads;
  Matrix input_grad;  // batch x in
};

// Backprop of dL/d(output) through the cached pass. output_grad must match
// the cached output's shape.
BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache,
                            const Matrix& output_grad);

}  // namespace rlab
