#pragma once

#include <cstdint>

#include "rlab/mlp.hpp"

namespace rlab {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam state over one MLP's parameters.
struct AdamState {
  Gradients m;  // first moments
  Gradients v;  // second moments
  std::uint64_t t = 0;
  AdamConfig cfg;
};

AdamState make_adam(const MlpParams& params, const AdamConfig& cfg);

// One update: p -= lr * m_hat / (sqrt(v_hat) + eps). Throws NumericError
// naming the offending tensor if any gradient entry is non-finite.
void adam_step(MlpParams& params, const Gradients& grads, AdamState& state);

}  // namespace rlab
