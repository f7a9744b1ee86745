#include "rlab/adam.hpp"

#include <cmath>
#include <string>

#include "rlab/errors.hpp"

namespace rlab {

namespace {

void update_tensor(Matrix& p, const Matrix& g, Matrix& m, Matrix& v,
                   const AdamConfig& cfg, double bc1, double bc2,
                   const char* name) {
  if (!p.same_shape(g))
    throw ContractViolation(std::string("adam_step: gradient shape mismatch in ") + name);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double gi = g.values[i];
    if (!std::isfinite(gi))
      throw NumericError(std::string("adam_step: non-finite gradient in ") + name);
    double mi = cfg.beta1 * m.values[i] + (1.0 - cfg.beta1) * gi;
    double vi = cfg.beta2 * v.values[i] + (1.0 - cfg.beta2) * gi * gi;
    m.values[i] = mi;
    v.values[i] = vi;
    double m_hat = mi / bc1;
    double v_hat = vi / bc2;
    p.values[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace

AdamState make_adam(const MlpParams& params, const AdamConfig& cfg) {
  AdamState s;
  s.m = zero_gradients(params);
  s.v = zero_gradients(params);
  s.t = 0;
  s.cfg = cfg;
  return s;
}

void adam_step(MlpParams& params, const Gradients& grads, AdamState& state) {
  state.t += 1;
  double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.t));
  update_tensor(params.w1, grads.w1, state.m.w1, state.v.w1, state.cfg, bc1, bc2, "w1");
  update_tensor(params.b1, grads.b1, state.m.b1, state.v.b1, state.cfg, bc1, bc2, "b1");
  update_tensor(params.w2, grads.w2, state.m.w2, state.v.w2, state.cfg, bc1, bc2, "w2");
  update_tensor(params.b2, grads.b2, state.m.b2, state.v.b2, state.cfg, bc1, bc2, "b2");
  update_tensor(params.w3, grads.w3, state.m.w3, state.v.w3, state.cfg, bc1, bc2, "w3");
  update_tensor(params.b3, grads.b3, state.m.b3, state.v.b3, state.cfg, bc1, bc2, "b3");
}

}  // namespace rlab
