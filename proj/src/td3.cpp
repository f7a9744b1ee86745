#include "rlab/td3.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rlab/errors.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

Matrix row_matrix(std::span<const double> v) {
  Matrix m(1, v.size());
  std::copy(v.begin(), v.end(), m.values.begin());
  return m;
}

void soft_update_params(MlpParams& target, const MlpParams& online,
                        double tau) {
  auto blend = [tau](Matrix& t, const Matrix& o) {
    for (std::size_t i = 0; i < t.size(); ++i)
      t.values[i] = tau * o.values[i] + (1.0 - tau) * t.values[i];
  };
  blend(target.w1, online.w1);
  blend(target.b1, online.b1);
  blend(target.w2, online.w2);
  blend(target.b2, online.b2);
  blend(target.w3, online.w3);
  blend(target.b3, online.b3);
}

}  // namespace

Agent make_agent(const EnvSpec& spec, const Td3Config& cfg, Rng& init_rng) {
  if (spec.state_dim == 0 || spec.action_dim == 0)
    throw ContractViolation("make_agent: invalid environment spec");
  if (!(spec.action_bound > 0.0))
    throw ContractViolation("make_agent: action bound must be positive");

  Agent a;
  a.env_spec = spec;
  a.actor = init_mlp(spec.state_dim, cfg.hidden, spec.action_dim,
                     OutputActivation::BoundedTanh, spec.action_bound,
                     init_rng);
  std::size_t critic_in = spec.state_dim + spec.action_dim;
  a.critic1 = init_mlp(critic_in, cfg.hidden, 1, OutputActivation::Identity,
                       1.0, init_rng);
  a.critic2 = init_mlp(critic_in, cfg.hidden, 1, OutputActivation::Identity,
                       1.0, init_rng);
  a.actor_target = a.actor;
  a.critic1_target = a.critic1;
  a.critic2_target = a.critic2;
  a.actor_opt = make_adam(a.actor, cfg.actor_adam);
  a.critic1_opt = make_adam(a.critic1, cfg.critic_adam);
  a.critic2_opt = make_adam(a.critic2, cfg.critic_adam);
  return a;
}

std::vector<double> act(const Agent& agent, std::span<const double> state,
                        double exploration_std, Rng& rng) {
  if (state.size() != agent.env_spec.state_dim)
    throw ContractViolation("act: state dimension mismatch");
  double bound = agent.env_spec.action_bound;
  Matrix out = mlp_forward(agent.actor, row_matrix(state));
  std::vector<double> action(out.values.begin(), out.values.end());
  if (exploration_std > 0.0) {
    double sigma = exploration_std * bound;
    for (double& a : action)
      a = std::clamp(a + rng.normal(0.0, sigma), -bound, bound);
  }
  return action;
}

std::vector<double> compute_targets(const Agent& agent, const Batch& batch,
                                    const Td3Config& cfg, Rng& rng) {
  std::size_t b = batch.size();
  if (batch.rewards.size() != b || batch.terminals.size() != b)
    throw ContractViolation("compute_targets: ragged batch");
  double bound = agent.env_spec.action_bound;
  double sigma = cfg.smoothing_std * bound;
  double clip = cfg.smoothing_clip * bound;

  Matrix next_actions = mlp_forward(agent.actor_target, batch.next_states);
  if (sigma > 0.0) {
    for (double& a : next_actions.values) {
      double noise = std::clamp(rng.normal(0.0, sigma), -clip, clip);
      a = std::clamp(a + noise, -bound, bound);
    }
  }

  Matrix critic_in = hcat(batch.next_states, next_actions);
  Matrix q1 = mlp_forward(agent.critic1_target, critic_in);
  Matrix q2 = mlp_forward(agent.critic2_target, critic_in);

  std::vector<double> targets(b);
  for (std::size_t k = 0; k < b; ++k) {
    double q = std::min(q1.values[k], q2.values[k]);
    targets[k] =
        batch.rewards[k] + cfg.gamma * (1.0 - batch.terminals[k]) * q;
  }
  return targets;
}

CriticGradients critic_gradients(const Agent& agent, const Batch& batch,
                                 std::span<const double> targets,
                                 PrioritySource source) {
  std::size_t b = batch.size();
  if (targets.size() != b)
    throw ContractViolation("critic_gradients: target count mismatch");

  Matrix critic_in = hcat(batch.states, batch.actions);
  ForwardCache cache1, cache2;
  Matrix q1 = mlp_forward(agent.critic1, critic_in, &cache1);
  Matrix q2 = mlp_forward(agent.critic2, critic_in, &cache2);

  CriticGradients result;
  result.abs_td.resize(b);
  Matrix grad1(b, 1);
  Matrix grad2(b, 1);
  double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t k = 0; k < b; ++k) {
    double e1 = q1.values[k] - targets[k];
    double e2 = q2.values[k] - targets[k];
    result.loss1 += e1 * e1 * inv_b;
    result.loss2 += e2 * e2 * inv_b;
    grad1.values[k] = 2.0 * e1 * inv_b;
    grad2.values[k] = 2.0 * e2 * inv_b;
    double q = source == PrioritySource::Critic1
                   ? q1.values[k]
                   : std::min(q1.values[k], q2.values[k]);
    result.abs_td[k] = std::fabs(targets[k] - q);
  }
  if (!std::isfinite(result.loss1) || !std::isfinite(result.loss2))
    throw DivergenceError("critic_update: non-finite loss (loss1=" +
                          std::to_string(result.loss1) + ", loss2=" +
                          std::to_string(result.loss2) + ")");

  result.grads1 = mlp_backward(agent.critic1, cache1, grad1).grads;
  result.grads2 = mlp_backward(agent.critic2, cache2, grad2).grads;
  return result;
}

CriticUpdateResult critic_update(Agent& agent, const Batch& batch,
                                 std::span<const double> targets,
                                 PrioritySource source) {
  CriticGradients g = critic_gradients(agent, batch, targets, source);
  adam_step(agent.critic1, g.grads1, agent.critic1_opt);
  adam_step(agent.critic2, g.grads2, agent.critic2_opt);
  CriticUpdateResult result;
  result.loss1 = g.loss1;
  result.loss2 = g.loss2;
  result.abs_td = std::move(g.abs_td);
  return result;
}

ActorGradients actor_gradients(const Agent& agent, const Batch& batch) {
  std::size_t b = batch.size();
  ForwardCache actor_cache;
  Matrix actions = mlp_forward(agent.actor, batch.states, &actor_cache);

  ForwardCache critic_cache;
  Matrix critic_in = hcat(batch.states, actions);
  Matrix q = mlp_forward(agent.critic1, critic_in, &critic_cache);

  ActorGradients result;
  for (double v : q.values) result.loss -= v;
  result.loss /= static_cast<double>(b);
  if (!std::isfinite(result.loss))
    throw DivergenceError("actor_update: non-finite loss (" +
                          std::to_string(result.loss) + ")");

  // d(-mean q)/dq = -1/b; push through the critic to its action inputs,
  // then through the actor. Critic parameters stay frozen here.
  Matrix qgrad(b, 1, -1.0 / static_cast<double>(b));
  BackwardResult critic_back = mlp_backward(agent.critic1, critic_cache, qgrad);

  std::size_t n = agent.env_spec.state_dim;
  std::size_t m = agent.env_spec.action_dim;
  Matrix action_grad(b, m);
  for (std::size_t k = 0; k < b; ++k) {
    for (std::size_t j = 0; j < m; ++j)
      action_grad.at(k, j) = critic_back.input_grad.at(k, n + j);
  }
  result.grads = mlp_backward(agent.actor, actor_cache, action_grad).grads;
  return result;
}

double actor_update(Agent& agent, const Batch& batch) {
  ActorGradients g = actor_gradients(agent, batch);
  adam_step(agent.actor, g.grads, agent.actor_opt);
  return g.loss;
}

void soft_update(Agent& agent, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ContractViolation("soft_update: tau must be in [0, 1]");
  soft_update_params(agent.actor_target, agent.actor, tau);
  soft_update_params(agent.critic1_target, agent.critic1, tau);
  soft_update_params(agent.critic2_target, agent.critic2, tau);
}

double fresh_priority(const Agent& agent, const Transition& t,
                      const Td3Config& cfg, PrioritySource source) {
  Matrix next_state = row_matrix(t.next_state);
  Matrix next_action = mlp_forward(agent.actor_target, next_state);
  Matrix next_in = hcat(next_state, next_action);
  double q1n = mlp_forward(agent.critic1_target, next_in).values[0];
  double q2n = mlp_forward(agent.critic2_target, next_in).values[0];
  double y = t.reward + cfg.gamma * (t.terminal ? 0.0 : 1.0) * std::min(q1n, q2n);

  Matrix here = hcat(row_matrix(t.state), row_matrix(t.action));
  double q1 = mlp_forward(agent.critic1, here).values[0];
  double q = q1;
  if (source == PrioritySource::MinQ)
    q = std::min(q1, mlp_forward(agent.critic2, here).values[0]);
  return std::fabs(y - q);
}

namespace {

constexpr std::uint64_t kCheckpointMagic = 0x524C414243503031ULL;  // "RLABCP01"

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_matrix(std::ofstream& out, const Matrix& m) {
  write_u64(out, m.rows);
  write_u64(out, m.cols);
  out.write(reinterpret_cast<const char*>(m.values.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix read_matrix(std::ifstream& in) {
  std::uint64_t rows = read_u64(in);
  std::uint64_t cols = read_u64(in);
  if (!in || rows * cols > (1ULL << 32))
    throw NumericError("load_checkpoint: corrupt matrix header");
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.values.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  return m;
}

void write_double(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_double(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_params(std::ofstream& out, const MlpParams& p) {
  write_u64(out, p.output == OutputActivation::BoundedTanh ? 1 : 0);
  write_double(out, p.bound);
  for (const Matrix* m : {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3, &p.b3})
    write_matrix(out, *m);
}

MlpParams read_params(std::ifstream& in) {
  MlpParams p;
  p.output = read_u64(in) == 1 ? OutputActivation::BoundedTanh
                               : OutputActivation::Identity;
  p.bound = read_double(in);
  p.w1 = read_matrix(in);
  p.b1 = read_matrix(in);
  p.w2 = read_matrix(in);
  p.b2 = read_matrix(in);
  p.w3 = read_matrix(in);
  p.b3 = read_matrix(in);
  return p;
}

void write_adam(std::ofstream& out, const AdamState& s) {
  write_u64(out, s.t);
  write_double(out, s.cfg.lr);
  write_double(out, s.cfg.beta1);
  write_double(out, s.cfg.beta2);
  write_double(out, s.cfg.eps);
  for (const Gradients* g : {&s.m, &s.v}) {
    for (const Matrix* m : {&g->w1, &g->b1, &g->w2, &g->b2, &g->w3, &g->b3})
      write_matrix(out, *m);
  }
}

AdamState read_adam(std::ifstream& in) {
  AdamState s;
  s.t = read_u64(in);
  s.cfg.lr = read_double(in);
  s.cfg.beta1 = read_double(in);
  s.cfg.beta2 = read_double(in);
  s.cfg.eps = read_double(in);
  for (Gradients* g : {&s.m, &s.v}) {
    g->w1 = read_matrix(in);
    g->b1 = read_matrix(in);
    g->w2 = read_matrix(in);
    g->b2 = read_matrix(in);
    g->w3 = read_matrix(in);
    g->b3 = read_matrix(in);
  }
  return s;
}

}  // namespace

void save_checkpoint(const Agent& agent, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericError("save_checkpoint: cannot open " + path);
  write_u64(out, kCheckpointMagic);
  write_u64(out, agent.env_spec.state_dim);
  write_u64(out, agent.env_spec.action_dim);
  write_double(out, agent.env_spec.action_bound);
  write_u64(out, agent.env_spec.max_episode_steps);
  for (const MlpParams* p :
       {&agent.actor, &agent.critic1, &agent.critic2, &agent.actor_target,
        &agent.critic1_target, &agent.critic2_target})
    write_params(out, *p);
  write_adam(out, agent.actor_opt);
  write_adam(out, agent.critic1_opt);
  write_adam(out, agent.critic2_opt);
  if (!out) throw NumericError("save_checkpoint: write failed for " + path);
}

Agent load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericError("load_checkpoint: cannot open " + path);
  if (read_u64(in) != kCheckpointMagic)
    throw NumericError("load_checkpoint: bad magic in " + path);
  Agent a;
  a.env_spec.state_dim = read_u64(in);
  a.env_spec.action_dim = read_u64(in);
  a.env_spec.action_bound = read_double(in);
  a.env_spec.max_episode_steps = read_u64(in);
  for (MlpParams* p :
       {&a.actor, &a.critic1, &a.critic2, &a.actor_target, &a.critic1_target,
        &a.critic2_target})
    *p = read_params(in);
  a.actor_opt = read_adam(in);
  a.critic1_opt = read_adam(in);
  a.critic2_opt = read_adam(in);
  if (!in) throw NumericError("load_checkpoint: truncated file " + path);
  return a;
}

}  // namespace rlab
