#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlab/adam.hpp"
#include "rlab/env.hpp"
#include "rlab/mlp.hpp"
#include "rlab/replay.hpp"

namespace rlab {

class Rng;

enum class PrioritySource {
  Critic1,  // |target - critic1(s, a)|
  MinQ,     // |target - min(critic1, critic2)(s, a)|
};

struct Td3Config {
  double gamma = 0.99;
  double tau = 0.005;
  std::size_t policy_delay = 2;
  // Noise scales are fractions of the action bound.
  double smoothing_std = 0.2;
  double smoothing_clip = 0.5;
  double exploration_std = 0.1;
  std::size_t batch_size = 256;
  std::size_t hidden = 256;
  AdamConfig actor_adam;
  AdamConfig critic_adam;
};

// Actor, twin critics, their targets, and optimizer state. Critic inputs
// are the state and action columns concatenated.
struct Agent {
  MlpParams actor;
  MlpParams critic1;
  MlpParams critic2;
  MlpParams actor_target;
  MlpParams critic1_target;
  MlpParams critic2_target;
  AdamState actor_opt;
  AdamState critic1_opt;
  AdamState critic2_opt;
  EnvSpec env_spec;
};

// Fresh networks; targets start as exact copies of the online networks.
// Init draw order: actor, critic1, critic2.
Agent make_agent(const EnvSpec& spec, const Td3Config& cfg, Rng& init_rng);

// Actor output plus clipped exploration noise, all within action bounds.
// Consumes action_dim normals when exploration_std > 0.
std::vector<double> act(const Agent& agent, std::span<const double> state,
                        double exploration_std, Rng& rng);

// Bootstrap targets with clipped target-policy smoothing:
//   y = r + gamma * (1 - terminal) * min(Q1', Q2')(s', a~),
//   a~ = clip(actor'(s') + clip(noise, +-clip), +-bound).
// Consumes batch_size * action_dim normals when smoothing_std > 0.
std::vector<double> compute_targets(const Agent& agent, const Batch& batch,
                                    const Td3Config& cfg, Rng& rng);

struct CriticGradients {
  double loss1 = 0.0;
  double loss2 = 0.0;
  Gradients grads1;
  Gradients grads2;
  std::vector<double> abs_td;  // per-row |y - q| under the priority source
};

// Mean-squared-error losses of both critics against the targets, their
// parameter gradients, and the per-row TD magnitudes for priority
// write-back. Throws DivergenceError on a non-finite loss.
CriticGradients critic_gradients(const Agent& agent, const Batch& batch,
                                 std::span<const double> targets,
                                 PrioritySource source);

struct CriticUpdateResult {
  double loss1 = 0.0;
  double loss2 = 0.0;
  std::vector<double> abs_td;
};

// critic_gradients followed by one Adam step on each critic.
CriticUpdateResult critic_update(Agent& agent, const Batch& batch,
                                 std::span<const double> targets,
                                 PrioritySource source);

struct ActorGradients {
  double loss = 0.0;  // -mean critic1(s, actor(s))
  Gradients grads;
};

// Gradient of the actor loss through the frozen critic1.
ActorGradients actor_gradients(const Agent& agent, const Batch& batch);

// actor_gradients followed by one Adam step on the actor; the critics are
// left untouched. Returns the loss.
double actor_update(Agent& agent, const Batch& batch);

// target <- tau * online + (1 - tau) * target for all three target nets.
void soft_update(Agent& agent, double tau);

// |y - q| for one fresh transition under the current networks, without
// smoothing noise; used to priority-tag transitions as they are stored.
double fresh_priority(const Agent& agent, const Transition& t,
                      const Td3Config& cfg, PrioritySource source);

// Binary checkpoint of all six networks and the optimizer states.
void save_checkpoint(const Agent& agent, const std::string& path);
Agent load_checkpoint(const std::string& path);

}  // namespace rlab
