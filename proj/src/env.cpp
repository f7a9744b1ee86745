#include "rlab/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rlab/errors.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_action(std::span<const double> action, std::size_t dim,
                  const char* env_name) {
  if (action.size() != dim)
    throw ContractViolation(std::string(env_name) + ": wrong action dimension");
  for (double a : action) {
    if (!std::isfinite(a))
      throw ContractViolation(std::string(env_name) + ": non-finite action");
  }
}

}  // namespace

double wrap_angle(double theta) {
  double w = std::fmod(theta + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

EnvSpec Pendulum::spec() { return {3, 1, kMaxTorque, 200}; }

std::vector<double> Pendulum::reset(std::uint64_t seed) {
  Rng rng(seed);
  theta_ = rng.uniform(-kPi, kPi);
  omega_ = rng.uniform(-1.0, 1.0);
  steps_ = 0;
  return observation();
}

StepResult Pendulum::step(std::span<const double> action) {
  check_action(action, 1, "Pendulum");
  double u = std::clamp(action[0], -kMaxTorque, kMaxTorque);

  // Cost of the state the action was taken in.
  double th = wrap_angle(theta_);
  double reward = -(th * th + 0.1 * omega_ * omega_ + 0.001 * u * u);

  // Semi-implicit Euler: velocity first, then position.
  double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) +
                 3.0 / (kMass * kLength * kLength) * u;
  omega_ += kDt * accel;
  omega_ = std::clamp(omega_, -kMaxSpeed, kMaxSpeed);
  theta_ += kDt * omega_;
  steps_ += 1;

  StepResult r;
  r.next_observation = observation();
  r.reward = reward;
  r.truncated = steps_ >= spec().max_episode_steps;
  r.done = r.truncated;
  return r;
}

void Pendulum::set_state(double theta, double omega) {
  theta_ = theta;
  omega_ = omega;
}

std::vector<double> Pendulum::observation() const {
  return {std::cos(theta_), std::sin(theta_), omega_};
}

EnvSpec PointReacher::spec() { return {4, 2, 1.0, 150}; }

std::vector<double> PointReacher::reset(std::uint64_t seed) {
  Rng rng(seed);
  pos_[0] = rng.uniform(-kStartHalfWidth, kStartHalfWidth);
  pos_[1] = rng.uniform(-kStartHalfWidth, kStartHalfWidth);
  vel_[0] = 0.0;
  vel_[1] = 0.0;
  steps_ = 0;
  return observation();
}

StepResult PointReacher::step(std::span<const double> action) {
  check_action(action, 2, "PointReacher");
  double reward = -distance_to_goal();

  for (int i = 0; i < 2; ++i) {
    double a = std::clamp(action[i], -spec().action_bound, spec().action_bound);
    vel_[i] = std::clamp(vel_[i] + kDt * a, -kMaxSpeed, kMaxSpeed);
    pos_[i] = std::clamp(pos_[i] + kDt * vel_[i], -kArenaHalfWidth,
                         kArenaHalfWidth);
  }
  steps_ += 1;

  StepResult r;
  r.next_observation = observation();
  r.reward = reward;
  bool reached = distance_to_goal() < kGoalRadius;
  r.truncated = !reached && steps_ >= spec().max_episode_steps;
  r.done = reached || r.truncated;
  return r;
}

void PointReacher::set_state(double x, double y, double vx, double vy) {
  pos_[0] = x;
  pos_[1] = y;
  vel_[0] = vx;
  vel_[1] = vy;
}

double PointReacher::distance_to_goal() const {
  return std::sqrt(pos_[0] * pos_[0] + pos_[1] * pos_[1]);
}

std::vector<double> PointReacher::observation() const {
  return {pos_[0], pos_[1], vel_[0], vel_[1]};
}

Env Env::make(const std::string& name) {
  if (name == "pendulum") return Env(Pendulum{});
  if (name == "reacher") return Env(PointReacher{});
  throw ContractViolation("unknown environment: " + name);
}

EnvSpec Env::spec_of(const std::string& name) {
  return make(name).spec();
}

EnvSpec Env::spec() const {
  return std::visit([](const auto& e) { return e.spec(); }, impl_);
}

std::vector<double> Env::reset(std::uint64_t seed) {
  return std::visit([&](auto& e) { return e.reset(seed); }, impl_);
}

StepResult Env::step(std::span<const double> action) {
  return std::visit([&](auto& e) { return e.step(action); }, impl_);
}

}  // namespace rlab
