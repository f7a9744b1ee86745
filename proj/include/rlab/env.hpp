#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rlab {

struct EnvSpec {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double action_bound = 1.0;  // actions live in [-bound, +bound]^action_dim
  std::size_t max_episode_steps = 0;
};

struct StepResult {
  std::vector<double> next_observation;
  double reward = 0.0;
  bool done = false;       // episode over for any reason
  bool truncated = false;  // over only because the step limit was hit
};

// Torque-limited pendulum swing-up. State is the unwrapped angle (zero is
// upright) and angular velocity; the observation is (cos, sin, velocity).
// Episodes never terminate, they only truncate at the step limit.
class Pendulum {
 public:
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kGravity = 10.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;

  static EnvSpec spec();

  // Deterministic in the seed: angle ~ U[-pi, pi), velocity ~ U[-1, 1).
  std::vector<double> reset(std::uint64_t seed);
  StepResult step(std::span<const double> action);

  // Places the pendulum at an exact state without touching the step count.
  void set_state(double theta, double omega);

  double angle() const { return theta_; }
  double angular_velocity() const { return omega_; }
  std::size_t elapsed_steps() const { return steps_; }

 private:
  std::vector<double> observation() const;

  double theta_ = 0.0;
  double omega_ = 0.0;
  std::size_t steps_ = 0;
};

// Velocity-controlled point mass reaching for the origin on a bounded
// plane. Observation is (x, y, vx, vy); the action accelerates the mass.
// Terminates when the mass enters the goal radius, truncates at the limit.
class PointReacher {
 public:
  static constexpr double kDt = 0.1;
  static constexpr double kMaxSpeed = 2.0;
  static constexpr double kArenaHalfWidth = 2.0;
  static constexpr double kStartHalfWidth = 1.0;
  static constexpr double kGoalRadius = 0.05;

  static EnvSpec spec();

  // Deterministic in the seed: position ~ U[-1, 1)^2, velocity zero.
  std::vector<double> reset(std::uint64_t seed);
  StepResult step(std::span<const double> action);

  // Places the mass at an exact state without touching the step count.
  void set_state(double x, double y, double vx, double vy);

  double distance_to_goal() const;
  std::size_t elapsed_steps() const { return steps_; }

 private:
  std::vector<double> observation() const;

  double pos_[2] = {0.0, 0.0};
  double vel_[2] = {0.0, 0.0};
  std::size_t steps_ = 0;
};

// Value-semantic wrapper so the harness can hold either task.
class Env {
 public:
  explicit Env(Pendulum p) : impl_(p) {}
  explicit Env(PointReacher r) : impl_(r) {}

  // Accepts "pendulum" or "reacher".
  static Env make(const std::string& name);
  static EnvSpec spec_of(const std::string& name);

  EnvSpec spec() const;
  std::vector<double> reset(std::uint64_t seed);
  StepResult step(std::span<const double> action);

 private:
  std::variant<Pendulum, PointReacher> impl_;
};

// Maps an angle into [-pi, pi).
double wrap_angle(double theta);

}  // namespace rlab
