#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlab/dper.hpp"
#include "rlab/td3.hpp"

namespace rlab {

enum class Strategy {
  Er,           // uniform experience replay for critic and actor
  Per,          // proportional prioritized replay for critic and actor
  Dper,         // prioritized critic batches, divergence-selected actor batches
  DperUniform,  // uniform critic batches, divergence-selected actor batches
};

std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);

// Strategies whose critic batches come from the priority tree.
bool strategy_uses_tree(Strategy s);
// Strategies that score K candidate actor batches.
bool strategy_uses_selection(Strategy s);

std::string kl_mode_name(KlMode m);
KlMode parse_kl_mode(const std::string& name);

std::string priority_source_name(PrioritySource s);
PrioritySource parse_priority_source(const std::string& name);

struct ExperimentConfig {
  std::string env_name = "pendulum";
  Strategy strategy = Strategy::Er;
  std::size_t k = 0;  // candidate count; 0 means "not set"

  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t total_steps = 50'000;
  std::size_t warmup_steps = 1'000;
  std::size_t capacity = 100'000;

  double alpha = 0.6;            // priority exponent
  double priority_floor = 1e-3;  // eps added before exponentiation
  KlMode kl_mode = KlMode::Full;
  double kl_jitter = 1e-6;
  PrioritySource priority_source = PrioritySource::Critic1;

  Td3Config td3;

  std::size_t eval_interval = 1'000;  // 0 disables evaluation
  std::size_t eval_episodes = 10;
  std::size_t window = 10;     // trailing smoothing width, in eval records
  std::size_t diag_every = 100;  // critic updates between diag rows; 0 off
  std::size_t jobs = 1;        // concurrent runs

  std::string out_dir;         // empty: no files written by the run itself
  bool save_buffers = false;
  bool write_plots = true;
};

// Throws ContractViolation with a message naming the offending field.
void validate(const ExperimentConfig& cfg);

}  // namespace rlab
