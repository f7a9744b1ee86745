#include "rlab/config.hpp"

#include "rlab/errors.hpp"

namespace rlab {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Er: return "er";
    case Strategy::Per: return "per";
    case Strategy::Dper: return "dper";
    case Strategy::DperUniform: return "dper-uniform";
  }
  throw ContractViolation("strategy_name: unknown strategy");
}

Strategy parse_strategy(const std::string& name) {
  if (name == "er") return Strategy::Er;
  if (name == "per") return Strategy::Per;
  if (name == "dper") return Strategy::Dper;
  if (name == "dper-uniform") return Strategy::DperUniform;
  throw ContractViolation("unknown replay strategy: " + name);
}

bool strategy_uses_tree(Strategy s) {
  return s == Strategy::Per || s == Strategy::Dper;
}

bool strategy_uses_selection(Strategy s) {
  return s == Strategy::Dper || s == Strategy::DperUniform;
}

std::string kl_mode_name(KlMode m) {
  return m == KlMode::Full ? "full" : "diag";
}

KlMode parse_kl_mode(const std::string& name) {
  if (name == "full") return KlMode::Full;
  if (name == "diag") return KlMode::Diag;
  throw ContractViolation("unknown kl mode: " + name);
}

std::string priority_source_name(PrioritySource s) {
  return s == PrioritySource::Critic1 ? "critic1" : "min";
}

PrioritySource parse_priority_source(const std::string& name) {
  if (name == "critic1") return PrioritySource::Critic1;
  if (name == "min") return PrioritySource::MinQ;
  throw ContractViolation("unknown priority source: " + name);
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ContractViolation(msg); };

  if (cfg.env_name != "pendulum" && cfg.env_name != "reacher")
    fail("config: unknown environment '" + cfg.env_name + "'");

  if (strategy_uses_selection(cfg.strategy)) {
    if (cfg.k == 0)
      fail("config: strategy '" + strategy_name(cfg.strategy) +
           "' needs a candidate count K >= 1");
    if (!(cfg.td3.exploration_std > 0.0))
      fail("config: divergence scoring needs exploration noise > 0");
  } else if (cfg.k != 0) {
    fail("config: strategy '" + strategy_name(cfg.strategy) +
         "' does not take a candidate count K");
  }

  if (cfg.seeds.empty()) fail("config: seed list is empty");
  if (cfg.total_steps == 0) fail("config: total steps must be > 0");
  if (cfg.warmup_steps > cfg.total_steps)
    fail("config: warmup cannot exceed the run length");
  if (cfg.td3.batch_size < 2) fail("config: batch size must be >= 2");
  if (cfg.warmup_steps < cfg.td3.batch_size)
    fail("config: warmup must cover at least one batch");
  if (cfg.capacity < cfg.td3.batch_size)
    fail("config: capacity smaller than the batch size");

  if (cfg.alpha < 0.0) fail("config: alpha must be >= 0");
  if (strategy_uses_tree(cfg.strategy) && !(cfg.priority_floor > 0.0))
    fail("config: prioritized replay needs a positive priority floor");
  if (cfg.kl_jitter < 0.0) fail("config: kl jitter must be >= 0");

  if (!(cfg.td3.gamma >= 0.0 && cfg.td3.gamma <= 1.0))
    fail("config: gamma must be in [0, 1]");
  if (!(cfg.td3.tau > 0.0 && cfg.td3.tau <= 1.0))
    fail("config: tau must be in (0, 1]");
  if (cfg.td3.policy_delay == 0) fail("config: policy delay must be >= 1");
  if (cfg.td3.smoothing_std < 0.0 || cfg.td3.smoothing_clip < 0.0 ||
      cfg.td3.exploration_std < 0.0)
    fail("config: noise scales must be >= 0");
  if (cfg.td3.hidden == 0) fail("config: hidden width must be > 0");

  if (cfg.eval_interval > cfg.total_steps)
    fail("config: eval interval exceeds the run length");
  if (cfg.eval_interval != 0 && cfg.eval_episodes == 0)
    fail("config: evaluation needs at least one episode");
  if (cfg.window == 0) fail("config: smoothing window must be >= 1");
  if (cfg.jobs == 0) fail("config: worker count must be >= 1");
}

}  // namespace rlab
