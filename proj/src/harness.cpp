#include "rlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <future>
#include <optional>

#include "rlab/errors.hpp"
#include "rlab/replay.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

// Fixed stream ids so every consumer of randomness is isolated: reordering
// draws in one subsystem cannot shift any other subsystem's stream.
enum Stream : std::uint64_t {
  kInitStream = 0,
  kEnvStream = 1,
  kExploreStream = 2,
  kSmoothStream = 3,
  kCriticSampleStream = 4,
  kActorSampleStream = 5,
  kEvalStream = 6,
};

class PhaseTimer {
 public:
  explicit PhaseTimer(double& acc) : acc_(acc), start_(clock_type::now()) {}
  ~PhaseTimer() {
    acc_ += std::chrono::duration<double>(clock_type::now() - start_).count();
  }
  PhaseTimer(const PhaseTimer&) = delete;
  PhaseTimer& operator=(const PhaseTimer&) = delete;

 private:
  using clock_type = std::chrono::steady_clock;
  double& acc_;
  clock_type::time_point start_;
};

std::string checkpoint_path(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.out_dir + "/checkpoints/" + strategy_name(cfg.strategy) + "_" +
         cfg.env_name + "_seed" + std::to_string(seed) + ".ckpt";
}

std::string buffer_path(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.out_dir + "/buffers/" + strategy_name(cfg.strategy) + "_" +
         cfg.env_name + "_seed" + std::to_string(seed) + ".buf";
}

std::pair<double, double> mean_and_std(std::span<const double> values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

}  // namespace

RunLog run_training(const ExperimentConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  auto run_start = std::chrono::steady_clock::now();

  RunLog log;
  log.env_name = cfg.env_name;
  log.strategy = cfg.strategy;
  log.k = cfg.k;
  log.seed = seed;

  Env env = Env::make(cfg.env_name);
  EnvSpec spec = env.spec();

  Rng init_rng(derive_seed(seed, kInitStream));
  Rng explore_rng(derive_seed(seed, kExploreStream));
  Rng smooth_rng(derive_seed(seed, kSmoothStream));
  Rng critic_rng(derive_seed(seed, kCriticSampleStream));
  Rng actor_rng(derive_seed(seed, kActorSampleStream));
  std::uint64_t env_stream = derive_seed(seed, kEnvStream);
  std::uint64_t eval_stream = derive_seed(seed, kEvalStream);

  Agent agent = make_agent(spec, cfg.td3, init_rng);
  RingBuffer buffer(cfg.capacity);
  std::optional<SumTree> tree;
  if (strategy_uses_tree(cfg.strategy))
    tree.emplace(cfg.capacity, cfg.alpha, cfg.priority_floor);

  double explore_sigma = cfg.td3.exploration_std * spec.action_bound;
  KlReference ref{explore_sigma * explore_sigma, spec.action_dim};

  std::vector<double> obs = env.reset(derive_seed(env_stream, log.episodes));

  try {
    for (std::uint64_t step = 1; step <= cfg.total_steps; ++step) {
      Transition t;
      StepResult sr;
      {
        PhaseTimer pt(log.timing.env_s);
        std::vector<double> action;
        if (step <= cfg.warmup_steps) {
          action.resize(spec.action_dim);
          for (double& a : action)
            a = explore_rng.uniform(-spec.action_bound, spec.action_bound);
        } else {
          action = act(agent, obs, cfg.td3.exploration_std, explore_rng);
        }
        sr = env.step(action);
        t.state = std::move(obs);
        t.action = std::move(action);
        t.reward = sr.reward;
        t.next_state = sr.next_observation;
        t.terminal = sr.done && !sr.truncated;
        t.truncated = sr.truncated;
        log.env_steps += 1;
      }
      {
        PhaseTimer pt(log.timing.sample_s);
        double priority = 0.0;
        if (tree)
          priority = fresh_priority(agent, t, cfg.td3, cfg.priority_source);
        push_transition(buffer, tree ? &*tree : nullptr, std::move(t),
                        priority);
      }
      if (sr.done) {
        log.episodes += 1;
        obs = env.reset(derive_seed(env_stream, log.episodes));
      } else {
        obs = std::move(sr.next_observation);
      }

      if (step > cfg.warmup_steps) {
        SampleResult critic_sample;
        {
          PhaseTimer pt(log.timing.sample_s);
          critic_sample =
              strategy_uses_tree(cfg.strategy)
                  ? sample_prioritized(buffer, *tree, cfg.td3.batch_size,
                                       critic_rng)
                  : sample_uniform(buffer, cfg.td3.batch_size, critic_rng);
        }

        CriticUpdateResult critic_result;
        {
          PhaseTimer pt(log.timing.train_s);
          std::vector<double> targets =
              compute_targets(agent, critic_sample.batch, cfg.td3, smooth_rng);
          critic_result = critic_update(agent, critic_sample.batch, targets,
                                        cfg.priority_source);
        }
        log.critic_updates += 1;
        if (tree) {
          PhaseTimer pt(log.timing.sample_s);
          update_priorities(*tree, critic_sample.meta, critic_result.abs_td);
        }

        bool do_actor = log.critic_updates % cfg.td3.policy_delay == 0;
        double actor_loss = 0.0;
        std::optional<CandidateSet> candidates;
        if (do_actor) {
          Batch actor_batch;
          if (strategy_uses_selection(cfg.strategy)) {
            PhaseTimer pt(log.timing.score_s);
            ActorBatchChoice choice = select_actor_batch(
                buffer, agent.actor, cfg.k, cfg.td3.batch_size, ref,
                cfg.kl_mode, cfg.kl_jitter, actor_rng);
            actor_batch = std::move(choice.batch);
            candidates = std::move(choice.candidates);
          } else if (cfg.strategy == Strategy::Per) {
            PhaseTimer pt(log.timing.sample_s);
            actor_batch = sample_prioritized(buffer, *tree,
                                             cfg.td3.batch_size, actor_rng)
                              .batch;
          } else {
            PhaseTimer pt(log.timing.sample_s);
            actor_batch =
                sample_uniform(buffer, cfg.td3.batch_size, actor_rng).batch;
          }
          {
            PhaseTimer pt(log.timing.train_s);
            actor_loss = actor_update(agent, actor_batch);
            soft_update(agent, cfg.td3.tau);
          }
          log.actor_updates += 1;
        }

        if (cfg.diag_every != 0 &&
            log.critic_updates % cfg.diag_every == 0) {
          DiagPoint d;
          d.step = step;
          d.critic_loss1 = critic_result.loss1;
          d.critic_loss2 = critic_result.loss2;
          double td_sum = 0.0;
          for (double v : critic_result.abs_td) td_sum += v;
          d.mean_abs_td = td_sum / static_cast<double>(critic_result.abs_td.size());
          d.actor_updated = do_actor;
          d.actor_loss = actor_loss;
          if (candidates) {
            d.chosen_index = candidates->chosen;
            d.chosen_eta = candidates->etas[candidates->chosen];
            d.etas = candidates->etas;
          }
          log.diags.push_back(std::move(d));
        }
      }

      if (cfg.eval_interval != 0 && step % cfg.eval_interval == 0) {
        PhaseTimer pt(log.timing.eval_s);
        auto [mean, sd] = evaluate(agent.actor, Env::make(cfg.env_name),
                                   cfg.eval_episodes, eval_stream);
        log.evals.push_back({step, mean, sd});
      }
    }
  } catch (const DivergenceError& e) {
    log.failed = true;
    log.failure = e.what();
  }

  if (!cfg.out_dir.empty()) {
    PhaseTimer pt(log.timing.io_s);
    std::filesystem::create_directories(cfg.out_dir + "/checkpoints");
    save_checkpoint(agent, checkpoint_path(cfg, seed));
    if (cfg.save_buffers && buffer.size() > 0) {
      std::filesystem::create_directories(cfg.out_dir + "/buffers");
      save_buffer(buffer, buffer_path(cfg, seed));
    }
  }

  log.timing.wall_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - run_start)
                          .count();
  return log;
}

std::vector<RunLog> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<RunLog> logs(cfg.seeds.size());
  if (cfg.jobs <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      logs[i] = run_training(cfg, cfg.seeds[i]);
    return logs;
  }
  std::size_t next = 0;
  while (next < cfg.seeds.size()) {
    std::size_t chunk = std::min(cfg.jobs, cfg.seeds.size() - next);
    std::vector<std::future<RunLog>> futures;
    futures.reserve(chunk);
    for (std::size_t i = 0; i < chunk; ++i) {
      std::uint64_t seed = cfg.seeds[next + i];
      futures.push_back(std::async(std::launch::async, [&cfg, seed] {
        return run_training(cfg, seed);
      }));
    }
    for (std::size_t i = 0; i < chunk; ++i)
      logs[next + i] = futures[i].get();
    next += chunk;
  }
  return logs;
}

std::pair<double, double> evaluate(const MlpParams& actor, Env env,
                                   std::size_t episodes,
                                   std::uint64_t eval_stream) {
  if (episodes == 0) throw ContractViolation("evaluate: episodes must be > 0");
  std::vector<double> returns(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    std::vector<double> obs = env.reset(derive_seed(eval_stream, e));
    double total = 0.0;
    while (true) {
      Matrix state(1, obs.size());
      std::copy(obs.begin(), obs.end(), state.values.begin());
      Matrix action = mlp_forward(actor, state);
      StepResult sr = env.step(action.values);
      total += sr.reward;
      if (sr.done) break;
      obs = std::move(sr.next_observation);
    }
    returns[e] = total;
  }
  return mean_and_std(returns);
}

std::vector<double> smooth_trailing(std::span<const double> values,
                                    std::size_t window) {
  if (window == 0) throw ContractViolation("smooth_trailing: window must be >= 1");
  std::vector<double> out(values.size());
  double running = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    running += values[i];
    if (i >= window) running -= values[i - window];
    std::size_t span = std::min(i + 1, window);
    out[i] = running / static_cast<double>(span);
  }
  return out;
}

std::vector<CurvePoint> aggregate(std::span<const RunLog> logs,
                                  std::size_t window) {
  if (window == 0) throw ContractViolation("aggregate: window must be >= 1");
  std::vector<const RunLog*> alive;
  for (const RunLog& log : logs) {
    if (!log.failed) alive.push_back(&log);
  }
  if (alive.empty()) return {};

  std::size_t points = alive[0]->evals.size();
  for (const RunLog* log : alive) {
    if (log->evals.size() != points)
      throw ContractViolation("aggregate: eval schedules differ in length");
    for (std::size_t i = 0; i < points; ++i) {
      if (log->evals[i].step != alive[0]->evals[i].step)
        throw ContractViolation("aggregate: eval schedules differ in steps");
    }
  }

  std::vector<CurvePoint> curve(points);
  std::vector<double> sample(alive.size());
  std::vector<double> means(points), halves(points);
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t r = 0; r < alive.size(); ++r)
      sample[r] = alive[r]->evals[i].mean_return;
    auto [mean, sd] = mean_and_std(sample);
    curve[i].step = alive[0]->evals[i].step;
    curve[i].mean = mean;
    curve[i].half_std = 0.5 * sd;
    means[i] = mean;
    halves[i] = curve[i].half_std;
  }
  std::vector<double> sm = smooth_trailing(means, window);
  std::vector<double> sh = smooth_trailing(halves, window);
  for (std::size_t i = 0; i < points; ++i) {
    curve[i].smoothed_mean = sm[i];
    curve[i].smoothed_half_std = sh[i];
  }
  return curve;
}

LineFit least_squares_fit(std::span<const double> xs,
                          std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw ContractViolation("least_squares_fit: need >= 2 paired points");
  double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0)
    throw ContractViolation("least_squares_fit: x values are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

AblationReport run_ablation_k(const ExperimentConfig& cfg,
                              std::span<const std::size_t> k_values) {
  if (!strategy_uses_selection(cfg.strategy))
    throw ContractViolation(
        "run_ablation_k: strategy does not score candidates");
  if (k_values.empty())
    throw ContractViolation("run_ablation_k: no K values given");

  std::vector<ExperimentConfig> per_k(k_values.size(), cfg);
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    per_k[i].k = k_values[i];
    validate(per_k[i]);
  }

  // Seed-major schedule: seed 0 over every K, then seed 1, and so on. A
  // K-major sweep would let gradual machine slowdown masquerade as a
  // steeper (or flatter) slope; interleaving cancels that to first order.
  struct Job {
    std::size_t k_index;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  jobs.reserve(k_values.size() * cfg.seeds.size());
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
    for (std::size_t i = 0; i < k_values.size(); ++i) jobs.push_back({i, s});

  AblationReport report;
  report.k_values.assign(k_values.begin(), k_values.end());
  report.logs_per_k.assign(k_values.size(),
                           std::vector<RunLog>(cfg.seeds.size()));
  std::size_t workers = std::max<std::size_t>(cfg.jobs, 1);
  std::size_t next = 0;
  while (next < jobs.size()) {
    std::size_t chunk = std::min(workers, jobs.size() - next);
    std::vector<std::future<RunLog>> futures;
    futures.reserve(chunk);
    for (std::size_t i = 0; i < chunk; ++i) {
      const Job& job = jobs[next + i];
      const ExperimentConfig& run_cfg = per_k[job.k_index];
      std::uint64_t seed = cfg.seeds[job.seed_index];
      futures.push_back(std::async(std::launch::async, [&run_cfg, seed] {
        return run_training(run_cfg, seed);
      }));
    }
    for (std::size_t i = 0; i < chunk; ++i) {
      const Job& job = jobs[next + i];
      report.logs_per_k[job.k_index][job.seed_index] = futures[i].get();
    }
    next += chunk;
  }

  for (const std::vector<RunLog>& logs : report.logs_per_k) {
    double wall = 0.0;
    for (const RunLog& log : logs) wall += log.timing.wall_s;
    report.mean_wall_s.push_back(wall / static_cast<double>(logs.size()));
  }
  if (report.k_values.size() >= 2) {
    std::vector<double> xs(report.k_values.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      xs[i] = static_cast<double>(report.k_values[i]);
    report.wall_fit = least_squares_fit(xs, report.mean_wall_s);
  }
  return report;
}

}  // namespace rlab
