#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rlab/config.hpp"

namespace rlab {

struct EvalPoint {
  std::uint64_t step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
};

struct DiagPoint {
  std::uint64_t step = 0;
  double critic_loss1 = 0.0;
  double critic_loss2 = 0.0;
  double mean_abs_td = 0.0;
  bool actor_updated = false;
  double actor_loss = 0.0;
  std::size_t chosen_index = 0;
  double chosen_eta = 0.0;
  std::vector<double> etas;  // all K scores when selection ran
};

// Wall-clock seconds spent per phase; wall_s is the whole run.
struct PhaseTimings {
  double env_s = 0.0;
  double sample_s = 0.0;
  double train_s = 0.0;
  double score_s = 0.0;
  double eval_s = 0.0;
  double io_s = 0.0;
  double wall_s = 0.0;

  double accounted() const {
    return env_s + sample_s + train_s + score_s + eval_s + io_s;
  }
};

struct RunLog {
  std::string env_name;
  Strategy strategy = Strategy::Er;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  std::vector<EvalPoint> evals;
  std::vector<DiagPoint> diags;
  PhaseTimings timing;

  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  std::uint64_t critic_updates = 0;
  std::uint64_t actor_updates = 0;

  bool failed = false;
  std::string failure;
};

// One seed, one full training run. Divergence is caught and recorded on
// the log instead of propagating.
RunLog run_training(const ExperimentConfig& cfg, std::uint64_t seed);

// All configured seeds, at most cfg.jobs at a time, results in seed order.
std::vector<RunLog> run_experiment(const ExperimentConfig& cfg);

// Mean and sample standard deviation of the undiscounted return over
// noise-free episodes. Episode e always resets from the same seed, so
// evaluations at different training steps see identical start states.
std::pair<double, double> evaluate(const MlpParams& actor, Env env,
                                   std::size_t episodes,
                                   std::uint64_t eval_stream);

// Trailing moving average: out[i] = mean(in[max(0, i-window+1) .. i]).
std::vector<double> smooth_trailing(std::span<const double> values,
                                    std::size_t window);

struct CurvePoint {
  std::uint64_t step = 0;
  double mean = 0.0;
  double half_std = 0.0;
  double smoothed_mean = 0.0;
  double smoothed_half_std = 0.0;
};

// Cross-seed curve: per eval step the mean over runs, half of the sample
// standard deviation, and trailing-smoothed versions of both. Failed runs
// are skipped; the remaining runs must share the eval schedule.
std::vector<CurvePoint> aggregate(std::span<const RunLog> logs,
                                  std::size_t window);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit least_squares_fit(std::span<const double> xs,
                          std::span<const double> ys);

// Writes evals.csv, diag.csv, timing.csv, summary.txt and per-environment
// SVG curves into dir. A plot failure only warns; the CSVs still land.
void write_outputs(std::span<const RunLog> logs, const ExperimentConfig& cfg,
                   const std::string& dir);

// One evals.csv row.
struct EvalRow {
  std::string strategy;
  std::string env;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
};

std::vector<EvalRow> read_evals_csv(const std::string& path);

// Regroups rows into per-(strategy, env, seed) logs for re-aggregation.
std::vector<RunLog> logs_from_rows(std::span<const EvalRow> rows);

struct AblationReport {
  std::vector<std::size_t> k_values;
  std::vector<std::vector<RunLog>> logs_per_k;
  std::vector<double> mean_wall_s;  // one entry per K
  LineFit wall_fit;                 // wall time against K
};

// Repeats the experiment once per K (strategy must score candidates).
// Runs execute in seed-major order, each seed visiting every K in turn,
// so slow machine-speed drift spreads evenly across the wall-time fit.
AblationReport run_ablation_k(const ExperimentConfig& cfg,
                              std::span<const std::size_t> k_values);

// Per-K subdirectories plus a joint CSV and a timing summary at the root.
void write_ablation_outputs(const AblationReport& report,
                            const ExperimentConfig& cfg,
                            const std::string& dir);

std::string format_double(double v);  // %.17g, round-trips exactly

}  // namespace rlab
