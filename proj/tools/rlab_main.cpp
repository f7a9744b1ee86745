#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlab/errors.hpp"
#include "rlab/harness.hpp"

namespace {

using rlab::ExperimentConfig;

// Option values as typed by the user; resolved into an ExperimentConfig
// once parsing is done.
struct CliOptions {
  std::string config_path;
  std::string env = "pendulum";
  std::string strategy = "er";
  std::size_t k = 0;
  std::string seeds = "10";
  std::size_t steps = 50'000;
  std::size_t warmup = 1'000;
  std::size_t capacity = 100'000;
  double alpha = 0.6;
  double priority_floor = 1e-3;
  std::string kl_mode = "full";
  double kl_jitter = 1e-6;
  std::string priority_source = "critic1";
  std::size_t batch = 256;
  std::size_t hidden = 256;
  double lr = 3e-4;
  std::size_t policy_delay = 2;
  double tau = 0.005;
  double gamma = 0.99;
  double sigma_smooth = 0.2;
  double sigma_clip = 0.5;
  double sigma_explore = 0.1;
  std::size_t eval_interval = 1'000;
  std::size_t eval_episodes = 10;
  std::size_t window = 10;
  std::size_t diag_every = 100;
  std::size_t jobs = 1;
  bool timing_exclusive = false;
  std::string out;
  bool save_buffers = false;
  bool no_plots = false;
};

// "10" means seeds 0..9; "0,3,17" is an explicit list.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (text.find(',') == std::string::npos) {
    std::size_t count = std::stoull(text);
    for (std::uint64_t s = 0; s < count; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    seeds.push_back(std::stoull(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return seeds;
}

std::vector<std::size_t> parse_k_values(const std::string& text) {
  std::vector<std::size_t> ks;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    ks.push_back(std::stoull(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return ks;
}

std::string trim(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

// Applies a `key = value` file to the parsed subcommand. Keys are the long
// option names without the dashes; values flow through the option's own
// converter; anything given on the command line keeps its value. This is
// done by hand because a config option registered on a subcommand never
// gets read by the library's root-level config pass.
void apply_config_file(const std::string& path, CLI::App& cmd) {
  std::ifstream in(path);
  if (!in) throw rlab::ContractViolation("config: cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno += 1;
    std::string text = trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw rlab::ContractViolation("config: expected key = value at " + path +
                                    ":" + std::to_string(lineno));
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    CLI::Option* option =
        key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
    if (option == nullptr)
      throw rlab::ContractViolation("config: unknown key '" + key + "' at " +
                                    path + ":" + std::to_string(lineno));
    if (option->count() > 0) continue;
    try {
      option->add_result(value);
      option->run_callback();
    } catch (const CLI::ParseError& e) {
      throw rlab::ContractViolation("config: bad value for '" + key +
                                    "': " + e.what());
    }
  }
}

ExperimentConfig resolve(const CliOptions& opt) {
  ExperimentConfig cfg;
  cfg.env_name = opt.env;
  cfg.strategy = rlab::parse_strategy(opt.strategy);
  cfg.k = opt.k;
  if (cfg.k == 0 && rlab::strategy_uses_selection(cfg.strategy)) cfg.k = 2;
  cfg.seeds = parse_seeds(opt.seeds);
  cfg.total_steps = opt.steps;
  cfg.warmup_steps = opt.warmup;
  cfg.capacity = opt.capacity;
  cfg.alpha = opt.alpha;
  cfg.priority_floor = opt.priority_floor;
  cfg.kl_mode = rlab::parse_kl_mode(opt.kl_mode);
  cfg.kl_jitter = opt.kl_jitter;
  cfg.priority_source = rlab::parse_priority_source(opt.priority_source);
  cfg.td3.batch_size = opt.batch;
  cfg.td3.hidden = opt.hidden;
  cfg.td3.actor_adam.lr = opt.lr;
  cfg.td3.critic_adam.lr = opt.lr;
  cfg.td3.policy_delay = opt.policy_delay;
  cfg.td3.tau = opt.tau;
  cfg.td3.gamma = opt.gamma;
  cfg.td3.smoothing_std = opt.sigma_smooth;
  cfg.td3.smoothing_clip = opt.sigma_clip;
  cfg.td3.exploration_std = opt.sigma_explore;
  cfg.eval_interval = opt.eval_interval;
  cfg.eval_episodes = opt.eval_episodes;
  cfg.window = opt.window;
  cfg.diag_every = opt.diag_every;
  cfg.jobs = opt.timing_exclusive ? 1 : opt.jobs;
  cfg.out_dir = opt.out;
  cfg.save_buffers = opt.save_buffers;
  cfg.write_plots = !opt.no_plots;
  rlab::validate(cfg);
  return cfg;
}

void add_train_options(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path,
                  "key = value file; flags take precedence");
  cmd->add_option("--env", opt.env, "pendulum|reacher");
  cmd->add_option("--strategy", opt.strategy, "er|per|dper|dper-uniform");
  cmd->add_option("--k", opt.k, "candidate batches per actor update");
  cmd->add_option("--seeds", opt.seeds, "seed count or comma list");
  cmd->add_option("--steps", opt.steps, "environment steps per run");
  cmd->add_option("--warmup", opt.warmup, "random-action prefill steps");
  cmd->add_option("--capacity", opt.capacity, "replay buffer capacity");
  cmd->add_option("--alpha", opt.alpha, "priority exponent");
  cmd->add_option("--priority-floor", opt.priority_floor,
                  "epsilon added to priorities");
  cmd->add_option("--kl-mode", opt.kl_mode, "full|diag");
  cmd->add_option("--kl-jitter", opt.kl_jitter,
                  "ridge added to the deviation covariance");
  cmd->add_option("--priority-source", opt.priority_source, "critic1|min");
  cmd->add_option("--batch", opt.batch, "minibatch size");
  cmd->add_option("--hidden", opt.hidden, "hidden layer width");
  cmd->add_option("--lr", opt.lr, "Adam learning rate");
  cmd->add_option("--policy-delay", opt.policy_delay,
                  "critic updates per actor update");
  cmd->add_option("--tau", opt.tau, "target blend factor");
  cmd->add_option("--gamma", opt.gamma, "discount");
  cmd->add_option("--sigma-smooth", opt.sigma_smooth,
                  "target smoothing noise, fraction of the bound");
  cmd->add_option("--sigma-clip", opt.sigma_clip,
                  "smoothing noise clip, fraction of the bound");
  cmd->add_option("--sigma-explore", opt.sigma_explore,
                  "exploration noise, fraction of the bound");
  cmd->add_option("--eval-interval", opt.eval_interval,
                  "steps between evaluations (0 disables)");
  cmd->add_option("--eval-episodes", opt.eval_episodes,
                  "episodes per evaluation");
  cmd->add_option("--window", opt.window, "smoothing window in eval records");
  cmd->add_option("--diag-every", opt.diag_every,
                  "critic updates between diagnostics rows (0 disables)");
  cmd->add_option("--jobs", opt.jobs, "concurrent runs");
  cmd->add_flag("--timing-exclusive", opt.timing_exclusive,
                "force serial runs so phase timings are clean");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_flag("--save-buffers", opt.save_buffers,
                "snapshot each run's replay buffer");
  cmd->add_flag("--no-plots", opt.no_plots, "skip SVG rendering");
}

int run_train(const CliOptions& opt) {
  ExperimentConfig cfg = resolve(opt);
  if (cfg.out_dir.empty())
    throw rlab::ContractViolation("train: --out is required");
  std::vector<rlab::RunLog> logs = rlab::run_experiment(cfg);
  rlab::write_outputs(logs, cfg, cfg.out_dir);
  std::size_t failed = 0;
  for (const auto& log : logs) failed += log.failed ? 1 : 0;
  std::cout << "wrote " << cfg.out_dir << "/evals.csv (" << logs.size()
            << " runs, " << failed << " failed)\n";
  return 0;
}

int run_ablate(const CliOptions& opt, const std::string& k_values_text) {
  CliOptions base = opt;
  if (base.strategy == "er" || base.strategy == "per")
    base.strategy = "dper";  // ablation only makes sense with selection
  std::vector<std::size_t> ks = parse_k_values(k_values_text);
  if (ks.empty())
    throw rlab::ContractViolation("ablate-k: --k-values list is empty");
  base.k = ks.front();
  ExperimentConfig cfg = resolve(base);
  if (cfg.out_dir.empty())
    throw rlab::ContractViolation("ablate-k: --out is required");
  rlab::AblationReport report = rlab::run_ablation_k(cfg, ks);
  rlab::write_ablation_outputs(report, cfg, cfg.out_dir);
  std::cout << "wrote " << cfg.out_dir << "/timing_summary.txt (slope "
            << report.wall_fit.slope << " s/K, r2 " << report.wall_fit.r2
            << ")\n";
  return 0;
}

int run_report(const std::string& in_dir, const std::string& out_dir,
               std::size_t window) {
  auto rows = rlab::read_evals_csv(in_dir + "/evals.csv");
  auto logs = rlab::logs_from_rows(rows);
  ExperimentConfig cfg;
  cfg.window = window;
  std::string dir = out_dir.empty() ? in_dir : out_dir;
  std::filesystem::create_directories(dir);
  rlab::write_outputs(logs, cfg, dir);
  std::cout << "wrote " << dir << "/summary.txt (" << logs.size()
            << " runs)\n";
  return 0;
}

void print_error(const std::string& type, const std::string& message) {
  nlohmann::json j{{"type", type}, {"message", message}};
  std::cerr << "error: " << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale replay-strategy lab for TD3"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string k_values = "2,3,4,5";
  std::string report_in;
  std::string report_out;
  std::size_t report_window = 10;

  CLI::App* train = app.add_subcommand("train", "run one experiment");
  add_train_options(train, opt);

  CLI::App* ablate =
      app.add_subcommand("ablate-k", "sweep the candidate count");
  add_train_options(ablate, opt);
  ablate->add_option("--k-values", k_values, "comma list of K values");

  CLI::App* report =
      app.add_subcommand("report", "re-aggregate an existing evals.csv");
  report->add_option("--in", report_in, "directory holding evals.csv")
      ->required();
  report->add_option("--out", report_out, "directory to write into");
  report->add_option("--window", report_window, "smoothing window");

  try {
    app.parse(argc, argv);
    if (train->parsed()) {
      if (!opt.config_path.empty()) apply_config_file(opt.config_path, *train);
      return run_train(opt);
    }
    if (ablate->parsed()) {
      if (!opt.config_path.empty())
        apply_config_file(opt.config_path, *ablate);
      return run_ablate(opt, k_values);
    }
    if (report->parsed()) return run_report(report_in, report_out, report_window);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const rlab::ContractViolation& e) {
    print_error("contract", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
}
