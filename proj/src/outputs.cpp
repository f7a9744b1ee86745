#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <tuple>

#include "rlab/errors.hpp"
#include "rlab/harness.hpp"
#include "rlab/plot.hpp"

namespace rlab {

namespace {

namespace fs = std::filesystem;

// Group key for summary rows and plots.
using GroupKey = std::tuple<std::string, std::string, std::size_t>;

GroupKey key_of(const RunLog& log) {
  return {log.env_name, strategy_name(log.strategy), log.k};
}

std::string group_label(const GroupKey& key) {
  std::string label = std::get<1>(key);
  if (std::get<2>(key) != 0)
    label += "(K=" + std::to_string(std::get<2>(key)) + ")";
  return label;
}

std::map<GroupKey, std::vector<RunLog>> group_logs(
    std::span<const RunLog> logs) {
  std::map<GroupKey, std::vector<RunLog>> groups;
  for (const RunLog& log : logs) groups[key_of(log)].push_back(log);
  return groups;
}

std::string join_etas(const std::vector<double>& etas) {
  std::string s;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (i) s += ';';
    s += format_double(etas[i]);
  }
  return s;
}

void write_evals_csv(std::span<const RunLog> logs, const std::string& path,
                     bool k_in_strategy) {
  std::ofstream out(path);
  if (!out) throw NumericError("write_outputs: cannot open " + path);
  out << "strategy,env,seed,step,mean_return,std_return\n";
  for (const RunLog& log : logs) {
    std::string name = strategy_name(log.strategy);
    if (k_in_strategy && log.k != 0) name += "-k" + std::to_string(log.k);
    for (const EvalPoint& e : log.evals) {
      out << name << ',' << log.env_name << ',' << log.seed << ',' << e.step
          << ',' << format_double(e.mean_return) << ','
          << format_double(e.std_return) << '\n';
    }
  }
  if (!out) throw NumericError("write_outputs: write failed for " + path);
}

void write_diag_csv(std::span<const RunLog> logs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NumericError("write_outputs: cannot open " + path);
  out << "strategy,env,seed,step,critic_loss1,critic_loss2,mean_abs_td,"
         "actor_loss,chosen_index,chosen_eta,etas\n";
  for (const RunLog& log : logs) {
    for (const DiagPoint& d : log.diags) {
      out << strategy_name(log.strategy) << ',' << log.env_name << ','
          << log.seed << ',' << d.step << ',' << format_double(d.critic_loss1)
          << ',' << format_double(d.critic_loss2) << ','
          << format_double(d.mean_abs_td) << ',';
      if (d.actor_updated) out << format_double(d.actor_loss);
      out << ',';
      if (!d.etas.empty())
        out << d.chosen_index << ',' << format_double(d.chosen_eta) << ','
            << join_etas(d.etas);
      else
        out << ",,";
      out << '\n';
    }
  }
  if (!out) throw NumericError("write_outputs: write failed for " + path);
}

void write_timing_csv(std::span<const RunLog> logs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NumericError("write_outputs: cannot open " + path);
  out << "strategy,env,seed,k,wall_s,env_s,sample_s,train_s,score_s,eval_s,"
         "io_s\n";
  for (const RunLog& log : logs) {
    const PhaseTimings& t = log.timing;
    out << strategy_name(log.strategy) << ',' << log.env_name << ','
        << log.seed << ',' << log.k << ',' << format_double(t.wall_s) << ','
        << format_double(t.env_s) << ',' << format_double(t.sample_s) << ','
        << format_double(t.train_s) << ',' << format_double(t.score_s) << ','
        << format_double(t.eval_s) << ',' << format_double(t.io_s) << '\n';
  }
  if (!out) throw NumericError("write_outputs: write failed for " + path);
}

void write_summary(std::span<const RunLog> logs, std::size_t window,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NumericError("write_outputs: cannot open " + path);
  auto groups = group_logs(logs);

  // Per-environment argmax of the final smoothed mean.
  std::map<std::string, GroupKey> best;
  std::map<GroupKey, std::vector<CurvePoint>> curves;
  for (const auto& [key, group] : groups) {
    auto curve = aggregate(group, window);
    if (!curve.empty()) {
      const std::string& env = std::get<0>(key);
      auto it = best.find(env);
      if (it == best.end() ||
          curve.back().smoothed_mean >
              curves[it->second].back().smoothed_mean)
        best[env] = key;
    }
    curves[key] = std::move(curve);
  }

  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %-14s %3s %5s %7s %14s %14s %12s %s\n",
                "env", "strategy", "k", "runs", "failed", "final_smoothed",
                "final_halfstd", "mean_wall_s", "best");
  out << line;
  for (const auto& [key, group] : groups) {
    const auto& curve = curves[key];
    std::size_t failed = 0;
    double wall = 0.0;
    for (const RunLog& log : group) {
      failed += log.failed ? 1 : 0;
      wall += log.timing.wall_s;
    }
    wall /= static_cast<double>(group.size());
    bool is_best = best.count(std::get<0>(key)) &&
                   best[std::get<0>(key)] == key;
    if (curve.empty()) {
      std::snprintf(line, sizeof(line),
                    "%-10s %-14s %3zu %5zu %7zu %14s %14s %12.2f %s\n",
                    std::get<0>(key).c_str(), std::get<1>(key).c_str(),
                    std::get<2>(key), group.size(), failed, "-", "-", wall,
                    "");
    } else {
      std::snprintf(line, sizeof(line),
                    "%-10s %-14s %3zu %5zu %7zu %14.3f %14.3f %12.2f %s\n",
                    std::get<0>(key).c_str(), std::get<1>(key).c_str(),
                    std::get<2>(key), group.size(), failed,
                    curve.back().smoothed_mean, curve.back().smoothed_half_std,
                    wall, is_best ? "*" : "");
    }
    out << line;
  }
  if (!out) throw NumericError("write_outputs: write failed for " + path);
}

void write_plots(std::span<const RunLog> logs, std::size_t window,
                 const std::string& dir) {
  auto groups = group_logs(logs);
  std::map<std::string, std::vector<PlotSeries>> by_env;
  for (const auto& [key, group] : groups) {
    auto curve = aggregate(group, window);
    if (curve.empty()) continue;
    by_env[std::get<0>(key)].push_back({group_label(key), std::move(curve)});
  }
  for (const auto& [env, series] : by_env) {
    std::string path = dir + "/curve_" + env + ".svg";
    try {
      render_curves_svg(path, env, series);
    } catch (const std::exception& e) {
      std::cerr << "warning: plot skipped (" << e.what() << ")\n";
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_outputs(std::span<const RunLog> logs, const ExperimentConfig& cfg,
                   const std::string& dir) {
  fs::create_directories(dir);
  write_evals_csv(logs, dir + "/evals.csv", false);
  write_diag_csv(logs, dir + "/diag.csv");
  write_timing_csv(logs, dir + "/timing.csv");
  write_summary(logs, cfg.window, dir + "/summary.txt");
  if (cfg.write_plots) write_plots(logs, cfg.window, dir);
}

std::vector<EvalRow> read_evals_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NumericError("read_evals_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw NumericError("read_evals_csv: empty file " + path);
  if (line != "strategy,env,seed,step,mean_return,std_return")
    throw NumericError("read_evals_csv: unexpected header in " + path);
  std::vector<EvalRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 6)
      throw NumericError("read_evals_csv: malformed row in " + path);
    EvalRow row;
    row.strategy = fields[0];
    row.env = fields[1];
    row.seed = std::stoull(fields[2]);
    row.step = std::stoull(fields[3]);
    row.mean_return = std::stod(fields[4]);
    row.std_return = std::stod(fields[5]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RunLog> logs_from_rows(std::span<const EvalRow> rows) {
  std::map<std::tuple<std::string, std::string, std::uint64_t>, RunLog> runs;
  for (const EvalRow& row : rows) {
    auto key = std::make_tuple(row.strategy, row.env, row.seed);
    auto it = runs.find(key);
    if (it == runs.end()) {
      RunLog log;
      // Ablation CSVs carry the K inside the strategy label ("dper-k3").
      std::string name = row.strategy;
      auto pos = name.rfind("-k");
      if (pos != std::string::npos &&
          name.find_first_not_of("0123456789", pos + 2) == std::string::npos) {
        log.k = std::stoul(name.substr(pos + 2));
        name = name.substr(0, pos);
      }
      log.strategy = parse_strategy(name);
      log.env_name = row.env;
      log.seed = row.seed;
      it = runs.emplace(key, std::move(log)).first;
    }
    it->second.evals.push_back({row.step, row.mean_return, row.std_return});
  }
  std::vector<RunLog> logs;
  logs.reserve(runs.size());
  for (auto& [key, log] : runs) {
    std::sort(log.evals.begin(), log.evals.end(),
              [](const EvalPoint& a, const EvalPoint& b) {
                return a.step < b.step;
              });
    logs.push_back(std::move(log));
  }
  return logs;
}

void write_ablation_outputs(const AblationReport& report,
                            const ExperimentConfig& cfg,
                            const std::string& dir) {
  fs::create_directories(dir);

  std::vector<RunLog> all;
  for (std::size_t i = 0; i < report.k_values.size(); ++i) {
    ExperimentConfig per_k = cfg;
    per_k.k = report.k_values[i];
    std::string sub = dir + "/k" + std::to_string(report.k_values[i]);
    write_outputs(report.logs_per_k[i], per_k, sub);
    for (const RunLog& log : report.logs_per_k[i]) all.push_back(log);
  }
  write_evals_csv(all, dir + "/evals.csv", true);
  write_summary(all, cfg.window, dir + "/summary.txt");
  if (cfg.write_plots) write_plots(all, cfg.window, dir);

  std::ofstream out(dir + "/timing_summary.txt");
  if (!out) throw NumericError("write_ablation_outputs: cannot open timing summary");
  out << "k,mean_wall_s\n";
  for (std::size_t i = 0; i < report.k_values.size(); ++i)
    out << report.k_values[i] << ','
        << format_double(report.mean_wall_s[i]) << '\n';
  if (report.k_values.size() >= 2) {
    out << "fit: wall_s = " << format_double(report.wall_fit.slope)
        << " * k + " << format_double(report.wall_fit.intercept)
        << " (r2 = " << format_double(report.wall_fit.r2) << ")\n";
  }
  if (!out)
    throw NumericError("write_ablation_outputs: write failed for timing summary");
}

}  // namespace rlab
