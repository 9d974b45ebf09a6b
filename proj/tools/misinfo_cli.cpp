// misinfo: command-line driver for simulations, payoff estimation, equilibrium
// solving, deviation experiments and parameter sweeps.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "misinfo/dynamics.hpp"
#include "misinfo/game.hpp"
#include "misinfo/io.hpp"
#include "misinfo/metrics.hpp"
#include "misinfo/sweep.hpp"

#ifndef MISINFO_VERSION
#define MISINFO_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace misinfo;
using io::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t workers = 1;
  std::string profiles;
  std::string profile_file;
  std::string curve_csv;
  std::optional<double> tau_l;
  std::optional<double> tau_r;
  bool force = false;
  std::string payoff;
  std::string forced_profile;
};

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> names;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) names.push_back(item);
  }
  return names;
}

class Run {
 public:
  Run(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {
    start_ = std::chrono::steady_clock::now();
    if (!opt.config.empty()) config_ = io::load_run_config(opt.config);
    if (opt.seed) config_.simulation.seed = *opt.seed;
    if (opt.tau_l) config_.solver.tau_L = *opt.tau_l;
    if (opt.tau_r) config_.solver.tau_R = *opt.tau_r;
    if (opt.workers == 0) throw std::invalid_argument("--workers must be >= 1");
    config_.simulation.validate();
    config_.solver.validate();
    library_ = opt.profile_file.empty() ? profile_library() : io::read_profile_file(opt.profile_file);
    if (command_ != "simulate" && !opt.profiles.empty()) {
      std::vector<StrategyProfile> subset;
      for (const auto& name : split_names(opt.profiles)) subset.push_back(find_profile(library_, name));
      library_ = std::move(subset);
    }
  }

  io::RunConfig& config() { return config_; }
  const std::vector<StrategyProfile>& library() const { return library_; }
  const fs::path& out_dir() const { return out_; }

  // Created only once every input has been validated.
  void open_output() {
    if (opt_.out.empty()) throw std::invalid_argument("--out is required");
    out_ = opt_.out;
    fs::create_directories(out_);
  }

  fs::path artifact(const std::string& name) {
    artifacts_.push_back(name);
    return out_ / name;
  }

  void write_text(const std::string& name, const std::string& text) { io::write_text_file(artifact(name), text); }
  void write_json(const std::string& name, const json& j) { io::write_json_file(artifact(name), j); }

  void finish() {
    io::RunManifest m;
    m.command = command_;
    m.config = io::to_json(config_);
    m.seed = config_.simulation.seed;
    m.artifacts = artifacts_;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m.version = MISINFO_VERSION;
    for (const auto& a : artifacts_)
      if (!fs::exists(out_ / a)) throw std::runtime_error("artifact " + a + " is missing");
    io::write_json_file(out_ / (command_ + "_manifest.json"), io::to_json(m));
  }

 private:
  std::string command_;
  const Options& opt_;
  io::RunConfig config_;
  std::vector<StrategyProfile> library_;
  fs::path out_;
  std::vector<std::string> artifacts_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> profile_names(const std::vector<StrategyProfile>& profiles) {
  std::vector<std::string> names;
  for (const auto& p : profiles) names.push_back(p.name);
  return names;
}

std::string matrix_csv(const MatrixXd& m, const std::vector<std::string>& names) {
  std::ostringstream os;
  io::write_matrix_csv(os, m, names, names);
  return os.str();
}

fs::path payoff_values_path(const std::string& arg) {
  if (arg.empty()) throw std::invalid_argument("--payoff is required");
  fs::path p(arg);
  if (fs::is_directory(p)) p /= "payoff_values.csv";
  if (!fs::exists(p)) throw std::invalid_argument("payoff file " + p.string() + " does not exist");
  return p;
}

io::LabelledMatrix read_matrix_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  return io::read_matrix_csv(in);
}

// Payoff values plus the std-error sidecar when it sits next to them.
PayoffMatrix load_payoff(const fs::path& values_path, const std::vector<StrategyProfile>& library) {
  const auto values = read_matrix_file(values_path);
  if (values.values.rows() != values.values.cols()) throw std::invalid_argument("payoff matrix must be square");
  if (values.row_names != profile_names(library) || values.col_names != profile_names(library))
    throw std::invalid_argument("payoff matrix labels do not match the profile library");
  PayoffMatrix payoff;
  payoff.values = values.values;
  payoff.std_errors = MatrixXd::Zero(values.values.rows(), values.values.cols());
  const fs::path se_path = values_path.parent_path() / "payoff_std_errors.csv";
  if (fs::exists(se_path)) {
    const auto se = read_matrix_file(se_path);
    if (se.values.rows() != payoff.values.rows() || se.values.cols() != payoff.values.cols())
      throw std::invalid_argument("std-error sidecar does not match the payoff matrix");
    payoff.std_errors = se.values;
  }
  return payoff;
}

int cmd_simulate(const Options& opt) {
  Run run("simulate", opt);
  const auto& sim = run.config().simulation;
  StrategyProfile left, right;
  if (!opt.curve_csv.empty()) {
    if (!opt.profiles.empty()) throw std::invalid_argument("use either --profiles or --curve-csv, not both");
    std::ifstream in(opt.curve_csv);
    if (!in) throw std::invalid_argument("cannot read " + opt.curve_csv);
    std::tie(left, right) = load_credibility_curve(io::read_credibility_curve_csv(in), sim.resolved_source_opinions());
  } else {
    const auto names = split_names(opt.profiles);
    if (names.empty() || names.size() > 2)
      throw std::invalid_argument("--profiles takes one name or two comma-separated names (L,R)");
    left = find_profile(run.library(), names.front());
    right = find_profile(run.library(), names.back());
  }

  const Trajectory traj = simulate(sim, left, right, sim.seed);
  const MetricReport metrics = compute_metrics(traj, sim.params);

  run.open_output();
  std::ostringstream trajectory, histogram;
  io::write_trajectory_csv(trajectory, traj);
  io::write_histogram_csv(histogram, traj, sim.n_bins_l, sim.params.x_min, sim.params.x_max);
  run.write_text("trajectory.csv", trajectory.str());
  run.write_text("histogram.csv", histogram.str());
  json record = io::to_json(metrics);
  record["profile_L"] = {{"name", left.name}, {"factual_prob", io::to_json(std::vector{left})[left.name]}};
  record["profile_R"] = {{"name", right.name}, {"factual_prob", io::to_json(std::vector{right})[right.name]}};
  run.write_json("metrics.json", record);
  run.finish();
  std::cout << "bimodality " << record["bimodality"] << ", mean exposure " << metrics.mean_exposure << "\n";
  return 0;
}

int cmd_payoff(const Options& opt) {
  Run run("payoff", opt);
  const auto& cfg = run.config();
  if (cfg.n_rollouts < 2) throw std::invalid_argument("n_rollouts must be >= 2");
  const auto& lib = run.library();
  const PayoffMatrix payoff = estimate_payoff_matrix(lib, lib, cfg.simulation, cfg.n_rollouts, opt.workers);

  run.open_output();
  const auto names = profile_names(lib);
  run.write_text("payoff_values.csv", matrix_csv(payoff.values, names));
  run.write_text("payoff_std_errors.csv", matrix_csv(payoff.std_errors, names));
  json meta = {{"profiles", io::to_json(lib)},
               {"config", io::to_json(cfg.simulation)},
               {"config_hash", io::config_hash(io::to_json(cfg.simulation))},
               {"root_seed", cfg.simulation.seed},
               {"rollout_seeds", "derive_seed(root_seed, \"payoff-rollout\", {i, j, r})"},
               {"n_rollouts", payoff.n_rollouts},
               {"normalization", "discounted return divided by n_individuals"}};
  try {
    meta["mirror_antisymmetry"] = io::to_json(mirror_antisymmetry(payoff, mirror_map(lib, lib)));
  } catch (const std::invalid_argument& e) {
    meta["mirror_antisymmetry"] = {{"skipped", e.what()}};
  }
  run.write_json("payoff_meta.json", meta);
  run.finish();
  std::cout << "payoff matrix " << payoff.values.rows() << "x" << payoff.values.cols() << " from "
            << payoff.n_rollouts << " rollouts per entry\n";
  return 0;
}

int cmd_solve(const Options& opt) {
  Run run("solve", opt);
  const auto matrix = read_matrix_file(payoff_values_path(opt.payoff));
  if (opt.out.empty()) throw std::invalid_argument("--out is required");
  const fs::path target = fs::path(opt.out) / "equilibrium.json";
  if (fs::exists(target) && !opt.force)
    throw std::invalid_argument(target.string() + " exists; pass --force to overwrite");

  const auto& solver = run.config().solver;
  const EquilibriumResult eq = qre_solve(matrix.values, solver);
  if (!eq.converged)
    throw NonConvergence("solver did not converge after " + std::to_string(eq.iterations) + " iterations, residual " +
                         io::format_double(eq.residual));

  run.open_output();
  json record = io::to_json(eq);
  record["profiles_L"] = matrix.row_names;
  record["profiles_R"] = matrix.col_names;
  record["tau_L"] = solver.tau_L;
  record["tau_R"] = solver.tau_R;
  record["entropy_mu"] = entropy(eq.mu);
  record["entropy_nu"] = entropy(eq.nu);
  run.write_json("equilibrium.json", record);
  run.finish();
  std::cout << "value " << eq.value << ", residual " << eq.residual << ", iterations " << eq.iterations << "\n";
  return 0;
}

int cmd_deviate(const Options& opt) {
  Run run("deviate", opt);
  const auto& cfg = run.config();
  const auto& lib = run.library();
  if (opt.forced_profile.empty()) throw std::invalid_argument("--forced-profile is required");
  const bool forced_equilibrium = opt.forced_profile == "equilibrium";
  std::size_t forced_index = 0;
  if (!forced_equilibrium) {
    const std::string name = find_profile(lib, opt.forced_profile).name;
    while (lib[forced_index].name != name) ++forced_index;
  }

  const PayoffMatrix payoff = opt.payoff.empty()
                                  ? estimate_payoff_matrix(lib, lib, cfg.simulation, cfg.n_rollouts, opt.workers)
                                  : load_payoff(payoff_values_path(opt.payoff), lib);
  VectorXd forced_mu;
  if (forced_equilibrium) {
    const EquilibriumResult eq = qre_solve(payoff.values, cfg.solver);
    if (!eq.converged) throw NonConvergence("solver did not converge, residual " + io::format_double(eq.residual));
    forced_mu = eq.mu;
  } else {
    forced_mu = point_mass(lib.size(), forced_index);
  }
  const DeviationReport report =
      deviation_experiment(cfg.simulation, lib, payoff, cfg.solver, forced_mu, cfg.replications, opt.workers);
  if (!report.equilibrium.converged)
    throw NonConvergence("solver did not converge, residual " + io::format_double(report.equilibrium.residual));

  // One sample matchup: the forced profile (or the most likely one) against
  // R's most likely response.
  Eigen::Index li = 0, ri = 0;
  forced_mu.maxCoeff(&li);
  report.response_nu.maxCoeff(&ri);
  const Trajectory sample = simulate(cfg.simulation, lib[static_cast<std::size_t>(li)],
                                     lib[static_cast<std::size_t>(ri)], derive_seed(cfg.simulation.seed, "deviation-sample"));

  run.open_output();
  json record = io::to_json(report);
  record["forced_profile"] = opt.forced_profile;
  record["profiles"] = profile_names(lib);
  record["sample_matchup"] = {lib[static_cast<std::size_t>(li)].name, lib[static_cast<std::size_t>(ri)].name};
  run.write_json("deviation.json", record);
  std::ostringstream traj;
  io::write_trajectory_csv(traj, sample);
  run.write_text("sample_trajectory.csv", traj.str());
  if (opt.payoff.empty()) {
    const auto names = profile_names(lib);
    run.write_text("payoff_values.csv", matrix_csv(payoff.values, names));
    run.write_text("payoff_std_errors.csv", matrix_csv(payoff.std_errors, names));
  }
  run.finish();
  std::cout << "R response mean factual " << report.response_mean_factual << " (equilibrium "
            << report.equilibrium_mean_factual << ")\n";
  return 0;
}

int cmd_sweep(const Options& opt) {
  Run run("sweep", opt);
  const auto& cfg = run.config();
  SweepSpec spec;
  spec.axes = cfg.axes;
  spec.base = cfg.simulation;
  spec.solver = cfg.solver;
  spec.profiles = run.library();
  spec.n_rollouts = cfg.n_rollouts;
  spec.replications = cfg.replications;
  spec.workers = opt.workers;
  spec.validate();

  const auto cells = run_sweep(spec);

  run.open_output();
  std::ostringstream csv;
  io::write_sweep_csv(csv, spec, cells);
  run.write_text("sweep.csv", csv.str());
  fs::create_directories(run.out_dir() / "cells");
  std::size_t ok = 0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    json cell = io::to_json(cells[k]);
    cell["index"] = k;
    cell["axes"] = json::array();
    for (const auto& a : spec.axes) cell["axes"].push_back(a.name);
    char name[32];
    std::snprintf(name, sizeof name, "cells/cell_%04zu.json", k);
    run.write_json(name, cell);
    if (cells[k].ok) {
      ++ok;
    } else {
      std::cerr << "cell " << k << " failed: " << cells[k].error << "\n";
    }
  }
  run.finish();
  std::cout << ok << " of " << cells.size() << " cells succeeded\n";
  if (ok == 0) throw NonConvergence("every sweep cell failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Misinformation game: opinion dynamics, payoff estimation and equilibria"};
  app.set_version_flag("--version", MISINFO_VERSION);
  app.require_subcommand(1);
  Options opt;

  auto common = [&opt](CLI::App* sub, bool uses_profiles) {
    sub->add_option("--config", opt.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "root seed (overrides the config)");
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
    if (uses_profiles) {
      sub->add_option("--profile-file", opt.profile_file, "JSON profile library (name -> probabilities)")
          ->check(CLI::ExistingFile);
      sub->add_option("--profiles", opt.profiles,
                      sub->get_name() == "simulate" ? "profile name, or L,R names" : "subset of the library, comma-separated");
    }
    sub->add_option("--tau-l", opt.tau_l, "rationality of L (overrides the config)");
    sub->add_option("--tau-r", opt.tau_r, "rationality of R (overrides the config)");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "one rollout: trajectory, histogram and metrics");
  common(simulate_cmd, true);
  simulate_cmd->add_option("--curve-csv", opt.curve_csv, "credibility curve CSV (bias,credibility)")
      ->check(CLI::ExistingFile);

  auto* payoff_cmd = app.add_subcommand("payoff", "estimate the payoff matrix over the profile library");
  common(payoff_cmd, true);

  auto* solve_cmd = app.add_subcommand("solve", "entropy-regularized equilibrium of a payoff matrix");
  common(solve_cmd, false);
  solve_cmd->add_option("--payoff", opt.payoff, "payoff values CSV or the directory holding it")->required();
  solve_cmd->add_flag("--force", opt.force, "overwrite an existing equilibrium record");

  auto* deviate_cmd = app.add_subcommand("deviate", "pin L to a profile and let R respond");
  common(deviate_cmd, true);
  deviate_cmd->add_option("--forced-profile", opt.forced_profile, "profile name, or 'equilibrium'")->required();
  deviate_cmd->add_option("--payoff", opt.payoff, "payoff values CSV or directory (estimated when omitted)");

  auto* sweep_cmd = app.add_subcommand("sweep", "grid sweep over up to two of eta, xi, tau, beta1, beta2");
  common(sweep_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(opt);
    if (*payoff_cmd) return cmd_payoff(opt);
    if (*solve_cmd) return cmd_solve(opt);
    if (*deviate_cmd) return cmd_deviate(opt);
    if (*sweep_cmd) return cmd_sweep(opt);
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
