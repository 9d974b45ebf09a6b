// Acceptance suite: one pass/fail line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "misinfo/dynamics.hpp"
#include "misinfo/game.hpp"
#include "misinfo/io.hpp"
#include "misinfo/metrics.hpp"
#include "misinfo/strategies.hpp"
#include "misinfo/sweep.hpp"

using namespace misinfo;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kRoot = 20240917;
constexpr std::size_t kSeeds = 20;
constexpr std::size_t kRollouts = 200;

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

void note(const char* fmt, auto... args) {
  std::printf("    ");
  if constexpr (sizeof...(args) == 0)
    std::fputs(fmt, stdout);
  else
    std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

SimulationConfig small_config(std::string_view label) {
  SimulationConfig c;
  c.n_individuals = 200;
  c.horizon_T = 200;
  c.seed = derive_seed(kRoot, label);
  return c;
}

const StrategyProfile& lib(const std::string& name) {
  static const auto library = profile_library();
  for (const auto& p : library)
    if (p.name == name) return p;
  throw std::invalid_argument(name);
}

// Defaults payoff matrix at N = 200, shared by several criteria.
const PayoffMatrix& default_payoff() {
  static const PayoffMatrix payoff = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto library = profile_library();
    PayoffMatrix p = estimate_payoff_matrix(library, library, small_config("defaults"), kRollouts, workers());
    note("defaults payoff matrix estimated in %.0f s",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return p;
  }();
  return payoff;
}

// 1 ---------------------------------------------------------------------------

bool kernel_identities() {
  ModelParams p;
  bool ok = social_kernel(0.0, p.kappa) == 1.0;
  ok = ok && credibility_factor(1.0, 0.3, p.xi) == 1.0 && credibility_factor(1.0, 0.9, 7.0) == 1.0;
  ok = ok && misinfo_factor(0, p.eta) == 1.0 && misinfo_factor(0, 3.5) == 1.0;
  double worst = 0.0;
  for (double r : {0.0, 0.1, 0.37, 1.0, 2.0})
    for (int a : {0, 1})
      for (double s : {0.0, 0.5, 1.0}) {
        const double expect = std::exp(-p.kappa_hat * (1.0 + p.eta * a) * r);
        worst = std::max(worst, std::abs(media_kernel(r, 1.0, a, s, p) - expect));
      }
  note("max |psi(r,1,a,s) - exp(-kappa_hat f(a) r)| = %.3g", worst);
  return ok && worst == 0.0;
}

// 2 ---------------------------------------------------------------------------

bool credibility_stationarity() {
  constexpr std::size_t steps = 2000;
  bool ok = true;
  for (double p : {0.2, 0.5, 0.8}) {
    SimulationConfig c;
    c.n_individuals = 4;
    c.horizon_T = steps;
    StrategyProfile profile{"const", VectorXd::Constant(5, p)};
    const Trajectory traj = simulate(c, profile, profile, derive_seed(kRoot, "stationarity", {static_cast<std::uint64_t>(p * 10)}));
    // Time average over c_1..c_T of every source.
    const VectorXd per_source = traj.credibility_history.bottomRows(steps).colwise().mean().transpose();
    const double pooled = per_source.mean();
    const double worst = (per_source.array() - p).abs().maxCoeff();
    note("p=%.1f: time-average credibility %.4f over %zu sources (worst single source off by %.4f)", p, pooled,
         static_cast<std::size_t>(per_source.size()), worst);
    ok = ok && std::abs(pooled - p) <= 0.02;
  }
  return ok;
}

// 3, 4 ------------------------------------------------------------------------

struct RunSummary {
  double bimodality;
  double mean_exposure;
  std::optional<bool> u_shape;
};

RunSummary summarize(const Trajectory& traj, const ModelParams& params) {
  const MetricReport m = compute_metrics(traj, params);
  const VectorXd x = traj.final_opinions();
  double outer = 0.0, inner = 0.0;
  std::size_t n_outer = 0, n_inner = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x(i));
    if (ax > 0.5) outer += m.exposure_per_individual(i), ++n_outer;
    if (ax < 0.25) inner += m.exposure_per_individual(i), ++n_inner;
  }
  RunSummary s{m.bimodality, m.mean_exposure, std::nullopt};
  if (n_outer > 0 && n_inner > 0) s.u_shape = outer / n_outer > inner / n_inner;
  return s;
}

std::vector<RunSummary> population_runs(const std::string& profile, std::string_view label) {
  SimulationConfig c;  // N = 500, T = 200
  std::vector<RunSummary> out;
  for (std::size_t k = 0; k < kSeeds; ++k)
    out.push_back(summarize(simulate(c, lib(profile), lib(profile), derive_seed(kRoot, label, {k})), c.params));
  return out;
}

bool consensus_without_misinformation() {
  const auto runs = population_runs("P1", "consensus");
  std::size_t below = 0;
  double exposure = 0.0;
  for (const auto& r : runs) {
    below += r.bimodality < kBimodalityThreshold;
    exposure += r.mean_exposure / static_cast<double>(runs.size());
  }
  note("bimodality < 5/9 in %zu/%zu runs, mean exposure %.4g", below, runs.size(), exposure);
  return below >= 18 && exposure < 0.01;
}

bool polarization_real_world() {
  const auto runs = population_runs("P3", "polarization");
  std::size_t above = 0, u_shape = 0, undefined = 0;
  double bc = 0.0;
  for (const auto& r : runs) {
    above += r.bimodality > kBimodalityThreshold;
    bc += r.bimodality / static_cast<double>(runs.size());
    if (!r.u_shape) ++undefined;
    else u_shape += *r.u_shape;
  }
  note("bimodality > 5/9 in %zu/%zu runs (mean %.3f); exposure U-shape in %zu/%zu (%zu runs lacked one group)", above,
       runs.size(), bc, u_shape, runs.size(), undefined);
  return above >= 18 && u_shape >= 18;
}

// 5 ---------------------------------------------------------------------------

bool null_model() {
  SimulationConfig c = small_config("null-model");
  c.params.eta = 0.0;
  c.params.xi = 0.0;
  const auto library = profile_library();
  const PayoffMatrix p = estimate_payoff_matrix(library, library, c, kRollouts, workers());
  std::size_t within = 0;
  double max_z = 0.0;
  for (Eigen::Index i = 0; i < p.values.rows(); ++i)
    for (Eigen::Index j = 0; j < p.values.cols(); ++j) {
      const double z = std::abs(p.values(i, j)) / p.std_errors(i, j);
      within += z <= 3.0;
      max_z = std::max(max_z, z);
    }
  const EquilibriumResult eq = qre_solve(p.values, SolverParams{});
  const double h = entropy(eq.mu), bound = 0.95 * std::log(9.0);
  note("%zu/81 entries within 3 se of 0 (max |z| %.2f); entropy(mu*) %.4f vs bound %.4f", within, max_z, h, bound);
  return within == 81 && eq.converged && h >= bound;
}

// 6 ---------------------------------------------------------------------------

bool mirror_antisymmetry_check() {
  const auto library = profile_library();
  const MirrorReport r = mirror_antisymmetry(default_payoff(), mirror_map(library, library));
  note("%zu/%zu entries within 3 combined se (fraction %.3f, max |z| %.2f)", r.within, r.entries, r.fraction_within,
       r.max_abs_z);
  return r.fraction_within >= 0.95;
}

// 7 ---------------------------------------------------------------------------

VectorXd plain_softmax(const VectorXd& z) {
  VectorXd e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

// Damped iteration of mu = softmax(tau A nu), nu = softmax(-tau A^T mu).
std::pair<VectorXd, VectorXd> damped_fixed_point(const MatrixXd& A, double tau) {
  VectorXd mu = VectorXd::Constant(A.rows(), 1.0 / A.rows());
  VectorXd nu = VectorXd::Constant(A.cols(), 1.0 / A.cols());
  for (int it = 0; it < 1'000'000; ++it) {
    const VectorXd mu_next = 0.8 * mu + 0.2 * plain_softmax(tau * A * nu);
    const VectorXd nu_next = 0.8 * nu + 0.2 * plain_softmax(-tau * A.transpose() * mu);
    const double change = std::max((mu_next - mu).cwiseAbs().maxCoeff(), (nu_next - nu).cwiseAbs().maxCoeff());
    mu = mu_next;
    nu = nu_next;
    if (change < 1e-13) break;
  }
  return {mu, nu};
}

bool nash_gap(const MatrixXd& A, const char* what) {
  constexpr double tau = 1000.0;
  SolverParams s;
  s.tau_L = s.tau_R = tau;
  const EquilibriumResult eq = qre_solve(A, s);
  const NashSolution nash = nash_oracle_small(A);
  const double gap = std::abs(eq.value - nash.value);
  const double bound = std::log(static_cast<double>(std::max(A.rows(), A.cols()))) * 2.0 / tau;
  note("%s: tau=1000 value %.6g, Nash value %.6g, gap %.3g vs bound %.3g", what, eq.value, nash.value, gap, bound);
  return eq.converged && gap <= bound;
}

bool qre_correctness() {
  SolverParams s;  // tau = 10
  const EquilibriumResult eq = qre_solve(default_payoff().values, s);
  const double residual = qre_residual(default_payoff().values, eq.mu, eq.nu, s.tau_L, s.tau_R);
  note("9x9 estimated matrix, tau=10: residual %.3g after %zu iterations", residual, eq.iterations);
  bool ok = eq.converged && residual <= 1e-6;

  MatrixXd A(2, 2);
  A << 2, 0, 0, 1;
  SolverParams one;
  one.tau_L = one.tau_R = 1.0;
  const EquilibriumResult small = qre_solve(A, one);
  const auto [mu, nu] = damped_fixed_point(A, 1.0);
  const double diff = std::max((small.mu - mu).cwiseAbs().maxCoeff(), (small.nu - nu).cwiseAbs().maxCoeff());
  note("2x2 oracle, tau=1: max difference to damped fixed point %.3g", diff);
  ok = ok && small.converged && diff <= 1e-6;

  ok = nash_gap(A, "2x2 oracle") && ok;
  ok = nash_gap(default_payoff().values.topLeftCorner(5, 5), "P1-P5 submatrix") && ok;
  return ok;
}

// 8 ---------------------------------------------------------------------------

bool rationality_monotonicity() {
  const SimulationConfig c = small_config("defaults");
  const auto library = profile_library();
  constexpr std::size_t reps = 100;
  std::vector<OutcomeStats> outcomes;
  std::vector<double> entropies;
  bool ok = true;
  for (double tau : {1.0, 10.0, 100.0}) {
    SolverParams s;
    s.tau_L = s.tau_R = tau;
    const EquilibriumResult eq = qre_solve(default_payoff().values, s);
    ok = ok && eq.converged;
    outcomes.push_back(
        simulate_mixture(c, library, library, eq.mu, eq.nu, reps, equilibrium_play_root(c.seed), workers()));
    entropies.push_back(entropy(eq.mu));
    note("tau=%g: bimodality %.4f +- %.4f, entropy(mu*) %.4f", tau, outcomes.back().bimodality_mean,
         outcomes.back().bimodality_se, entropies.back());
  }
  for (std::size_t k = 0; k + 1 < outcomes.size(); ++k) {
    const double se = std::hypot(outcomes[k].bimodality_se, outcomes[k + 1].bimodality_se);
    ok = ok && outcomes[k + 1].bimodality_mean >= outcomes[k].bimodality_mean - se;
    ok = ok && entropies[k + 1] < entropies[k];
  }
  return ok;
}

// 9 ---------------------------------------------------------------------------

bool phase_structure() {
  SweepSpec spec;
  spec.axes = {{"eta", {0.0, 0.5, 1.0, 1.5, 2.0}}, {"xi", {0.0, 1.0, 2.0, 3.0, 4.0}}};
  spec.base = small_config("phase-grid");
  spec.n_rollouts = kRollouts;
  spec.replications = 20;
  spec.workers = workers();
  const auto t0 = std::chrono::steady_clock::now();
  const auto cells = run_sweep(spec);
  note("grid finished in %.0f s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  std::set<Phase> labels;
  bool all_ok = true, default_phase1 = false;
  const SweepCellResult* best = nullptr;
  std::printf("    eta\\xi ");
  for (double xi : spec.axes[1].values) std::printf("       %-6g", xi);
  std::printf("\n");
  for (std::size_t r = 0; r < 5; ++r) {
    std::printf("    %-6g", spec.axes[0].values[r]);
    for (std::size_t q = 0; q < 5; ++q) {
      const auto& cell = cells[r * 5 + q];
      if (!cell.ok) {
        std::printf("  failed      ");
        all_ok = false;
        continue;
      }
      std::printf("  %c %.4f%s", cell.phase.label == Phase::One ? '1' : '2', cell.outcome.exposure_mean,
                  cell.phase.low_confidence ? "?" : " ");
      labels.insert(cell.phase.label);
      if (cell.values[0] == 1.0 && cell.values[1] == 2.0) default_phase1 = cell.phase.label == Phase::One;
      if (!best || cell.outcome.exposure_mean > best->outcome.exposure_mean) best = &cell;
    }
    std::printf("\n");
  }
  note("cells show phase label and mean exposure; '?' marks near-uniform equilibria");
  if (!all_ok || !best) return false;
  // Informational: exposure on either side of each phase-1 to phase-2 step along xi.
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t q = 0; q + 1 < 5; ++q) {
      const auto& a = cells[r * 5 + q];
      const auto& b = cells[r * 5 + q + 1];
      if (a.phase.label == Phase::One && b.phase.label == Phase::Two)
        note("boundary at eta=%g: exposure %.4f (xi=%g, phase-1) -> %.4f (xi=%g, phase-2)", a.values[0],
             a.outcome.exposure_mean, a.values[1], b.outcome.exposure_mean, b.values[1]);
    }
  note("labels present: %zu; default cell phase-1: %s; max exposure %.4f at eta=%g xi=%g (%s)", labels.size(),
       default_phase1 ? "yes" : "no", best->outcome.exposure_mean, best->values[0], best->values[1],
       phase_name(best->phase.label));
  return labels.size() == 2 && default_phase1 && best->phase.label == Phase::Two;
}

// 10 --------------------------------------------------------------------------

bool deviation_escalation() {
  const auto library = profile_library();
  const DeviationReport d = deviation_experiment(small_config("defaults"), library, default_payoff(), SolverParams{},
                                                 point_mass(library.size(), 4), 20, workers());
  note("R mean factual prob: response %.4f, equilibrium %.4f", d.response_mean_factual, d.equilibrium_mean_factual);
  return d.equilibrium.converged && d.response_mean_factual <= d.equilibrium_mean_factual;
}

// 11 --------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool cli(const std::string& args) {
  const std::string cmd = std::string(MISINFO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

bool determinism() {
  const fs::path dir = fs::temp_directory_path() / "misinfo_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path config = dir / "config.json";
  io::write_text_file(config, R"({"n_individuals": 40, "horizon_T": 30, "n_rollouts": 6, "replications": 4,
    "axes": [{"name": "eta", "values": [0, 2]}, {"name": "tau", "values": [1, 10]}]})");
  const std::string common = "--config " + config.string() + " --seed 11 ";

  struct Command {
    std::string name;
    std::function<std::string(const fs::path& out)> args;
    std::vector<std::string> files;
  };
  const fs::path reference_payoff = dir / "payoff_reference";
  if (!cli("payoff " + common + "--profiles P1,P3,P5 --out " + reference_payoff.string())) {
    note("reference payoff run failed");
    return false;
  }
  const std::vector<Command> commands = {
      {"simulate", [&](const fs::path& o) { return "simulate " + common + "--profiles P3,P2 --out " + o.string(); },
       {"trajectory.csv", "histogram.csv"}},
      {"payoff", [&](const fs::path& o) { return "payoff " + common + "--profiles P1,P3,P5 --out " + o.string(); },
       {"payoff_values.csv", "payoff_std_errors.csv"}},
      {"solve",
       [&](const fs::path& o) { return "solve " + common + "--payoff " + reference_payoff.string() + " --out " + o.string(); },
       {"equilibrium.json"}},
      {"deviate",
       [&](const fs::path& o) {
         return "deviate " + common + "--profiles P1,P3,P5 --forced-profile P5 --out " + o.string();
       },
       {"payoff_values.csv", "payoff_std_errors.csv", "sample_trajectory.csv", "deviation.json"}},
      {"sweep", [&](const fs::path& o) { return "sweep " + common + "--profiles P1,P3,P5 --out " + o.string(); },
       {"sweep.csv"}},
  };

  bool ok = true;
  for (const auto& command : commands) {
    std::map<std::string, std::string> first;
    bool same = true;
    int run = 0;
    for (std::size_t w : {1, 8, 1, 8}) {
      const fs::path out = dir / (command.name + "_" + std::to_string(run++));
      if (!cli(command.args(out) + " --workers " + std::to_string(w))) {
        note("%s failed with %zu workers", command.name.c_str(), w);
        same = false;
        continue;
      }
      for (const auto& f : command.files) {
        const std::string bytes = slurp(out / f);
        auto [it, inserted] = first.emplace(f, bytes);
        if (!inserted && it->second != bytes) same = false;
        if (bytes.empty()) same = false;
      }
    }
    note("%s: outputs %s across reruns with 1 and 8 workers", command.name.c_str(),
         same ? "byte-identical" : "DIFFER");
    ok = ok && same;
  }
  return ok;
}

struct Criterion {
  int number;
  const char* title;
  bool (*check)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "kernel identities", kernel_identities},
      {2, "credibility stationarity", credibility_stationarity},
      {3, "consensus without misinformation", consensus_without_misinformation},
      {4, "polarization under real-world-like profiles", polarization_real_world},
      {5, "null-model payoff", null_model},
      {6, "mirror antisymmetry", mirror_antisymmetry_check},
      {7, "QRE correctness", qre_correctness},
      {8, "rationality monotonicity", rationality_monotonicity},
      {9, "phase structure", phase_structure},
      {10, "deviation escalation", deviation_escalation},
      {11, "determinism", determinism},
  };
  std::set<int> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    std::printf("C%d %s\n", c.number, c.title);
    std::fflush(stdout);
    bool pass = false;
    try {
      pass = c.check();
    } catch (const std::exception& e) {
      note("error: %s", e.what());
    }
    std::printf("[%s] C%d %s\n", pass ? "PASS" : "FAIL", c.number, c.title);
    std::fflush(stdout);
    failed += !pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
