#include "misinfo/sweep.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace misinfo {

namespace {

bool known_axis(const std::string& name) {
  return name == "eta" || name == "xi" || name == "tau" || name == "beta1" || name == "beta2";
}

// Axis values excluding tau: cells sharing this key share a payoff matrix.
std::vector<double> payoff_key(const SweepSpec& spec, const std::vector<double>& values) {
  std::vector<double> key;
  for (std::size_t a = 0; a < spec.axes.size(); ++a)
    if (spec.axes[a].name != "tau") key.push_back(values[a]);
  return key;
}

SweepCellResult finish_cell(const SweepSpec& spec, std::vector<double> values, const PayoffMatrix& payoff) {
  SweepCellResult cell;
  cell.values = std::move(values);
  SimulationConfig config = spec.base;
  SolverParams solver = spec.solver;
  for (std::size_t a = 0; a < spec.axes.size(); ++a) apply_axis_value(spec.axes[a].name, cell.values[a], config, solver);
  cell.equilibrium = qre_solve(payoff.values, solver);
  if (!cell.equilibrium.converged)
    throw std::runtime_error("equilibrium solver did not converge, residual " +
                             std::to_string(cell.equilibrium.residual));
  cell.outcome = simulate_mixture(config, spec.profiles, spec.profiles, cell.equilibrium.mu, cell.equilibrium.nu,
                                  spec.replications, equilibrium_play_root(config.seed), spec.workers);
  cell.phase = phase_label(cell.equilibrium, spec.profiles);
  cell.ok = true;
  return cell;
}

PayoffMatrix cell_payoff(const SweepSpec& spec, const std::vector<double>& values) {
  SimulationConfig config = spec.base;
  SolverParams solver = spec.solver;
  for (std::size_t a = 0; a < spec.axes.size(); ++a) apply_axis_value(spec.axes[a].name, values[a], config, solver);
  return estimate_payoff_matrix(spec.profiles, spec.profiles, config, spec.n_rollouts, spec.workers);
}

}  // namespace

void SweepSpec::validate() const {
  if (axes.empty()) throw std::invalid_argument("sweep needs at least one axis");
  if (axes.size() > 2) throw std::invalid_argument("sweep supports at most two axes");
  for (const auto& axis : axes) {
    if (!known_axis(axis.name))
      throw std::invalid_argument("unknown sweep axis '" + axis.name + "'; valid axes: eta, xi, tau, beta1, beta2");
    if (axis.values.empty()) throw std::invalid_argument("sweep axis '" + axis.name + "' has no values");
    for (double v : axis.values)
      if (!std::isfinite(v)) throw std::invalid_argument("sweep axis '" + axis.name + "' has a non-finite value");
  }
  if (axes.size() == 2 && axes[0].name == axes[1].name) throw std::invalid_argument("sweep axes must be distinct");
  if (profiles.empty()) throw std::invalid_argument("sweep needs a nonempty profile library");
  if (n_rollouts < 2) throw std::invalid_argument("n_rollouts must be >= 2");
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  base.validate();
  solver.validate();
}

std::size_t SweepSpec::cell_count() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.values.size();
  return n;
}

std::vector<double> SweepSpec::cell_values(std::size_t index) const {
  std::vector<double> values(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const std::size_t len = axes[a].values.size();
    values[a] = axes[a].values[index % len];
    index /= len;
  }
  return values;
}

const char* phase_name(Phase phase) { return phase == Phase::One ? "phase-1" : "phase-2"; }

PhaseAssessment phase_label(const EquilibriumResult& equilibrium, const std::vector<StrategyProfile>& profiles) {
  if (static_cast<std::size_t>(equilibrium.mu.size()) != profiles.size() ||
      static_cast<std::size_t>(equilibrium.nu.size()) != profiles.size())
    throw std::invalid_argument("equilibrium does not match the profile library");
  const Eigen::Index slots = profiles.front().factual_prob.size();
  if (slots < 2) throw std::invalid_argument("phase labelling needs at least two sources per side");
  const Eigen::Index band = std::max<Eigen::Index>(1, std::min<Eigen::Index>(2, slots / 2));

  VectorXd expected_L = VectorXd::Zero(slots);
  VectorXd expected_R = VectorXd::Zero(slots);
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    expected_L += equilibrium.mu(static_cast<Eigen::Index>(k)) * profiles[k].factual_prob;
    expected_R += equilibrium.nu(static_cast<Eigen::Index>(k)) * profiles[k].factual_prob;
  }
  PhaseAssessment out;
  out.centrist_factual = 0.5 * (expected_L.head(band).mean() + expected_R.head(band).mean());
  out.radical_factual = 0.5 * (expected_L.tail(band).mean() + expected_R.tail(band).mean());
  out.label = out.radical_factual < out.centrist_factual ? Phase::One : Phase::Two;
  const double uniform_entropy = std::log(static_cast<double>(profiles.size()));
  out.low_confidence = entropy(equilibrium.mu) >= 0.99 * uniform_entropy && entropy(equilibrium.nu) >= 0.99 * uniform_entropy;
  return out;
}

void apply_axis_value(const std::string& name, double value, SimulationConfig& config, SolverParams& solver) {
  if (name == "eta") {
    config.params.eta = value;
  } else if (name == "xi") {
    config.params.xi = value;
  } else if (name == "tau") {
    solver.tau_L = value;
    solver.tau_R = value;
  } else if (name == "beta1") {
    config.beta1 = value;
  } else if (name == "beta2") {
    config.beta2 = value;
  } else {
    throw std::invalid_argument("unknown sweep axis '" + name + "'");
  }
}

std::uint64_t equilibrium_play_root(std::uint64_t seed) { return derive_seed(seed, "equilibrium-play"); }

SweepCellResult run_cell(const SweepSpec& spec, std::size_t index) {
  std::vector<double> values = spec.cell_values(index);
  try {
    return finish_cell(spec, values, cell_payoff(spec, values));
  } catch (const std::exception& e) {
    SweepCellResult failed;
    failed.values = std::move(values);
    failed.error = e.what();
    return failed;
  }
}

std::vector<SweepCellResult> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::map<std::vector<double>, PayoffMatrix> payoffs;
  std::vector<SweepCellResult> cells;
  cells.reserve(spec.cell_count());
  for (std::size_t index = 0; index < spec.cell_count(); ++index) {
    std::vector<double> values = spec.cell_values(index);
    try {
      const auto key = payoff_key(spec, values);
      auto it = payoffs.find(key);
      if (it == payoffs.end()) it = payoffs.emplace(key, cell_payoff(spec, values)).first;
      cells.push_back(finish_cell(spec, values, it->second));
    } catch (const std::exception& e) {
      SweepCellResult failed;
      failed.values = std::move(values);
      failed.error = e.what();
      cells.push_back(std::move(failed));
    }
  }
  return cells;
}

}  // namespace misinfo
