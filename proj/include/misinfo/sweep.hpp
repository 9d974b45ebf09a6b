#pragma once

#include <string>
#include <vector>

#include "misinfo/game.hpp"

namespace misinfo {

struct SweepAxis {
  std::string name;  // one of eta, xi, tau, beta1, beta2
  std::vector<double> values;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;  // at most two
  SimulationConfig base;
  SolverParams solver;
  std::vector<StrategyProfile> profiles = profile_library();
  std::size_t n_rollouts = 200;    // per payoff entry
  std::size_t replications = 20;   // equilibrium-play rollouts per cell
  std::size_t workers = 1;

  /// Throws std::invalid_argument on unknown names, empty or non-finite axes.
  void validate() const;
  std::size_t cell_count() const;
  /// Axis values of cell `index` (row-major, last axis fastest).
  std::vector<double> cell_values(std::size_t index) const;
};

enum class Phase { One, Two };

const char* phase_name(Phase phase);

struct PhaseAssessment {
  Phase label = Phase::One;
  double radical_factual = 0.0;   // outermost two sources per side
  double centrist_factual = 0.0;  // innermost two sources per side
  bool low_confidence = false;    // both marginals near uniform
};

/// Phase one when radical sources share factual news less often than centrist
/// ones under the equilibrium mixture, phase two otherwise.
PhaseAssessment phase_label(const EquilibriumResult& equilibrium, const std::vector<StrategyProfile>& profiles);

struct SweepCellResult {
  std::vector<double> values;
  bool ok = false;
  std::string error;
  EquilibriumResult equilibrium;
  OutcomeStats outcome;
  PhaseAssessment phase;
};

/// Applies one cell's axis values to the configuration and solver.
void apply_axis_value(const std::string& name, double value, SimulationConfig& config, SolverParams& solver);

/// Runs a single cell from scratch. Used by run_sweep and for order checks.
SweepCellResult run_cell(const SweepSpec& spec, std::size_t index);

/// Every cell of the grid, in index order. A cell that throws is recorded with
/// ok = false and its message; the rest of the grid still runs. Payoff
/// matrices are shared between cells that differ only in tau.
std::vector<SweepCellResult> run_sweep(const SweepSpec& spec);

/// Seed root of the equilibrium-play replications of a sweep cell.
std::uint64_t equilibrium_play_root(std::uint64_t seed);

}  // namespace misinfo
