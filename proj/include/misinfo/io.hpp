#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "misinfo/game.hpp"
#include "misinfo/metrics.hpp"
#include "misinfo/sweep.hpp"

namespace misinfo::io {

using nlohmann::json;

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

// Configuration ----------------------------------------------------------------

/// Everything a command reads from its config file. Unknown keys are
/// rejected so that a misspelled field is not silently ignored.
struct RunConfig {
  SimulationConfig simulation;
  SolverParams solver;
  std::size_t n_rollouts = 200;
  std::size_t replications = 20;
  std::vector<SweepAxis> axes;  // sweep only
};

json to_json(const ModelParams& p);
json to_json(const SimulationConfig& c);
json to_json(const SolverParams& s);
json to_json(const RunConfig& r);

/// Overwrites only the fields present in `j`. Throws std::invalid_argument on
/// unknown keys or wrongly typed values.
void update_from_json(ModelParams& p, const json& j);
void update_from_json(SimulationConfig& c, const json& j);
void update_from_json(SolverParams& s, const json& j);
void update_from_json(RunConfig& r, const json& j);

RunConfig load_run_config(const std::filesystem::path& path);

/// FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const json& j);

// Files ------------------------------------------------------------------------

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Trajectories and metrics -------------------------------------------------------

/// Long format: t, entity_kind, entity_id, opinion, credibility, action,
/// susceptibility. Fields that do not apply to the entity are left empty;
/// the action column of the last time step is empty.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// t, bin_center, density with density = fraction / bin width.
void write_histogram_csv(std::ostream& out, const Trajectory& traj, std::size_t bins, double x_min, double x_max);

json to_json(const MetricReport& m);

// Profiles and curves -------------------------------------------------------------

std::vector<CredibilityCurveRecord> read_credibility_curve_csv(std::istream& in);

/// Object mapping profile name to its probability list.
std::vector<StrategyProfile> read_profile_file(const std::filesystem::path& path);
json to_json(const std::vector<StrategyProfile>& profiles);

// Game ------------------------------------------------------------------------------

/// Header "profile,<col names>" then one labelled row per profile.
void write_matrix_csv(std::ostream& out, const MatrixXd& m, const std::vector<std::string>& row_names,
                      const std::vector<std::string>& col_names);

struct LabelledMatrix {
  MatrixXd values;
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
};

LabelledMatrix read_matrix_csv(std::istream& in);

json to_json(const EquilibriumResult& e);
json to_json(const MirrorReport& r);
json to_json(const OutcomeStats& o);
json to_json(const DeviationReport& d);

// Sweep ---------------------------------------------------------------------------

void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepCellResult>& cells);
json to_json(const SweepCellResult& cell);

// Manifest --------------------------------------------------------------------------

struct RunManifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
  std::string version;
};

json to_json(const RunManifest& m);

}  // namespace misinfo::io
