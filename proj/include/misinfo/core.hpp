#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <numbers>

#include "misinfo/rng.hpp"

namespace misinfo {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;
using ActionMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Scalar parameters of the opinion and credibility dynamics and of the reward.
struct ModelParams {
  double eta = 1.0;        // misinformation gain
  double xi = 2.0;         // credibility gain
  double kappa = 20.0;     // individual-individual homophily rate
  double kappa_hat = 5.0;  // source-individual homophily rate
  double lambda = 0.95;    // credibility memory
  double h = 0.1;          // step amplitude for both force terms
  double sigma = 0.1 * std::sqrt(0.1);
  double varpi = std::numbers::pi / 2.0;
  int vartheta = 5;
  double gamma = 0.99;
  double x_min = -1.0;
  double x_max = 1.0;

  /// Throws std::invalid_argument naming the first violated bound.
  void validate() const;
};

ModelParams default_params();

struct SimulationConfig {
  std::size_t n_individuals = 500;
  std::size_t n_sources = 10;
  std::size_t horizon_T = 200;
  double beta1 = 3.0;
  double beta2 = 2.0;
  std::size_t n_bins_l = 20;
  std::uint64_t seed = 0;
  ModelParams params;
  // Optional explicit layout, ascending, first half negative. Empty selects
  // default_source_opinions().
  VectorXd source_opinions;

  void validate() const;
  VectorXd resolved_source_opinions() const;
};

struct PopulationState {
  VectorXd opinions;
  VectorXd susceptibilities;

  std::size_t size() const { return static_cast<std::size_t>(opinions.size()); }
};

struct SourceState {
  VectorXd opinions;      // fixed over a trajectory
  VectorXd credibilities;
  VectorXi actions;       // 1 = factual, 0 = misinformation

  std::size_t size() const { return static_cast<std::size_t>(opinions.size()); }
};

/// Full time series of one rollout. Row t of each history is time step t.
struct Trajectory {
  MatrixXd opinion_history;      // (T+1) x N
  MatrixXd credibility_history;  // (T+1) x M
  ActionMatrix action_history;   // T x M
  VectorXd susceptibilities;     // N
  VectorXd source_opinions;      // M

  std::size_t horizon() const { return static_cast<std::size_t>(action_history.rows()); }
  std::size_t n_individuals() const { return static_cast<std::size_t>(opinion_history.cols()); }
  std::size_t n_sources() const { return static_cast<std::size_t>(credibility_history.cols()); }
  VectorXd final_opinions() const { return opinion_history.row(opinion_history.rows() - 1).transpose(); }
};

/// n i.i.d. Beta(beta1, beta2) draws built from two gamma variates.
VectorXd sample_susceptibilities(std::size_t n, double beta1, double beta2, Rng& rng);

/// Uniform opinions on [x_min, x_max] and Beta susceptibilities.
PopulationState init_population(const SimulationConfig& config, Rng& rng);

/// Mirror-symmetric source layout that excludes 0, ascending.
///
/// The m/2 slots per side sit at the midpoints of an even partition of
/// (0, x_max], bent toward the center by kSourceSpacingExponent so that the
/// innermost pair is slightly closer together than the outer ones. An exponent
/// of 1 gives evenly spaced sources.
VectorXd default_source_opinions(std::size_t m, double x_min, double x_max);

inline constexpr double kSourceSpacingExponent = 1.08;

/// Evenly spaced midpoint layout (exponent 1).
VectorXd evenly_spaced_source_opinions(std::size_t m, double x_min, double x_max);

enum class Side { L, R };

/// Global source index of a player's k-th owned source, ordered centrist to
/// radical. L owns the negative half, R the positive half.
std::size_t owned_source_index(Side side, std::size_t k, std::size_t n_sources);

}  // namespace misinfo
