#pragma once

#include <optional>
#include <vector>

#include "misinfo/core.hpp"
#include "misinfo/strategies.hpp"

namespace misinfo {

/// Empirical zero-sum game. values(i, j) is the mean per-capita discounted
/// return (discounted return divided by N) when L plays profile i and R plays
/// profile j; L maximizes.
struct PayoffMatrix {
  MatrixXd values;
  MatrixXd std_errors;
  MatrixXd mean_bimodality;  // diagnostic: mean final bimodality per entry
  std::size_t n_rollouts = 0;
};

struct SolverParams {
  double tau_L = 10.0;
  double tau_R = 10.0;
  double step_size = 0.0;  // 0 selects 1 / (2 max|A| + max(1/tau_L, 1/tau_R))
  std::size_t max_iters = 5'000'000;
  double tolerance = 1e-9;

  void validate() const;
};

struct EquilibriumResult {
  VectorXd mu;  // over L's (row) profiles
  VectorXd nu;  // over R's (column) profiles
  double value = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Seed of rollout r of entry (i, j).
std::uint64_t payoff_rollout_seed(std::uint64_t root, std::size_t i, std::size_t j, std::size_t r);

PayoffMatrix estimate_payoff_matrix(const std::vector<StrategyProfile>& profiles_L,
                                    const std::vector<StrategyProfile>& profiles_R, const SimulationConfig& config,
                                    std::size_t n_rollouts, std::size_t workers = 1);

struct MirrorReport {
  std::size_t entries = 0;
  std::size_t within = 0;       // |A(i,j) + A(m(j),m(i))| <= z_bound * combined se
  double fraction_within = 0.0;
  double max_abs_z = 0.0;
  double z_bound = 3.0;
};

/// Mirror antisymmetry check of a square payoff matrix. mirror[i] is the
/// index of profile i's mirror image; profiles listed centrist to radical
/// mirror onto themselves.
MirrorReport mirror_antisymmetry(const PayoffMatrix& payoff, const std::vector<std::size_t>& mirror,
                                 double z_bound = 3.0);

/// Mirror map between two profile lists: entries with equal factual_prob.
/// Throws std::invalid_argument when a profile has no mirror.
std::vector<std::size_t> mirror_map(const std::vector<StrategyProfile>& profiles_L,
                                    const std::vector<StrategyProfile>& profiles_R);

/// Softmax with max-shift.
VectorXd softmax(const Eigen::Ref<const VectorXd>& logits);

double entropy(const Eigen::Ref<const VectorXd>& p);

/// mu^T A nu + H(mu) / tau_L - H(nu) / tau_R.
double regularized_value(const MatrixXd& A, const VectorXd& mu, const VectorXd& nu, double tau_L, double tau_R);

/// Max-norm gap of mu = softmax(tau_L A nu) and nu = softmax(-tau_R A^T mu).
double qre_residual(const MatrixXd& A, const VectorXd& mu, const VectorXd& nu, double tau_L, double tau_R);

/// Entropy-regularized equilibrium by extragradient with multiplicative-weights
/// updates. Starts from uniform unless an interior start is given. Returns with
/// converged = false if the residual does not reach the tolerance.
EquilibriumResult qre_solve(const MatrixXd& A, const SolverParams& solver,
                            const std::optional<VectorXd>& mu0 = std::nullopt,
                            const std::optional<VectorXd>& nu0 = std::nullopt);

struct NashSolution {
  VectorXd mu;
  VectorXd nu;
  double value = 0.0;
};

/// Exact mixed equilibrium of the unregularized game by support enumeration.
/// Limited to 5 strategies per player.
NashSolution nash_oracle_small(const MatrixXd& A);

/// softmax(tau A nu) for L, softmax(-tau A^T mu) for R.
VectorXd best_response(const MatrixXd& A, const VectorXd& opponent, Side side, double tau);

double total_variation(const VectorXd& p, const VectorXd& q);

/// Expected mean factual probability of a mixture over profiles.
double expected_factual_prob(const std::vector<StrategyProfile>& profiles, const VectorXd& weights);

struct OutcomeStats {
  double bimodality_mean = 0.0;
  double bimodality_se = 0.0;
  double polarized_fraction = 0.0;
  double exposure_mean = 0.0;
  double exposure_se = 0.0;
  double exposure_left_mean = 0.0;   // individuals with final opinion < 0
  double exposure_right_mean = 0.0;  // final opinion > 0
  std::size_t replications = 0;
  std::size_t degenerate = 0;  // rollouts with undefined bimodality
};

/// Simulates `replications` matchups with (i, j) drawn from (mu, nu).
OutcomeStats simulate_mixture(const SimulationConfig& config, const std::vector<StrategyProfile>& profiles_L,
                              const std::vector<StrategyProfile>& profiles_R, const VectorXd& mu, const VectorXd& nu,
                              std::size_t replications, std::uint64_t stream_root, std::size_t workers = 1);

struct DeviationReport {
  VectorXd forced_mu;
  VectorXd response_nu;
  EquilibriumResult equilibrium;
  double response_mean_factual = 0.0;     // R under the response
  double equilibrium_mean_factual = 0.0;  // R at equilibrium
  double tv_to_equilibrium = 0.0;
  double payoff_L_deviation = 0.0;        // forced_mu^T A response_nu
  double payoff_L_equilibrium = 0.0;      // mu*^T A nu*
  bool deviation_loses_for_L = false;
  OutcomeStats outcome;
};

/// Pins L to `forced_mu`, lets R respond with its softmax best response at
/// tau_R and simulates the induced matchups.
DeviationReport deviation_experiment(const SimulationConfig& config, const std::vector<StrategyProfile>& profiles,
                                     const PayoffMatrix& payoff, const SolverParams& solver,
                                     const VectorXd& forced_mu, std::size_t replications, std::size_t workers = 1);

VectorXd point_mass(std::size_t size, std::size_t index);

}  // namespace misinfo
