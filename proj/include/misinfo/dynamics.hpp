#pragma once

#include <cmath>
#include <vector>

#include "misinfo/core.hpp"
#include "misinfo/strategies.hpp"

namespace misinfo {

// Interaction kernels ---------------------------------------------------------

template <typename Scalar>
Scalar social_kernel(Scalar r, Scalar kappa) {
  return std::exp(-kappa * r);
}

/// 1 + eta * a. Misinformation (a = 0) keeps the smaller factor and so reaches
/// further along the opinion axis.
template <typename Scalar>
Scalar misinfo_factor(int a, Scalar eta) {
  return Scalar(1) + eta * Scalar(a);
}

template <typename Scalar>
Scalar credibility_factor(Scalar c, Scalar s, Scalar xi) {
  return Scalar(1) + xi * (Scalar(1) - c) * (Scalar(1) - s);
}

template <typename Scalar>
Scalar media_kernel(Scalar r, Scalar c, int a, Scalar s, const ModelParams& p) {
  return std::exp(-Scalar(p.kappa_hat) * misinfo_factor(a, Scalar(p.eta)) *
                  credibility_factor(c, s, Scalar(p.xi)) * r);
}

// Update rules ----------------------------------------------------------------

/// lambda * c + (1 - lambda) * a, elementwise.
template <typename CredDerived, typename ActDerived>
VectorXd credibility_step(const Eigen::MatrixBase<CredDerived>& c, const Eigen::MatrixBase<ActDerived>& actions,
                          double lambda) {
  return (lambda * c.array() + (1.0 - lambda) * actions.template cast<double>().array()).matrix();
}

/// Normalizer and mean displacement of the all-to-all exponential social kernel.
struct SocialForce {
  VectorXd normalizer;  // A^i, self term included
  VectorXd force;       // (1/A^i) sum_j phi(|x^i - x^j|) (x^j - x^i)
};

/// O(N log N) evaluation of the social term.
///
/// Sorting the opinions turns both one-sided kernel sums into first-order
/// recursions, each step multiplying by exp(-kappa * gap) <= 1.
SocialForce social_force(const VectorXd& x, double kappa);

/// Same, reusing `order` (a permutation sorting a nearby x) as a warm start.
/// On return `order` sorts x.
SocialForce social_force(const VectorXd& x, double kappa, std::vector<Eigen::Index>& order);

/// Normalized media displacement (1/B^i) sum_m psi(...) (y^m - x^i).
VectorXd media_force(const PopulationState& pop, const SourceState& src, const ModelParams& params);

/// One Euler step of the opinion dynamics with explicit standard-normal draws.
/// The result is clamped to [x_min, x_max].
VectorXd opinion_step(const PopulationState& pop, const SourceState& src, const ModelParams& params,
                      const Eigen::Ref<const VectorXd>& noise);

VectorXd opinion_step(const PopulationState& pop, const SourceState& src, const ModelParams& params, Rng& rng);

/// Fraction of opinions in each of l equal-width bins; the last bin is closed.
VectorXd discretize_opinions(const Eigen::Ref<const VectorXd>& x, std::size_t l, double x_min, double x_max);

struct Observation {
  VectorXd histogram;
  VectorXd credibilities;
};

Observation observe(const PopulationState& pop, const SourceState& src, std::size_t l, const ModelParams& params);

// Rollout ---------------------------------------------------------------------

/// Runs horizon_T steps from a fresh population with c_0 = 1.
///
/// The stream seed is split into independent sub-streams for the initial
/// population, the action draws and the opinion noise, so changing the
/// profiles leaves the population and noise unchanged.
Trajectory simulate(const SimulationConfig& config, const StrategyProfile& policy_L,
                    const StrategyProfile& policy_R, std::uint64_t stream_seed);

/// Rollout from an explicit initial population with explicit action and noise
/// schedules (T x M and T x N).
Trajectory simulate_schedule(const SimulationConfig& config, const PopulationState& initial,
                             const ActionMatrix& actions, const MatrixXd& noise);

}  // namespace misinfo
