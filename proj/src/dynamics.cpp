#include "misinfo/dynamics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace misinfo {

SocialForce social_force(const VectorXd& x, double kappa) {
  std::vector<Eigen::Index> order;
  return social_force(x, kappa, order);
}

SocialForce social_force(const VectorXd& x, double kappa, std::vector<Eigen::Index>& order) {
  const Eigen::Index n = x.size();
  if (n == 0) return {VectorXd(), VectorXd()};
  if (static_cast<Eigen::Index>(order.size()) != n) {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  } else {
    // Insertion sort: cheap when only a few neighbours swapped.
    for (std::size_t k = 1; k < order.size(); ++k) {
      const Eigen::Index cur = order[k];
      std::size_t j = k;
      while (j > 0 && x(order[j - 1]) > x(cur)) {
        order[j] = order[j - 1];
        --j;
      }
      order[j] = cur;
    }
  }

  Eigen::ArrayXd z(n);
  for (Eigen::Index k = 0; k < n; ++k) z(k) = x(order[static_cast<std::size_t>(k)]);
  // gap(k) = z(k+1) - z(k); decay(k) = exp(-kappa * gap(k)).
  const Eigen::ArrayXd gap = n > 1 ? Eigen::ArrayXd(z.tail(n - 1) - z.head(n - 1)) : Eigen::ArrayXd();
  const Eigen::ArrayXd decay = (-kappa * gap).exp();

  // left0(k) = sum_{j<=k} e^{-kappa (z_k - z_j)}, left1(k) = sum_{j<=k} e^{...} (z_k - z_j);
  // right0/right1 mirror these over j >= k.
  Eigen::ArrayXd left0(n), left1(n), right0(n), right1(n);
  left0(0) = 1.0;
  left1(0) = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    left0(k) = decay(k - 1) * left0(k - 1) + 1.0;
    left1(k) = decay(k - 1) * (left1(k - 1) + gap(k - 1) * left0(k - 1));
  }
  right0(n - 1) = 1.0;
  right1(n - 1) = 0.0;
  for (Eigen::Index k = n - 2; k >= 0; --k) {
    right0(k) = decay(k) * right0(k + 1) + 1.0;
    right1(k) = decay(k) * (right1(k + 1) + gap(k) * right0(k + 1));
  }

  SocialForce out{VectorXd(n), VectorXd(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = order[static_cast<std::size_t>(k)];
    const double a = left0(k) + right0(k) - 1.0;
    out.normalizer(i) = a;
    out.force(i) = (right1(k) - left1(k)) / a;
  }
  return out;
}

VectorXd media_force(const PopulationState& pop, const SourceState& src, const ModelParams& p) {
  const Eigen::Index n = pop.opinions.size();
  const auto x = pop.opinions.array();
  const Eigen::ArrayXd skeptic = 1.0 - pop.susceptibilities.array();
  Eigen::ArrayXd weighted = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd displacement(n), psi(n);
  for (Eigen::Index m = 0; m < src.opinions.size(); ++m) {
    const double rate = p.kappa_hat * misinfo_factor(src.actions(m), p.eta);
    const double penalty = p.xi * (1.0 - src.credibilities(m));
    displacement = src.opinions(m) - x;
    psi = (-rate * (1.0 + penalty * skeptic) * displacement.abs()).exp();
    weighted += psi * displacement;
    total += psi;
  }
  return (weighted / total).matrix();
}

namespace {

VectorXd step_impl(const PopulationState& pop, const SourceState& src, const ModelParams& params,
                   const Eigen::Ref<const VectorXd>& noise, std::vector<Eigen::Index>& order) {
  if (noise.size() != pop.opinions.size()) throw std::invalid_argument("noise vector length must equal N");
  const SocialForce social = social_force(pop.opinions, params.kappa, order);
  const VectorXd media = media_force(pop, src, params);
  const VectorXd next = pop.opinions + params.h * social.force + params.h * media + params.sigma * noise;
  return next.cwiseMax(params.x_min).cwiseMin(params.x_max);
}

}  // namespace

VectorXd opinion_step(const PopulationState& pop, const SourceState& src, const ModelParams& params,
                      const Eigen::Ref<const VectorXd>& noise) {
  std::vector<Eigen::Index> order;
  return step_impl(pop, src, params, noise, order);
}

VectorXd opinion_step(const PopulationState& pop, const SourceState& src, const ModelParams& params, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd w(pop.opinions.size());
  for (auto& v : w) v = normal(rng);
  return opinion_step(pop, src, params, w);
}

VectorXd discretize_opinions(const Eigen::Ref<const VectorXd>& x, std::size_t l, double x_min, double x_max) {
  if (l < 2) throw std::invalid_argument("histogram needs at least 2 bins");
  if (!(x_min < x_max)) throw std::invalid_argument("x_min must be < x_max");
  VectorXd z = VectorXd::Zero(static_cast<Eigen::Index>(l));
  if (x.size() == 0) return z;
  const double width = (x_max - x_min) / static_cast<double>(l);
  for (double v : x) {
    const double pos = std::floor((v - x_min) / width);
    const auto bin = static_cast<Eigen::Index>(std::clamp(pos, 0.0, static_cast<double>(l - 1)));
    z(bin) += 1.0;
  }
  return z / static_cast<double>(x.size());
}

Observation observe(const PopulationState& pop, const SourceState& src, std::size_t l, const ModelParams& params) {
  return {discretize_opinions(pop.opinions, l, params.x_min, params.x_max), src.credibilities};
}

namespace {

// Shared rollout loop. next_actions(t) and next_noise(t, out) supply the
// per-step draws.
template <typename ActionFn, typename NoiseFn>
Trajectory rollout(const SimulationConfig& config, PopulationState pop, ActionFn&& next_actions,
                   NoiseFn&& next_noise) {
  const auto& p = config.params;
  const auto n = static_cast<Eigen::Index>(pop.size());
  const auto m = static_cast<Eigen::Index>(config.n_sources);
  const auto horizon = static_cast<Eigen::Index>(config.horizon_T);

  SourceState src{config.resolved_source_opinions(), VectorXd::Ones(m), VectorXi::Ones(m)};

  Trajectory traj;
  traj.opinion_history.resize(horizon + 1, n);
  traj.credibility_history.resize(horizon + 1, m);
  traj.action_history.resize(horizon, m);
  traj.susceptibilities = pop.susceptibilities;
  traj.source_opinions = src.opinions;
  traj.opinion_history.row(0) = pop.opinions.transpose();
  traj.credibility_history.row(0) = src.credibilities.transpose();

  VectorXd noise(n);
  std::vector<Eigen::Index> order;
  for (Eigen::Index t = 0; t < horizon; ++t) {
    src.actions = next_actions(t);
    next_noise(t, noise);
    pop.opinions = step_impl(pop, src, p, noise, order);
    src.credibilities = credibility_step(src.credibilities, src.actions, p.lambda);
    traj.action_history.row(t) = src.actions.transpose();
    traj.opinion_history.row(t + 1) = pop.opinions.transpose();
    traj.credibility_history.row(t + 1) = src.credibilities.transpose();
  }
  return traj;
}

}  // namespace

Trajectory simulate(const SimulationConfig& config, const StrategyProfile& policy_L,
                    const StrategyProfile& policy_R, std::uint64_t stream_seed) {
  config.validate();
  policy_L.validate();
  policy_R.validate();
  const auto half = static_cast<Eigen::Index>(config.n_sources / 2);
  if (policy_L.factual_prob.size() != half || policy_R.factual_prob.size() != half)
    throw std::invalid_argument("each profile must cover n_sources / 2 sources (" + std::to_string(half) +
                                "), got " + std::to_string(policy_L.factual_prob.size()) + " and " +
                                std::to_string(policy_R.factual_prob.size()));

  Rng pop_rng = make_stream(stream_seed, "population");
  Rng action_rng = make_stream(stream_seed, "actions");
  Rng noise_rng = make_stream(stream_seed, "noise");
  const VectorXd prob = factual_prob_by_source(policy_L, policy_R);
  std::normal_distribution<double> normal(0.0, 1.0);

  return rollout(
      config, init_population(config, pop_rng), [&](Eigen::Index) { return sample_actions(prob, action_rng); },
      [&](Eigen::Index, VectorXd& w) {
        for (auto& v : w) v = normal(noise_rng);
      });
}

Trajectory simulate_schedule(const SimulationConfig& config, const PopulationState& initial,
                             const ActionMatrix& actions, const MatrixXd& noise) {
  config.validate();
  const auto horizon = static_cast<Eigen::Index>(config.horizon_T);
  if (initial.opinions.size() != initial.susceptibilities.size() ||
      static_cast<std::size_t>(initial.opinions.size()) != config.n_individuals)
    throw std::invalid_argument("initial population does not match n_individuals");
  if (actions.rows() != horizon || actions.cols() != static_cast<Eigen::Index>(config.n_sources))
    throw std::invalid_argument("action schedule must be horizon_T x n_sources");
  if (noise.rows() != horizon || noise.cols() != initial.opinions.size())
    throw std::invalid_argument("noise schedule must be horizon_T x n_individuals");
  return rollout(
      config, initial, [&](Eigen::Index t) { return VectorXi(actions.row(t).transpose()); },
      [&](Eigen::Index t, VectorXd& w) { w = noise.row(t).transpose(); });
}

}  // namespace misinfo
