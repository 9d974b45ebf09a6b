#include "misinfo/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "misinfo/dynamics.hpp"
#include "misinfo/metrics.hpp"
#include "misinfo/parallel.hpp"

namespace misinfo {

void SolverParams::validate() const {
  if (!(tau_L > 0.0) || !(tau_R > 0.0) || !std::isfinite(tau_L) || !std::isfinite(tau_R))
    throw std::invalid_argument("rationality tau must be finite and > 0");
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) throw std::invalid_argument("step_size must be >= 0");
  if (max_iters == 0) throw std::invalid_argument("max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
}

std::uint64_t payoff_rollout_seed(std::uint64_t root, std::size_t i, std::size_t j, std::size_t r) {
  return derive_seed(root, "payoff-rollout", {i, j, r});
}

PayoffMatrix estimate_payoff_matrix(const std::vector<StrategyProfile>& profiles_L,
                                    const std::vector<StrategyProfile>& profiles_R, const SimulationConfig& config,
                                    std::size_t n_rollouts, std::size_t workers) {
  config.validate();
  if (n_rollouts < 2) throw std::invalid_argument("n_rollouts must be >= 2");
  if (profiles_L.empty() || profiles_R.empty()) throw std::invalid_argument("profile lists must be nonempty");

  const std::size_t rows = profiles_L.size();
  const std::size_t cols = profiles_R.size();
  const std::size_t total = rows * cols * n_rollouts;
  std::vector<double> returns(total);
  std::vector<double> bimodal(total);

  parallel_for(total, workers, [&](std::size_t task) {
    const std::size_t r = task % n_rollouts;
    const std::size_t j = (task / n_rollouts) % cols;
    const std::size_t i = task / (n_rollouts * cols);
    const Trajectory traj = simulate(config, profiles_L[i], profiles_R[j], payoff_rollout_seed(config.seed, i, j, r));
    returns[task] = discounted_return(traj, config.params) / static_cast<double>(config.n_individuals);
    try {
      bimodal[task] = bimodality(traj.final_opinions());
    } catch (const std::domain_error&) {
      bimodal[task] = std::numeric_limits<double>::quiet_NaN();
    }
  });

  PayoffMatrix out;
  out.n_rollouts = n_rollouts;
  out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  out.std_errors.resizeLike(out.values);
  out.mean_bimodality.resizeLike(out.values);
  const auto nr = static_cast<Eigen::Index>(n_rollouts);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t base = (i * cols + j) * n_rollouts;
      const Eigen::Map<const VectorXd> sample(returns.data() + base, nr);
      const Eigen::Map<const VectorXd> bc(bimodal.data() + base, nr);
      const double mean = sample.mean();
      const double var = (sample.array() - mean).square().sum() / static_cast<double>(n_rollouts - 1);
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      out.values(ii, jj) = mean;
      out.std_errors(ii, jj) = std::sqrt(var / static_cast<double>(n_rollouts));
      out.mean_bimodality(ii, jj) = bc.mean();
    }
  }
  return out;
}

MirrorReport mirror_antisymmetry(const PayoffMatrix& payoff, const std::vector<std::size_t>& mirror, double z_bound) {
  const MatrixXd& A = payoff.values;
  const MatrixXd& se = payoff.std_errors;
  if (A.rows() != A.cols() || se.rows() != A.rows() || se.cols() != A.cols())
    throw std::invalid_argument("mirror check needs a square payoff matrix with matching std errors");
  if (mirror.size() != static_cast<std::size_t>(A.rows())) throw std::invalid_argument("mirror map has the wrong size");
  for (std::size_t k : mirror)
    if (k >= mirror.size()) throw std::invalid_argument("mirror map index out of range");

  MirrorReport report;
  report.z_bound = z_bound;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      const auto mi = static_cast<Eigen::Index>(mirror[static_cast<std::size_t>(i)]);
      const auto mj = static_cast<Eigen::Index>(mirror[static_cast<std::size_t>(j)]);
      const double gap = std::abs(A(i, j) + A(mj, mi));
      // An entry that is its own mirror counts twice in the sum.
      const double scale = (i == mj && j == mi) ? 2.0 * se(i, j) : std::hypot(se(i, j), se(mj, mi));
      const double z = scale > 0.0 ? gap / scale : (gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      ++report.entries;
      if (z <= z_bound) ++report.within;
      report.max_abs_z = std::max(report.max_abs_z, z);
    }
  }
  report.fraction_within = static_cast<double>(report.within) / static_cast<double>(report.entries);
  return report;
}

std::vector<std::size_t> mirror_map(const std::vector<StrategyProfile>& profiles_L,
                                    const std::vector<StrategyProfile>& profiles_R) {
  std::vector<std::size_t> out;
  for (const auto& p : profiles_L) {
    std::size_t k = 0;
    while (k < profiles_R.size() && !(profiles_R[k].factual_prob.size() == p.factual_prob.size() &&
                                      profiles_R[k].factual_prob == p.factual_prob))
      ++k;
    if (k == profiles_R.size()) throw std::invalid_argument("profile '" + p.name + "' has no mirror image");
    out.push_back(k);
  }
  return out;
}

VectorXd softmax(const Eigen::Ref<const VectorXd>& logits) {
  const VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

double entropy(const Eigen::Ref<const VectorXd>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double regularized_value(const MatrixXd& A, const VectorXd& mu, const VectorXd& nu, double tau_L, double tau_R) {
  return mu.dot(A * nu) + entropy(mu) / tau_L - entropy(nu) / tau_R;
}

double qre_residual(const MatrixXd& A, const VectorXd& mu, const VectorXd& nu, double tau_L, double tau_R) {
  const double row_gap = (mu - softmax(tau_L * (A * nu))).cwiseAbs().maxCoeff();
  const double col_gap = (nu - softmax(-tau_R * (A.transpose() * mu))).cwiseAbs().maxCoeff();
  return std::max(row_gap, col_gap);
}

namespace {

void log_normalize(VectorXd& logp) {
  const double shift = logp.maxCoeff();
  logp.array() -= shift + std::log((logp.array() - shift).exp().sum());
}

VectorXd interior_start(const std::optional<VectorXd>& start, Eigen::Index size, const char* who) {
  if (!start) return VectorXd::Constant(size, 1.0 / static_cast<double>(size));
  if (start->size() != size) throw std::invalid_argument(std::string("initial ") + who + " has the wrong size");
  if ((start->array() <= 0.0).any()) throw std::invalid_argument(std::string("initial ") + who + " must be interior");
  return *start / start->sum();
}

}  // namespace

EquilibriumResult qre_solve(const MatrixXd& A, const SolverParams& solver, const std::optional<VectorXd>& mu0,
                            const std::optional<VectorXd>& nu0) {
  solver.validate();
  if (A.size() == 0 || !A.allFinite()) throw std::invalid_argument("payoff matrix must be nonempty and finite");

  const double reg_L = 1.0 / solver.tau_L;
  const double reg_R = 1.0 / solver.tau_R;
  const double scale = A.cwiseAbs().maxCoeff();
  double eta = 1.0 / (2.0 * scale + std::max(reg_L, reg_R));
  if (solver.step_size > 0.0) eta = solver.step_size;
  eta = std::min(eta, 1.0 / std::max(reg_L, reg_R));
  const double keep_L = 1.0 - eta * reg_L;
  const double keep_R = 1.0 - eta * reg_R;

  EquilibriumResult out;
  VectorXd log_mu = interior_start(mu0, A.rows(), "mu").array().log();
  VectorXd log_nu = interior_start(nu0, A.cols(), "nu").array().log();
  VectorXd mu = log_mu.array().exp();
  VectorXd nu = log_nu.array().exp();
  const MatrixXd At = A.transpose();

  out.residual = qre_residual(A, mu, nu, solver.tau_L, solver.tau_R);
  std::size_t it = 0;
  while (out.residual > solver.tolerance && it < solver.max_iters) {
    // Predictor.
    VectorXd log_mu_mid = keep_L * log_mu + eta * (A * nu);
    VectorXd log_nu_mid = keep_R * log_nu - eta * (At * mu);
    log_normalize(log_mu_mid);
    log_normalize(log_nu_mid);
    const VectorXd mu_mid = log_mu_mid.array().exp();
    const VectorXd nu_mid = log_nu_mid.array().exp();
    // Corrector from the predicted point's gradients.
    log_mu = keep_L * log_mu + eta * (A * nu_mid);
    log_nu = keep_R * log_nu - eta * (At * mu_mid);
    log_normalize(log_mu);
    log_normalize(log_nu);
    mu = log_mu.array().exp();
    nu = log_nu.array().exp();
    ++it;
    out.residual = qre_residual(A, mu, nu, solver.tau_L, solver.tau_R);
  }
  out.mu = mu / mu.sum();
  out.nu = nu / nu.sum();
  out.iterations = it;
  out.converged = out.residual <= solver.tolerance;
  out.value = regularized_value(A, out.mu, out.nu, solver.tau_L, solver.tau_R);
  return out;
}

namespace {

std::vector<std::vector<Eigen::Index>> subsets(Eigen::Index n, Eigen::Index k) {
  std::vector<std::vector<Eigen::Index>> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    std::vector<Eigen::Index> s;
    for (Eigen::Index i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

// Solves [B -1; 1^T 0] [w; v] = [0; 1]: weights w equalizing the payoffs B w.
std::optional<std::pair<VectorXd, double>> equalizer(const MatrixXd& B) {
  const Eigen::Index k = B.rows();
  MatrixXd system = MatrixXd::Zero(k + 1, k + 1);
  system.topLeftCorner(k, k) = B;
  system.topRightCorner(k, 1).setConstant(-1.0);
  system.bottomLeftCorner(1, k).setOnes();
  VectorXd rhs = VectorXd::Zero(k + 1);
  rhs(k) = 1.0;
  Eigen::FullPivLU<MatrixXd> lu(system);
  if (!lu.isInvertible()) return std::nullopt;
  const VectorXd sol = lu.solve(rhs);
  return std::make_pair(VectorXd(sol.head(k)), sol(k));
}

}  // namespace

NashSolution nash_oracle_small(const MatrixXd& A) {
  if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("empty payoff matrix");
  if (A.rows() > 5 || A.cols() > 5) throw std::invalid_argument("support enumeration is limited to 5x5 games");
  const double tol = 1e-9 * std::max(1.0, A.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 1; k <= std::min(A.rows(), A.cols()); ++k) {
    for (const auto& rows : subsets(A.rows(), k)) {
      for (const auto& cols : subsets(A.cols(), k)) {
        MatrixXd sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
          for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = A(rows[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
        const auto col_sol = equalizer(sub);
        const auto row_sol = equalizer(sub.transpose());
        if (!col_sol || !row_sol) continue;
        if ((col_sol->first.array() < -tol).any() || (row_sol->first.array() < -tol).any()) continue;
        if (std::abs(col_sol->second - row_sol->second) > tol) continue;
        NashSolution s{VectorXd::Zero(A.rows()), VectorXd::Zero(A.cols()), col_sol->second};
        for (Eigen::Index a = 0; a < k; ++a) {
          s.mu(rows[static_cast<std::size_t>(a)]) = std::max(0.0, row_sol->first(a));
          s.nu(cols[static_cast<std::size_t>(a)]) = std::max(0.0, col_sol->first(a));
        }
        s.mu /= s.mu.sum();
        s.nu /= s.nu.sum();
        // No profitable deviation for either player.
        if (((A * s.nu).array() > s.value + tol).any()) continue;
        if (((A.transpose() * s.mu).array() < s.value - tol).any()) continue;
        return s;
      }
    }
  }
  throw std::runtime_error("support enumeration found no equilibrium");
}

VectorXd best_response(const MatrixXd& A, const VectorXd& opponent, Side side, double tau) {
  if (side == Side::L) {
    if (opponent.size() != A.cols()) throw std::invalid_argument("opponent distribution has the wrong size");
    return softmax(tau * (A * opponent));
  }
  if (opponent.size() != A.rows()) throw std::invalid_argument("opponent distribution has the wrong size");
  return softmax(-tau * (A.transpose() * opponent));
}

double total_variation(const VectorXd& p, const VectorXd& q) { return 0.5 * (p - q).cwiseAbs().sum(); }

double expected_factual_prob(const std::vector<StrategyProfile>& profiles, const VectorXd& weights) {
  if (static_cast<std::size_t>(weights.size()) != profiles.size())
    throw std::invalid_argument("weights do not match the profile list");
  double total = 0.0;
  for (std::size_t k = 0; k < profiles.size(); ++k) total += weights(static_cast<Eigen::Index>(k)) * profiles[k].mean_factual_prob();
  return total;
}

namespace {

std::size_t draw_index(const VectorXd& weights, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, weights.sum());
  const double u = uni(rng);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    acc += weights(k);
    if (u < acc) return static_cast<std::size_t>(k);
  }
  Eigen::Index last = weights.size() - 1;
  while (last > 0 && weights(last) <= 0.0) --last;
  return static_cast<std::size_t>(last);
}

double mean_se(const std::vector<double>& v, double& se) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return mean;
}

}  // namespace

OutcomeStats simulate_mixture(const SimulationConfig& config, const std::vector<StrategyProfile>& profiles_L,
                              const std::vector<StrategyProfile>& profiles_R, const VectorXd& mu, const VectorXd& nu,
                              std::size_t replications, std::uint64_t stream_root, std::size_t workers) {
  if (replications == 0) throw std::invalid_argument("replications must be >= 1");
  if (static_cast<std::size_t>(mu.size()) != profiles_L.size() || static_cast<std::size_t>(nu.size()) != profiles_R.size())
    throw std::invalid_argument("mixture weights do not match the profile lists");

  std::vector<double> bc(replications), exposure(replications), left(replications), right(replications);
  std::vector<char> valid(replications, 1);
  parallel_for(replications, workers, [&](std::size_t r) {
    Rng pick = make_stream(stream_root, "matchup", {r});
    const std::size_t i = draw_index(mu, pick);
    const std::size_t j = draw_index(nu, pick);
    const Trajectory traj = simulate(config, profiles_L[i], profiles_R[j], derive_seed(stream_root, "mixture-rollout", {r}));
    const VectorXd x = traj.final_opinions();
    const VectorXd g = misinformation_exposure(traj, config.params.kappa_hat);
    try {
      bc[r] = bimodality(x);
    } catch (const std::domain_error&) {
      valid[r] = 0;
      bc[r] = 0.0;
    }
    exposure[r] = g.mean();
    double sl = 0.0, sr = 0.0;
    std::size_t nl = 0, nr = 0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (x(k) < 0.0) {
        sl += g(k);
        ++nl;
      } else if (x(k) > 0.0) {
        sr += g(k);
        ++nr;
      }
    }
    left[r] = nl ? sl / static_cast<double>(nl) : 0.0;
    right[r] = nr ? sr / static_cast<double>(nr) : 0.0;
  });

  OutcomeStats s;
  s.replications = replications;
  std::vector<double> valid_bc;
  std::size_t polarized = 0;
  for (std::size_t r = 0; r < replications; ++r) {
    if (!valid[r]) {
      ++s.degenerate;
      continue;
    }
    valid_bc.push_back(bc[r]);
    if (bc[r] > kBimodalityThreshold) ++polarized;
  }
  if (!valid_bc.empty()) {
    s.bimodality_mean = mean_se(valid_bc, s.bimodality_se);
    s.polarized_fraction = static_cast<double>(polarized) / static_cast<double>(valid_bc.size());
  }
  s.exposure_mean = mean_se(exposure, s.exposure_se);
  double unused = 0.0;
  s.exposure_left_mean = mean_se(left, unused);
  s.exposure_right_mean = mean_se(right, unused);
  return s;
}

DeviationReport deviation_experiment(const SimulationConfig& config, const std::vector<StrategyProfile>& profiles,
                                     const PayoffMatrix& payoff, const SolverParams& solver,
                                     const VectorXd& forced_mu, std::size_t replications, std::size_t workers) {
  const MatrixXd& A = payoff.values;
  if (static_cast<std::size_t>(A.rows()) != profiles.size() || A.rows() != A.cols())
    throw std::invalid_argument("payoff matrix does not match the profile library");
  if (forced_mu.size() != A.rows() || (forced_mu.array() < 0.0).any() || std::abs(forced_mu.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("forced L policy must be a distribution over the profile library");

  DeviationReport rep;
  rep.equilibrium = qre_solve(A, solver);
  rep.forced_mu = forced_mu;
  rep.response_nu = best_response(A, forced_mu, Side::R, solver.tau_R);
  rep.response_mean_factual = expected_factual_prob(profiles, rep.response_nu);
  rep.equilibrium_mean_factual = expected_factual_prob(profiles, rep.equilibrium.nu);
  rep.tv_to_equilibrium = total_variation(rep.response_nu, rep.equilibrium.nu);
  rep.payoff_L_deviation = forced_mu.dot(A * rep.response_nu);
  rep.payoff_L_equilibrium = rep.equilibrium.mu.dot(A * rep.equilibrium.nu);
  rep.deviation_loses_for_L = rep.payoff_L_deviation < rep.payoff_L_equilibrium;
  rep.outcome = simulate_mixture(config, profiles, profiles, forced_mu, rep.response_nu, replications,
                                 derive_seed(config.seed, "deviation"), workers);
  return rep;
}

VectorXd point_mass(std::size_t size, std::size_t index) {
  if (index >= size) throw std::invalid_argument("profile index out of range");
  VectorXd p = VectorXd::Zero(static_cast<Eigen::Index>(size));
  p(static_cast<Eigen::Index>(index)) = 1.0;
  return p;
}

}  // namespace misinfo
