#include "misinfo/metrics.hpp"

#include <limits>
#include <stdexcept>

namespace misinfo {

VectorXd misinformation_exposure(const Trajectory& traj, double kappa_hat) {
  const auto horizon = static_cast<Eigen::Index>(traj.horizon());
  const auto n = static_cast<Eigen::Index>(traj.n_individuals());
  const auto m = static_cast<Eigen::Index>(traj.n_sources());
  if (horizon == 0 || n == 0 || m == 0) throw std::invalid_argument("exposure needs a nonempty trajectory");

  VectorXd exposure = VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < horizon; ++t) {
    for (Eigen::Index s = 0; s < m; ++s) {
      if (traj.action_history(t, s) != 0) continue;
      exposure.array() +=
          (-kappa_hat * (traj.opinion_history.row(t).transpose().array() - traj.source_opinions(s)).abs()).exp();
    }
  }
  return exposure / static_cast<double>(horizon * m);
}

double discounted_return(const Trajectory& traj, const ModelParams& params) {
  double total = 0.0;
  double discount = 1.0;
  for (Eigen::Index k = 1; k < traj.opinion_history.rows(); ++k) {
    discount *= params.gamma;
    total += discount * running_reward(traj.opinion_history.row(k), params.varpi, params.vartheta);
  }
  return total;
}

MetricReport compute_metrics(const Trajectory& traj, const ModelParams& params) {
  MetricReport report;
  report.exposure_per_individual = misinformation_exposure(traj, params.kappa_hat);
  report.mean_exposure = report.exposure_per_individual.mean();
  try {
    report.bimodality = bimodality(traj.final_opinions());
  } catch (const std::domain_error&) {
    report.bimodality = std::numeric_limits<double>::quiet_NaN();
  }
  report.discounted_return = discounted_return(traj, params);
  return report;
}

}  // namespace misinfo
