#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "misinfo/core.hpp"

namespace misinfo {

struct MetricReport {
  VectorXd exposure_per_individual;
  double mean_exposure = 0.0;
  double bimodality = 0.0;  // of the final opinions; NaN if degenerate
  double discounted_return = 0.0;
};

/// Per-individual misinformation exposure: the time- and source-average of
/// e^{-kappa_hat |x^i_t - y^m|} (1 - a^m_t) over steps 0..T-1.
VectorXd misinformation_exposure(const Trajectory& traj, double kappa_hat);

/// -sum_i sin(varpi x^i)^vartheta. Positive when mass sits at negative
/// opinions, i.e. in favour of the maximizing player L.
template <typename Derived>
double running_reward(const Eigen::MatrixBase<Derived>& x, double varpi, int vartheta) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double s = std::sin(varpi * static_cast<double>(x(i)));
    double term = 1.0;
    for (int k = 0; k < vartheta; ++k) term *= s;
    total += term;
  }
  return -total;
}

/// sum_{k=1}^{T} gamma^k r(x_k).
double discounted_return(const Trajectory& traj, const ModelParams& params);

/// Sample bimodality coefficient (g1^2 + 1) / (g2 + 3 (n-1)^2 / ((n-2)(n-3)))
/// with the bias-corrected sample skewness g1 and excess kurtosis g2.
/// Throws std::domain_error for n < 4 or zero variance.
template <typename Derived>
double bimodality(const Eigen::MatrixBase<Derived>& x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 4) throw std::domain_error("bimodality needs at least 4 samples");
  const double mean = x.mean();
  const Eigen::ArrayXd d = x.derived().array().template cast<double>() - mean;
  const double m2 = d.square().mean();
  const double scale = d.abs().maxCoeff() + std::abs(mean);
  if (!(m2 > 1e-300) || std::sqrt(m2) <= 64.0 * std::numeric_limits<double>::epsilon() * scale) throw std::domain_error("bimodality is undefined for zero variance");
  const double m3 = d.cube().mean();
  const double m4 = d.square().square().mean();
  const double b1 = m3 / std::pow(m2, 1.5);
  const double b2 = m4 / (m2 * m2) - 3.0;
  const double skew = b1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
  const double excess = (n - 1.0) / ((n - 2.0) * (n - 3.0)) * ((n + 1.0) * b2 + 6.0);
  return (skew * skew + 1.0) / (excess + 3.0 * (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)));
}

inline constexpr double kBimodalityThreshold = 5.0 / 9.0;

MetricReport compute_metrics(const Trajectory& traj, const ModelParams& params);

}  // namespace misinfo
