#include "misinfo/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace misinfo {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool finite(double v) { return std::isfinite(v); }

VectorXd layout(std::size_t m, double x_min, double x_max, double exponent) {
  require(m >= 2 && m % 2 == 0, "number of sources must be even and >= 2, got " + std::to_string(m));
  require(x_min < x_max, "x_min must be < x_max");
  const double center = 0.5 * (x_min + x_max);
  const double half_width = 0.5 * (x_max - x_min);
  const std::size_t half = m / 2;
  VectorXd y(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < half; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(half);
    const double offset = half_width * std::pow(u, exponent);
    y(static_cast<Eigen::Index>(half + k)) = center + offset;
    y(static_cast<Eigen::Index>(half - 1 - k)) = center - offset;
  }
  return y;
}

}  // namespace

void ModelParams::validate() const {
  require(finite(eta) && eta >= 0.0, "eta must be >= 0");
  require(finite(xi) && xi >= 0.0, "xi must be >= 0");
  require(finite(kappa) && kappa > 0.0, "kappa must be > 0");
  require(finite(kappa_hat) && kappa_hat > 0.0, "kappa_hat must be > 0");
  require(lambda > 0.0 && lambda < 1.0, "lambda must lie in (0, 1)");
  require(finite(h) && h > 0.0, "h must be > 0");
  require(finite(sigma) && sigma >= 0.0, "sigma must be >= 0");
  require(finite(varpi), "varpi must be finite");
  require(vartheta >= 1, "vartheta must be a positive integer");
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(finite(x_min) && finite(x_max) && x_min < x_max, "x_min must be < x_max");
}

ModelParams default_params() { return ModelParams{}; }

void SimulationConfig::validate() const {
  params.validate();
  require(n_individuals >= 1, "n_individuals must be >= 1");
  require(n_sources >= 2 && n_sources % 2 == 0, "n_sources must be even and >= 2");
  require(horizon_T >= 1, "horizon_T must be >= 1");
  require(finite(beta1) && beta1 >= 1.0, "beta1 must be >= 1");
  require(finite(beta2) && beta2 >= 1.0, "beta2 must be >= 1");
  require(n_bins_l >= 2, "n_bins_l must be >= 2");
  if (source_opinions.size() != 0) {
    require(static_cast<std::size_t>(source_opinions.size()) == n_sources,
            "source_opinions must have n_sources entries");
    const double center = 0.5 * (params.x_min + params.x_max);
    const auto half = static_cast<Eigen::Index>(n_sources / 2);
    for (Eigen::Index m = 0; m < source_opinions.size(); ++m) {
      const double y = source_opinions(m);
      require(finite(y) && y >= params.x_min && y <= params.x_max, "source opinion outside [x_min, x_max]");
      if (m > 0) require(source_opinions(m - 1) <= y, "source_opinions must be ascending");
      require(m < half ? y < center : y > center, "first half of sources must lie below the center, second half above");
    }
  }
}

VectorXd SimulationConfig::resolved_source_opinions() const {
  if (source_opinions.size() != 0) return source_opinions;
  return default_source_opinions(n_sources, params.x_min, params.x_max);
}

VectorXd sample_susceptibilities(std::size_t n, double beta1, double beta2, Rng& rng) {
  require(n >= 1, "susceptibility sample size must be >= 1");
  require(finite(beta1) && finite(beta2) && beta1 >= 1.0 && beta2 >= 1.0, "beta shape parameters must be >= 1");
  std::gamma_distribution<double> ga(beta1, 1.0);
  std::gamma_distribution<double> gb(beta2, 1.0);
  VectorXd s(static_cast<Eigen::Index>(n));
  for (auto& v : s) {
    const double a = ga(rng);
    const double b = gb(rng);
    v = std::clamp(a / (a + b), 0.0, 1.0);
  }
  return s;
}

PopulationState init_population(const SimulationConfig& config, Rng& rng) {
  config.validate();
  const auto& p = config.params;
  std::uniform_real_distribution<double> uni(p.x_min, p.x_max);
  PopulationState pop;
  pop.opinions.resize(static_cast<Eigen::Index>(config.n_individuals));
  for (auto& x : pop.opinions) x = uni(rng);
  pop.susceptibilities = sample_susceptibilities(config.n_individuals, config.beta1, config.beta2, rng);
  return pop;
}

VectorXd default_source_opinions(std::size_t m, double x_min, double x_max) {
  return layout(m, x_min, x_max, kSourceSpacingExponent);
}

VectorXd evenly_spaced_source_opinions(std::size_t m, double x_min, double x_max) {
  return layout(m, x_min, x_max, 1.0);
}

std::size_t owned_source_index(Side side, std::size_t k, std::size_t n_sources) {
  const std::size_t half = n_sources / 2;
  require(k < half, "owned source slot out of range");
  return side == Side::L ? half - 1 - k : half + k;
}

}  // namespace misinfo
