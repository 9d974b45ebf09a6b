#include "misinfo/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace misinfo {

void StrategyProfile::validate() const {
  if (factual_prob.size() == 0) throw std::invalid_argument("profile '" + name + "' is empty");
  for (double p : factual_prob) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw std::invalid_argument("profile '" + name + "' has a probability outside [0, 1]");
  }
}

std::vector<StrategyProfile> profile_library() {
  auto make = [](std::string name, std::initializer_list<double> probs) {
    StrategyProfile p{std::move(name), VectorXd(static_cast<Eigen::Index>(probs.size()))};
    Eigen::Index k = 0;
    for (double v : probs) p.factual_prob(k++) = v;
    return p;
  };
  return {
      make("P1", {1.0, 1.0, 1.0, 1.0, 1.0}),
      make("P2", {1.0, 1.0, 1.0, 0.8, 0.6}),
      make("P3", {1.0, 0.95, 0.85, 0.6, 0.3}),
      make("P4", {1.0, 0.9, 0.6, 0.3, 0.1}),
      make("P5", {0.0, 0.0, 0.0, 0.0, 0.0}),
      make("P6", {0.5, 0.5, 0.5, 0.5, 0.5}),
      make("P7", {0.3, 0.6, 0.85, 0.95, 1.0}),
      make("P8", {0.1, 0.3, 0.6, 0.9, 1.0}),
      make("P9", {1.0, 1.0, 0.0, 0.0, 0.0}),
  };
}

namespace {

const std::vector<std::pair<std::string, std::string>>& profile_labels() {
  static const std::vector<std::pair<std::string, std::string>> labels = {
      {"P1", "all-factual"},        {"P2", "mild-radical-misinform"}, {"P3", "real-world-like"},
      {"P4", "strong-radical-misinform"}, {"P5", "all-misinform"},   {"P6", "uniform-half"},
      {"P7", "inverted"},           {"P8", "strong-inverted"},        {"P9", "step"},
  };
  return labels;
}

}  // namespace

StrategyProfile find_profile(const std::vector<StrategyProfile>& library, const std::string& name) {
  std::string key = name;
  for (const auto& [id, label] : profile_labels())
    if (label == name) key = id;
  for (const auto& p : library)
    if (p.name == key) return p;
  std::string valid;
  for (const auto& p : library) valid += (valid.empty() ? "" : ", ") + p.name;
  throw std::invalid_argument("unknown profile '" + name + "'; valid profiles: " + valid);
}

std::pair<StrategyProfile, StrategyProfile> load_credibility_curve(std::vector<CredibilityCurveRecord> rows,
                                                                   const VectorXd& source_opinions) {
  const auto m = static_cast<std::size_t>(source_opinions.size());
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("source layout must have an even number of sources");
  for (const auto& r : rows) {
    if (!std::isfinite(r.bias) || !std::isfinite(r.credibility))
      throw std::invalid_argument("credibility curve contains a non-finite value");
  }
  const auto negatives = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.bias < 0.0; });
  const auto positives = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.bias > 0.0; });
  if (negatives == 0 || positives == 0)
    throw std::invalid_argument("credibility curve needs records on both sides of the bias axis");

  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.bias < b.bias; });

  auto interpolate = [&rows](double y) {
    if (y <= rows.front().bias) return rows.front().credibility;
    if (y >= rows.back().bias) return rows.back().credibility;
    auto hi = std::lower_bound(rows.begin(), rows.end(), y, [](const auto& r, double v) { return r.bias < v; });
    auto lo = hi - 1;
    if (hi->bias == lo->bias) return hi->credibility;
    const double w = (y - lo->bias) / (hi->bias - lo->bias);
    return (1.0 - w) * lo->credibility + w * hi->credibility;
  };

  const std::size_t half = m / 2;
  StrategyProfile left{"curve-L", VectorXd(static_cast<Eigen::Index>(half))};
  StrategyProfile right{"curve-R", VectorXd(static_cast<Eigen::Index>(half))};
  for (std::size_t k = 0; k < half; ++k) {
    const auto il = static_cast<Eigen::Index>(owned_source_index(Side::L, k, m));
    const auto ir = static_cast<Eigen::Index>(owned_source_index(Side::R, k, m));
    left.factual_prob(static_cast<Eigen::Index>(k)) = std::clamp(interpolate(source_opinions(il)), 0.0, 1.0);
    right.factual_prob(static_cast<Eigen::Index>(k)) = std::clamp(interpolate(source_opinions(ir)), 0.0, 1.0);
  }
  return {left, right};
}

VectorXd factual_prob_by_source(const StrategyProfile& profile_L, const StrategyProfile& profile_R) {
  if (profile_L.factual_prob.size() != profile_R.factual_prob.size())
    throw std::invalid_argument("profiles of the two players must have the same length");
  const auto half = static_cast<std::size_t>(profile_L.factual_prob.size());
  const std::size_t m = 2 * half;
  VectorXd prob(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < half; ++k) {
    prob(static_cast<Eigen::Index>(owned_source_index(Side::L, k, m))) = profile_L.factual_prob(static_cast<Eigen::Index>(k));
    prob(static_cast<Eigen::Index>(owned_source_index(Side::R, k, m))) = profile_R.factual_prob(static_cast<Eigen::Index>(k));
  }
  return prob;
}

VectorXi sample_actions(const VectorXd& factual_prob, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  VectorXi a(factual_prob.size());
  for (Eigen::Index m = 0; m < factual_prob.size(); ++m) a(m) = uni(rng) < factual_prob(m) ? 1 : 0;
  return a;
}

VectorXi sample_actions(const StrategyProfile& profile_L, const StrategyProfile& profile_R, Rng& rng) {
  return sample_actions(factual_prob_by_source(profile_L, profile_R), rng);
}

}  // namespace misinfo
