#pragma once

#include <string>
#include <utility>
#include <vector>

#include "misinfo/core.hpp"

namespace misinfo {

/// Stationary policy of one player: probability of sharing factual news for
/// each owned source, ordered from the most centrist source outward.
struct StrategyProfile {
  std::string name;
  VectorXd factual_prob;

  void validate() const;
  double mean_factual_prob() const { return factual_prob.mean(); }
};

struct CredibilityCurveRecord {
  double bias = 0.0;
  double credibility = 1.0;
};

/// The nine built-in profiles for five sources per side.
///
/// P1 all-factual, P2 mild radical misinformation, P3 real-world-like,
/// P4 strong radical misinformation, P5 all-misinform, P6 uniform half,
/// P7 inverted (centrist misinformation), P8 strong inverted, P9 step.
std::vector<StrategyProfile> profile_library();

/// Library profile by name ("P3") or label ("real-world-like").
/// Throws std::invalid_argument listing the valid names.
StrategyProfile find_profile(const std::vector<StrategyProfile>& library, const std::string& name);

/// Builds one profile per player by piecewise-linear interpolation of the
/// credibility curve at the owned source opinions, clamped to [0, 1].
std::pair<StrategyProfile, StrategyProfile> load_credibility_curve(std::vector<CredibilityCurveRecord> rows,
                                                                   const VectorXd& source_opinions);

/// Per-source factual probability in global (ascending opinion) order.
VectorXd factual_prob_by_source(const StrategyProfile& profile_L, const StrategyProfile& profile_R);

/// Independent Bernoulli draws for every source, in global order.
VectorXi sample_actions(const StrategyProfile& profile_L, const StrategyProfile& profile_R, Rng& rng);

/// Same as above from precomputed per-source probabilities.
VectorXi sample_actions(const VectorXd& factual_prob, Rng& rng);

}  // namespace misinfo
