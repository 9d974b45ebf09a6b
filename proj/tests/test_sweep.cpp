#include <doctest.h>

#include <cmath>

#include "misinfo/dynamics.hpp"
#include "misinfo/metrics.hpp"
#include "misinfo/sweep.hpp"

using namespace misinfo;

namespace {

SweepSpec tiny_spec() {
  SweepSpec spec;
  spec.base.n_individuals = 30;
  spec.base.horizon_T = 20;
  const auto lib = profile_library();
  spec.profiles = {lib[0], lib[3], lib[7]};
  spec.n_rollouts = 4;
  spec.replications = 3;
  spec.axes = {{"eta", {0.0, 1.0}}, {"tau", {1.0, 10.0}}};
  return spec;
}

EquilibriumResult pure(std::size_t size, std::size_t index) {
  EquilibriumResult e;
  e.mu = point_mass(size, index);
  e.nu = point_mass(size, index);
  return e;
}

void check_same(const SweepCellResult& a, const SweepCellResult& b) {
  CHECK(a.values == b.values);
  CHECK(a.ok == b.ok);
  CHECK(a.equilibrium.mu == b.equilibrium.mu);
  CHECK(a.equilibrium.nu == b.equilibrium.nu);
  CHECK(a.equilibrium.value == b.equilibrium.value);
  CHECK(a.outcome.bimodality_mean == b.outcome.bimodality_mean);
  CHECK(a.outcome.exposure_mean == b.outcome.exposure_mean);
  CHECK(a.phase.label == b.phase.label);
}

}  // namespace

TEST_CASE("sweep spec") {
  SweepSpec spec = tiny_spec();
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.cell_count() == 4);
  CHECK(spec.cell_values(0) == std::vector<double>{0.0, 1.0});
  CHECK(spec.cell_values(1) == std::vector<double>{0.0, 10.0});
  CHECK(spec.cell_values(2) == std::vector<double>{1.0, 1.0});
  CHECK(spec.cell_values(3) == std::vector<double>{1.0, 10.0});

  auto invalid = [](auto mutate) {
    SweepSpec s = tiny_spec();
    mutate(s);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  };
  invalid([](SweepSpec& s) { s.axes.clear(); });
  invalid([](SweepSpec& s) { s.axes[0].values.clear(); });
  invalid([](SweepSpec& s) { s.axes[0].name = "kappa"; });
  invalid([](SweepSpec& s) { s.axes[1].name = "eta"; });
  invalid([](SweepSpec& s) { s.axes.push_back({"xi", {1.0}}); });
  invalid([](SweepSpec& s) { s.axes[0].values[0] = INFINITY; });
  invalid([](SweepSpec& s) { s.n_rollouts = 1; });
  invalid([](SweepSpec& s) { s.replications = 0; });
}

TEST_CASE("axis values reach the configuration") {
  SimulationConfig c;
  SolverParams s;
  apply_axis_value("eta", 0.5, c, s);
  apply_axis_value("xi", 3.0, c, s);
  apply_axis_value("tau", 30.0, c, s);
  apply_axis_value("beta1", 4.0, c, s);
  apply_axis_value("beta2", 5.0, c, s);
  CHECK(c.params.eta == 0.5);
  CHECK(c.params.xi == 3.0);
  CHECK(s.tau_L == 30.0);
  CHECK(s.tau_R == 30.0);
  CHECK(c.beta1 == 4.0);
  CHECK(c.beta2 == 5.0);
  CHECK_THROWS_AS(apply_axis_value("gamma", 0.5, c, s), std::invalid_argument);
}

TEST_CASE("phase labels") {
  const auto lib = profile_library();
  const PhaseAssessment radical = phase_label(pure(9, 3), lib);
  CHECK(radical.label == Phase::One);
  CHECK(radical.radical_factual == doctest::Approx(0.2));
  CHECK(radical.centrist_factual == doctest::Approx(0.95));
  CHECK_FALSE(radical.low_confidence);

  CHECK(phase_label(pure(9, 7), lib).label == Phase::Two);
  CHECK(phase_label(pure(9, 6), lib).label == Phase::Two);
  CHECK(phase_label(pure(9, 8), lib).label == Phase::One);
  // No ordering at all counts as phase two.
  CHECK(phase_label(pure(9, 0), lib).label == Phase::Two);

  EquilibriumResult uniform;
  uniform.mu = VectorXd::Constant(9, 1.0 / 9);
  uniform.nu = uniform.mu;
  CHECK(phase_label(uniform, lib).low_confidence);

  CHECK(std::string(phase_name(Phase::One)) == "phase-1");
  CHECK(std::string(phase_name(Phase::Two)) == "phase-2");
  CHECK_THROWS_AS(phase_label(pure(3, 0), lib), std::invalid_argument);
}

TEST_CASE("sweep determinism and cell isolation") {
  const SweepSpec spec = tiny_spec();
  const auto first = run_sweep(spec);
  REQUIRE(first.size() == 4);
  for (const auto& cell : first) {
    CHECK(cell.ok);
    CHECK(cell.outcome.bimodality_mean >= 0.0);
    CHECK(cell.outcome.exposure_mean >= 0.0);
    CHECK(cell.outcome.exposure_mean <= 1.0);
  }

  SUBCASE("rerun") {
    const auto second = run_sweep(spec);
    for (std::size_t k = 0; k < 4; ++k) check_same(first[k], second[k]);
  }
  SUBCASE("reverse execution order") {
    for (std::size_t k = 4; k-- > 0;) check_same(run_cell(spec, k), first[k]);
  }
  SUBCASE("worker count") {
    SweepSpec threaded = spec;
    threaded.workers = 3;
    const auto third = run_sweep(threaded);
    for (std::size_t k = 0; k < 4; ++k) check_same(first[k], third[k]);
  }
  SUBCASE("rationality sharpens the equilibrium") {
    CHECK(entropy(first[3].equilibrium.mu) <= entropy(first[2].equilibrium.mu));
  }
}

TEST_CASE("failed cells do not abort the grid") {
  SweepSpec spec = tiny_spec();
  spec.solver.max_iters = 1;
  spec.solver.tolerance = 1e-15;
  spec.axes = {{"eta", {0.0, 1.0}}};
  const auto cells = run_sweep(spec);
  REQUIRE(cells.size() == 2);
  for (const auto& cell : cells) {
    CHECK_FALSE(cell.ok);
    CHECK(cell.error.find("residual") != std::string::npos);
  }
}

TEST_CASE("exposure with zero gains matches independent action draws") {
  SimulationConfig c;
  c.n_individuals = 60;
  c.horizon_T = 40;
  c.params.eta = 0.0;
  c.params.xi = 0.0;
  const auto lib = profile_library();
  const VectorXd prob = factual_prob_by_source(lib[2], lib[5]);
  const int reps = 30;
  std::vector<double> model, resampled;
  for (int r = 0; r < reps; ++r) {
    const Trajectory t = simulate(c, lib[2], lib[5], derive_seed(1, "model", {static_cast<std::uint64_t>(r)}));
    model.push_back(misinformation_exposure(t, c.params.kappa_hat).mean());
    Trajectory swapped = t;
    Rng rng = make_stream(2, "independent", {static_cast<std::uint64_t>(r)});
    for (Eigen::Index step = 0; step < swapped.action_history.rows(); ++step)
      swapped.action_history.row(step) = sample_actions(prob, rng).transpose();
    resampled.push_back(misinformation_exposure(swapped, c.params.kappa_hat).mean());
  }
  auto mean_se = [](const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    double m = 0.0, ss = 0.0;
    for (double x : v) m += x / n;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, std::sqrt(ss / (n - 1) / n)};
  };
  const auto [m1, s1] = mean_se(model);
  const auto [m2, s2] = mean_se(resampled);
  CHECK(std::abs(m1 - m2) <= 3.0 * std::hypot(s1, s2));
}
