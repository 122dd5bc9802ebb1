#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "envq/discrete_chain.hpp"
#include "envq/errors.hpp"
#include "envq/stationary.hpp"

using namespace envq;

namespace {

DiffusionEnvSpec interval_env(double lo, double hi) {
  DiffusionEnvSpec s;
  s.domain = DomainSpec::interval(lo, hi);
  s.rates.lambda = ScalarField::linear(1.0, 0.0);
  s.rates.mu = ScalarField::constant(1.0);
  s.rates.lambda_bar = hi;
  s.rates.mu_bar = 1.0;
  return s;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("discrete Xi and grid") {
  const DiscreteEnvSpec s = example_env_two_state(TwoStateParams{});
  const StationaryLaw law = joint_invariant(s);
  CHECK(law.xi() == doctest::Approx(3.25).epsilon(1e-14));
  CHECK(xi_constant(s) == doctest::Approx(3.25).epsilon(1e-14));
  CHECK(law.rho_bar() == doctest::Approx(0.5));
  CHECK(law.layer_mass_discrete(2, 1) == doctest::Approx(0.25 / 3.25));
  const OccupationMatrix g = law_grid(law, 10, 2, 0.0, 1.0);
  CHECK(sum(g.frac) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(law_grid(law, 10, 3, 0.0, 1.0), SpecError);
}

TEST_CASE("uniform environment with arrival rate z") {
  // nu uniform on [0, 0.9]; Xi = ln(10) / 0.9
  const DiffusionEnvSpec s = interval_env(0.0, 0.9);
  const StationaryLaw law = joint_invariant(s);
  const double xi = std::log(10.0) / 0.9;
  CHECK(law.xi() == doctest::Approx(xi).epsilon(1e-9));
  CHECK(law.xi_series() == doctest::Approx(xi).epsilon(1e-8));
  for (int n : {0, 1, 5, 12}) {
    const double expect = std::pow(0.9, n + 1) / (n + 1) / 0.9 / xi;
    CHECK(law.queue_marginal(n) == doctest::Approx(expect).epsilon(1e-9));
  }
  CHECK(law.layer_density(3, 0.5) == doctest::Approx(0.125 / 0.9 / xi).epsilon(1e-10));
  CHECK(law.env_marginal(0.5) == doctest::Approx(2.0 / 0.9 / xi).epsilon(1e-10));
  const OccupationMatrix g = law_grid(law, 12, 30, 0.0, 0.9);
  CHECK(sum(g.frac) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("pole-drift environment Xi") {
  DiffusionEnvSpec s = interval_env(0.0, 0.95);
  s.drift[0] = ScalarField::pole(0.25, 1.0);
  const StationaryLaw law = joint_invariant(s);
  const double norm = 4.0 * (1.0 - std::sqrt(0.05));
  const double xi = 4.0 * (1.0 / std::sqrt(0.05) - 1.0) / norm;
  CHECK(law.xi() == doctest::Approx(xi).epsilon(1e-8));

  DiffusionEnvSpec full = interval_env(0.0, 1.0);
  full.drift[0] = ScalarField::pole(0.25, 1.0);
  CHECK_THROWS_AS(xi_constant(full), NumericalError);
}

TEST_CASE("threshold law on shrinking layers") {
  // arrival rate z, nu uniform on [0, 1]; layers n >= 3 live on [0, 0.5]
  DiffusionEnvSpec s = interval_env(0.0, 1.0);
  s.threshold = ThresholdDomains{{{0, 0.0, 1.0}, {3, 0.0, 0.5}}};
  const StationaryLaw law = joint_invariant(s);
  const double xi = (1.0 + 0.5 + 1.0 / 3.0) + std::log(2.0) - (0.5 + 0.125 + 1.0 / 24.0);
  CHECK(law.xi() == doctest::Approx(xi).epsilon(1e-8));
  CHECK(law.support(5).second == 0.5);
  CHECK(law.layer_density(4, 0.7) == 0.0);
  CHECK(law.queue_marginal(4) == doctest::Approx(std::pow(0.5, 5) / 5.0 / xi).epsilon(1e-9));

  const LayerSeriesCheck ls = layer_series_check(stationary_density_1d(s), s.rates, s.threshold);
  CHECK(ls.finite);
  CHECK(ls.value == doctest::Approx(2.0 * xi).epsilon(1e-7));
  const LayerSeriesCheck none = layer_series_check(stationary_density_1d(s), s.rates, std::nullopt);
  CHECK_FALSE(none.finite);
}

TEST_CASE("service-rate threshold example") {
  // mu = z on [1, 2], lambda = 1: rho = 1/z, layers n >= 3 on [1.5, 2]
  DiffusionEnvSpec s;
  s.domain = DomainSpec::interval(1.0, 2.0);
  s.rates.lambda = ScalarField::constant(1.0);
  s.rates.mu = ScalarField::linear(1.0, 0.0);
  s.rates.lambda_bar = 1.0;
  s.rates.mu_bar = 1.0;
  s.threshold = ThresholdDomains{{{0, 1.0, 2.0}, {3, 1.5, 2.0}}};
  const StationaryLaw law = joint_invariant(s);
  auto layer = [](int n, double a, double b) {
    if (n == 1) return std::log(b / a);
    return (std::pow(b, 1 - n) - std::pow(a, 1 - n)) / (1 - n);
  };
  double xi = 0.0;
  for (int n = 0; n < 3; ++n) xi += layer(n, 1.0, 2.0);
  for (int n = 3; n < 4000; ++n) xi += layer(n, 1.5, 2.0);
  CHECK(law.xi() == doctest::Approx(xi).epsilon(1e-8));
  CHECK(law.layer_mass(4, 1.5, 2.0) == doctest::Approx(layer(4, 1.5, 2.0) / xi).epsilon(1e-9));
  CHECK(law.layer_mass(4, 1.0, 1.5) == 0.0);
}

TEST_CASE("comparison of a law with itself") {
  const DiffusionEnvSpec s = interval_env(0.0, 0.9);
  const StationaryLaw law = joint_invariant(s);
  const OccupationMatrix g = law_grid(law, 12, 30, 0.0, 0.9);
  const ComparisonReport r = compare_empirical(law, g);
  CHECK(r.global_tv <= 1e-12);
  CHECK(r.max_layer_tv(12) <= 1e-12);
  REQUIRE_FALSE(r.slopes.empty());
  for (const auto& f : r.slopes)
    if (f.z_center > 0.2) CHECK(f.fitted_slope == doctest::Approx(f.expected_slope).epsilon(0.02));
  CHECK_THROWS_AS(tv_distance({0.5, 0.5}, {1.0}), SpecError);
  CHECK(tv_distance({1.0, 0.0}, {0.0, 1.0}) == 1.0);
}

TEST_CASE("boundary local time is split by queue length") {
  const DiffusionEnvSpec s = interval_env(0.0, 0.9);
  JointSimParams p;
  p.horizon = 500.0;
  p.n_cap = 4;
  const JointPath path = simulate_joint(s, {0, {0.1, 0.0}}, p, 4);
  const BoundaryEstimate b = boundary_measure_estimate(path);
  CHECK(b.contact);
  // beta = 1 and rho = z: at level 0 the two rates agree
  CHECK(b.raw(0, 0) == doctest::Approx(b.intrinsic(0, 0)));
  CHECK(b.raw(0, 0) > 0.0);
}
