#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "envq/discrete_chain.hpp"
#include "envq/env_core.hpp"
#include "envq/errors.hpp"

using namespace envq;

TEST_CASE("scalar fields evaluate their named forms") {
  CHECK(ScalarField::constant(2.5)(0.3) == 2.5);
  CHECK(ScalarField::linear(2.0, 1.0)(0.25) == doctest::Approx(1.5));
  CHECK(ScalarField::linear(3.0, 0.0, 1)(Vec2{9.0, 0.5}) == doctest::Approx(1.5));
  const ScalarField t = ScalarField::table({0.0, 1.0, 3.0}, {1.0, 3.0, 2.0});
  CHECK(t(0.5) == doctest::Approx(2.0));
  CHECK(t(2.0) == doctest::Approx(2.5));
  CHECK(t(3.0) == doctest::Approx(2.0));
  CHECK_THROWS(t(3.5));
  CHECK(ScalarField::pole(0.25, 1.0)(0.5) == doctest::Approx(0.5));
}

TEST_CASE("rate bounds are enforced") {
  RateField rf;
  rf.lambda = ScalarField::linear(1.0, 0.0);
  rf.mu = ScalarField::constant(1.0);
  rf.lambda_bar = 0.9;
  rf.mu_bar = 1.0;
  const Rates r = eval_rates(rf, Vec2{0.5, 0.0});
  CHECK(r.rho == doctest::Approx(0.5));
  CHECK_THROWS_AS(eval_rates(rf, Vec2{0.95, 0.0}), BoundViolation);
  rf.mu = ScalarField::constant(0.5);
  CHECK_THROWS_AS(eval_rates(rf, Vec2{0.5, 0.0}), BoundViolation);
}

TEST_CASE("beta sequences") {
  CHECK(BetaSeq::constant(2.0)(7) == doctest::Approx(2.0));
  const BetaSeq g = BetaSeq::geometric(0.5, 3.0);
  CHECK(g(0) == doctest::Approx(3.0));
  CHECK(g(4) == doctest::Approx(3.0 / 16.0));
  // log form stays finite where the value underflows
  CHECK(g.log_at(5000) == doctest::Approx(std::log(3.0) + 5000 * std::log(0.5)));
  const BetaSeq t = BetaSeq::table({1.0, 2.0});
  CHECK(t(0) == 1.0);
  CHECK(t(9) == 2.0);
}

TEST_CASE("domains") {
  const DomainSpec i = DomainSpec::interval(0.0, 0.9);
  CHECK(i.contains(Vec2{0.45, 0.0}));
  CHECK_FALSE(i.contains(Vec2{0.95, 0.0}));
  CHECK(i.diameter() == doctest::Approx(0.9));
  CHECK_THROWS_AS(DomainSpec::interval(1.0, 1.0), SpecError);

  const DomainSpec c = DomainSpec::cone(0.5, 1.0, 1.8);
  CHECK(c.dim() == 2);
  CHECK(c.contains(Vec2{1.5, 0.7}));
  CHECK_FALSE(c.contains(Vec2{1.5, 0.8}));
  CHECK_FALSE(c.contains(Vec2{0.9, 0.1}));
  CHECK_FALSE(c.contains(Vec2{1.5, -0.01}));
  CHECK(c.diameter() == doctest::Approx(std::hypot(0.8, 0.9)));
  CHECK_THROWS_AS(DomainSpec::cone(1.5, 1.0, 2.0), SpecError);
}

TEST_CASE("threshold domains switch at their regime starts") {
  ThresholdDomains td{{{0, 0.0, 1.0}, {3, 0.0, 0.5}}};
  CHECK(td.at(2).second == 1.0);
  CHECK(td.at(3).second == 0.5);
  CHECK(td.at(100).second == 0.5);
  CHECK(td.contains(1, 0.8));
  CHECK_FALSE(td.contains(4, 0.8));
}

TEST_CASE("environment rows carry beta_n") {
  TwoStateParams p;
  p.beta = BetaSeq::geometric(0.5);
  const DiscreteEnvSpec s = example_env_two_state(p);
  CHECK(s.tau.rate(0, 0, 1, 2) == doctest::Approx(1.0));
  CHECK(s.tau.rate(3, 0, 1, 2) == doctest::Approx(0.125));
  CHECK(s.tau.rate(3, 0, 0, 2) == 0.0);
}

TEST_CASE("validation of a discrete spec") {
  TwoStateParams p;
  const DiscreteEnvSpec s = example_env_two_state(p);
  const ValidationReport r = validate_spec(s);
  CHECK(r.ok());
  REQUIRE(r.find("balance") != nullptr);
  CHECK(r.find("balance")->residual <= 1e-12);

  // wrong weights break balance but keep the structure usable
  DiscreteEnvSpec bad = s;
  bad.tau.base = {{0.0, 2.0}, {1.0, 0.0}};
  const ValidationReport rb = validate_spec(bad);
  CHECK_FALSE(rb.find("balance")->passed);
}

TEST_CASE("a diffusive spec with an outward reflection fails validation") {
  DiffusionEnvSpec s;
  s.domain = DomainSpec::interval(0.0, 0.9);
  s.rates.lambda = ScalarField::linear(1.0, 0.0);
  s.rates.mu = ScalarField::constant(1.0);
  s.rates.lambda_bar = 0.9;
  s.rates.mu_bar = 1.0;
  CHECK(validate_spec(s).ok());
  s.domain.faces[0].reflection = {-1.0, 0.0};
  const ValidationReport r = validate_spec(s);
  CHECK_FALSE(r.find("reflection_inward")->passed);
  CHECK_FALSE(structurally_valid(r));
}

TEST_CASE("traffic bound failure is a warning-level check") {
  DiffusionEnvSpec s;
  s.domain = DomainSpec::interval(0.0, 0.9);
  s.rates.lambda = ScalarField::linear(1.0, 0.0);
  s.rates.mu = ScalarField::constant(1.0);
  s.rates.lambda_bar = 1.2;
  s.rates.mu_bar = 1.0;
  const ValidationReport r = validate_spec(s);
  CHECK_FALSE(r.find("traffic_bound")->passed);
  CHECK(structurally_valid(r));
}
