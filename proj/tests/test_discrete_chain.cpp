#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "envq/discrete_chain.hpp"
#include "envq/errors.hpp"
#include "envq/stationary.hpp"
#include "oracles.hpp"

using namespace envq;

namespace {

double max_entry_gap(const DiscretePi& pi, const std::vector<double>& ref) {
  const double kept = std::accumulate(pi.weights.begin(), pi.weights.end(), 0.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(pi.weights[k] / kept - ref[k]));
  return worst;
}

Ex21Params ex21(std::vector<int> m_n, std::vector<int> uniform = {}, bool all_uniform = false) {
  Ex21Params p;
  p.points = {0.1, 0.3, 0.5, 0.7, 0.9};
  p.m_n = std::move(m_n);
  p.uniform_levels = std::move(uniform);
  p.all_uniform = all_uniform;
  return p;
}

}  // namespace

TEST_CASE("two-state product form matches a dense solve") {
  const DiscreteEnvSpec s = example_env_two_state(TwoStateParams{});
  const DiscretePi pi = invariant_measure_discrete(s, 40);
  CHECK(pi.xi == doctest::Approx(3.25).epsilon(1e-14));
  const GeneratorMatrix g = build_generator(s, 40);
  CHECK(max_entry_gap(pi, oracle::gth(oracle::dense(g))) <= 1e-8);
  CHECK(check_balance(pi, g) <= 1e-10);
  CHECK(pi.tail_mass <= pi.tail_mass_bound * (1 + 1e-12));

  TwoStateParams tp;
  tp.beta = BetaSeq::geometric(0.2);
  tp.tau12 = 3.0;
  const DiscreteEnvSpec t = example_env_two_state(tp);
  const GeneratorMatrix gt = build_generator(t, 40);
  CHECK(max_entry_gap(invariant_measure_discrete(t, 40), oracle::gth(oracle::dense(gt))) <= 1e-8);
}

TEST_CASE("example 2.1 level-dependent subsets") {
  for (const auto& p : {ex21({5, 4, 3}), ex21({5, 3, 4, 2}, {1, 3}), ex21({5, 2}, {}, true)}) {
    const DiscreteEnvSpec s = example_env_ex21(p);
    CHECK(validate_spec(s).ok());
    const DiscretePi pi = invariant_measure_discrete(s, 40);
    double xi = 0.0;
    for (double z : p.points) xi += 1.0 / (1.0 - z);
    CHECK(pi.xi == doctest::Approx(xi).epsilon(1e-13));
    const GeneratorMatrix g = build_generator(s, 40);
    CHECK(check_balance(pi, g) <= 1e-10);
    CHECK(max_entry_gap(pi, oracle::gth(oracle::dense(g))) <= 1e-8);
  }
}

TEST_CASE("ex2.1 rejects subsets that miss points") {
  CHECK_THROWS_AS(example_env_ex21(ex21({4, 3})), SpecError);
  CHECK_THROWS_AS(example_env_ex21(ex21({6})), SpecError);
}

TEST_CASE("ex2.2 shift window and the infinite lattice") {
  Ex22Params p;
  p.half_width = 20;
  const DiscreteEnvSpec s = example_env_ex22(p);
  CHECK(s.size() == 41);
  const ValidationReport r = validate_spec(s);
  CHECK(r.ok());
  const DiscretePi pi = invariant_measure_discrete(s, 25);
  double xi = 0.0;
  for (int i = -20; i <= 20; ++i) xi += (1.0 + std::abs(i)) / 0.5;
  CHECK(pi.xi == doctest::Approx(xi).epsilon(1e-12));
  const Ex22XiReport rep = ex22_xi_variants(p);
  CHECK(rep.window_xi == doctest::Approx(xi));
  CHECK_FALSE(rep.lattice_finite);
}

TEST_CASE("uniformization matches the matrix exponential") {
  TwoStateParams tp;
  tp.tau12 = 2.0;
  const DiscreteEnvSpec s = example_env_two_state(tp);
  const GeneratorMatrix g = build_generator(s, 15);
  const Eigen::MatrixXd Q = oracle::dense(g);
  for (double t : {0.1, 1.0, 5.0}) {
    const auto u = transient_law(g, g.index(3, 1), t);
    const auto e = oracle::expm_row(Q, g.index(3, 1), t);
    CHECK(oracle::half_l1(u, e) <= 1e-9);
  }
}

TEST_CASE("rho^-n growth overflow is reported") {
  TwoStateParams tp;
  tp.rho1 = 1e-300;
  const DiscreteEnvSpec s = example_env_two_state(tp);
  CHECK_THROWS_AS(build_generator(s, 40), NumericalError);
}

TEST_CASE("Gillespie occupation approaches the invariant law") {
  const DiscreteEnvSpec s = example_env_single(1.0, 4.0);
  const GeneratorMatrix g = build_generator(s, 30);
  const CtmcPath path = simulate_ctmc(g, 0, 2e4, 99);
  const double total = std::accumulate(path.occupation.begin(), path.occupation.end(), 0.0);
  CHECK(total == doctest::Approx(2e4));
  // M/M/1 with rho = 1/4: P(n) = (3/4)(1/4)^n
  for (int n = 0; n < 4; ++n) {
    const double expect = 0.75 * std::pow(0.25, n);
    CHECK(path.occupation[n] / total == doctest::Approx(expect).epsilon(0.05));
  }
}

TEST_CASE("simulation is reproducible from the seed") {
  const DiscreteEnvSpec s = example_env_two_state(TwoStateParams{});
  const GeneratorMatrix g = build_generator(s, 20);
  const CtmcPath a = simulate_ctmc(g, 0, 100.0, 5);
  const CtmcPath b = simulate_ctmc(g, 0, 100.0, 5);
  REQUIRE(a.events.size() == b.events.size());
  CHECK(a.jumps == b.jumps);
  CHECK(a.events.back().t == b.events.back().t);
}
