#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "envq/discrete_chain.hpp"
#include "envq/errors.hpp"
#include "envq/rates_coupling.hpp"
#include "envq/reflected_sde.hpp"
#include "oracles.hpp"

using namespace envq;

namespace {

const std::vector<std::vector<double>> kSym{{0.0, 1.0}, {1.0, 0.0}};

}  // namespace

TEST_CASE("decay exponent") {
  CHECK(m_func(1.0, 1.0, 4.0) == 0.0);
  CHECK(c_star(1.0, 4.0) == doctest::Approx(2.0));
  CHECK(m_func(c_star(1.0, 4.0), 1.0, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m_star(2.0, 5.0) == doctest::Approx(std::pow(std::sqrt(5.0) - std::sqrt(2.0), 2)).epsilon(1e-12));
  // concave on [1, c*]
  const double cs = c_star(1.0, 4.0);
  for (int k = 1; k < 99; ++k) {
    const double h = (cs - 1.0) / 100.0, c = 1.0 + k * h;
    CHECK(m_func(c + h, 1.0, 4.0) - 2 * m_func(c, 1.0, 4.0) + m_func(c - h, 1.0, 4.0) <= 1e-12);
  }
  CHECK_THROWS_AS(m_star(4.0, 1.0), SpecError);
}

TEST_CASE("theta at a = 0 is one") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> al(1.0, 5.0), bg(0.05, 5.0);
  for (int k = 0; k < 1000; ++k) CHECK(theta_func(al(g), bg(g), bg(g), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("theta agrees with its integral form") {
  for (auto [al, b, g, a] : std::vector<std::array<double, 4>>{
           {1.5, 1.0, 1.0, 0.5}, {2.0, 1.0, 1.0, 1.7}, {1.0001, 0.5, 2.0, 0.3}, {3.0, 2.0, 0.5, 2.3}}) {
    CHECK(theta_func(al, b, g, a) == doctest::Approx(oracle::theta_integral(al, b, g, a)).epsilon(1e-9));
  }
}

TEST_CASE("theta is continuous through its removable points") {
  for (auto [al, b, g] : std::vector<std::array<double, 3>>{{1.5, 1.0, 1.0}, {2.0, 0.7, 1.3}, {1.0001, 1.0, 2.0}}) {
    for (double at : {b, g}) {
      if (at >= b + g) continue;
      const double mid = theta_func(al, b, g, at);
      CHECK(mid == doctest::Approx(oracle::theta_integral(al, b, g, at)).epsilon(1e-9));
      for (double h : {1e-9, 1e-7, 1e-6, 1e-4, 2e-3}) {
        CHECK(std::abs(theta_func(al, b, g, at + h) - mid) <= 1e-6 + 10 * h * mid);
        CHECK(std::abs(theta_func(al, b, g, at - h) - mid) <= 1e-6 + 10 * h * mid);
      }
    }
  }
  CHECK_THROWS_AS(theta_func(1.5, 1.0, 1.0, 2.0), SpecError);
}

TEST_CASE("success probability and feasibility") {
  CHECK(success_prob(1.0, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(success_prob(1.5, 1.0, 1.0) == doctest::Approx(0.5 / 1.5));
  CHECK(feasible(1.0 + 1e-6, 0.5, 2.0, 1.0, 1.0, 4.0).feasible);
  // small epsilon leaves almost no room for the retry term
  CHECK_FALSE(feasible(1.999, 1e-4, 2.0, 1.0, 1.0, 4.0).feasible);
  CHECK(feasible(1.999, 0.999, 2.0, 1.0, 1.0, 4.0).feasible);
  CHECK_THROWS_AS(feasible(1.2, 1.5, 2.0, 1.0, 1.0, 4.0), SpecError);
}

TEST_CASE("rate optimizer") {
  const RateCertificate r = optimize_rate(2.0, 1.0, 1.0, 4.0);
  CHECK(r.kappa > 0.0);
  CHECK(r.kappa < 1.0);
  CHECK(r.margin > 0.0);
  CHECK(r.C_star >= 1.0);
  CHECK(r.kappa == doctest::Approx((1.0 - r.epsilon) * m_func(r.c, 1.0, 4.0)));
  // no grid cell beats the refined optimum
  double grid_best = 0.0;
  for (int j = 1; j < 100; ++j)
    for (int k = 1; k < 100; ++k) {
      const double e = j / 100.0, c = 1.0 + (r.c_star - 1.0) * k / 100.0;
      if (feasible(c, e, 2.0, 1.0, 1.0, 4.0).feasible)
        grid_best = std::max(grid_best, (1.0 - e) * m_func(c, 1.0, 4.0));
    }
  CHECK(r.kappa >= grid_best * (1.0 - 1e-9));

  double prev = 0.0;
  for (double g : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double k = optimize_rate(2.0, g, 1.0, 4.0, {60, 60}).kappa;
    CHECK(k >= prev * (1.0 - 1e-6));
    prev = k;
  }
  CHECK_THROWS_AS(optimize_rate(2.0, 1.0, 4.0, 4.0), SpecError);
}

TEST_CASE("certificate bound shapes") {
  const RateCertificate r = make_certificate(1.2, 0.5, 1.0001, 2.0, 1.0, 4.0);
  CHECK(r.bound_to_pi(3, 0.0) == doctest::Approx(r.C * (1.0 + std::pow(1.2, 3))));
  CHECK(r.bound_pairwise(1, 2, 1.0) == doctest::Approx(r.C_star * (1.2 + 1.44) * std::exp(-r.kappa)));
  CHECK(r.C == doctest::Approx(r.C_star / 0.5));
  CHECK_THROWS_AS(make_certificate(1.999, 1e-4, 2.0, 1.0, 1.0, 4.0), NumericalError);
}

TEST_CASE("classical bound values") {
  CHECK(robert_bound(0, 1.0, 4.0, 0.0) == doctest::Approx(2.0));
  CHECK(robert_bound(2, 1.0, 4.0, 1.0) == doctest::Approx(5.0 * std::exp(-1.0)));
}

TEST_CASE("lazified kernels and their overlap") {
  const JumpCouplingSpec a = make_jump_coupling(kSym, 2.0);
  CHECK(a.q == doctest::Approx(0.0));
  CHECK(a.gamma() == doctest::Approx(2.0));
  const JumpCouplingSpec b = make_jump_coupling(kSym, 4.0 / 3.0);
  CHECK(b.q == doctest::Approx(0.5));
  CHECK(b.nu_bar[0][0] == doctest::Approx(0.25));
  CHECK_THROWS_AS(make_jump_coupling(kSym, 0.5), SpecError);
  const JumpCouplingSpec best = best_jump_coupling(kSym);
  CHECK(best.gamma() == doctest::Approx(2.0));
  // three states, asymmetric: best Lambda is no worse than any sampled Lambda
  const std::vector<std::vector<double>> r3{{0, 1, 2}, {0.5, 0, 0.5}, {3, 1, 0}};
  const JumpCouplingSpec b3 = best_jump_coupling(r3);
  for (double L = 4.0; L < 20.0; L += 0.25) CHECK(b3.gamma() >= make_jump_coupling(r3, L).gamma() - 1e-12);
}

TEST_CASE("per-ring success frequency equals one minus TV") {
  const JumpCouplingSpec s = make_jump_coupling(kSym, 4.0 / 3.0);
  Rng rng(12);
  int first = 0;
  const int N = 40000;
  for (int k = 0; k < N; ++k) {
    const JumpCouplingRun r = run_maximal_coupling(s, 0, 1, std::numeric_limits<double>::infinity(), rng);
    if (r.rings == 1) ++first;
  }
  CHECK(std::abs(static_cast<double>(first) / N - 0.5) <= dkw_epsilon(N));
}

TEST_CASE("identical starts couple immediately") {
  const DiscreteEnvSpec s = example_env_two_state(TwoStateParams{});
  const CouplingTrace t = couple_joint(s, 2, 1, 2, 1, 5);
  CHECK(t.coupled);
  CHECK(t.tau == 0.0);
  CHECK(t.J == 0);
}

TEST_CASE("two-state harness produces consistent traces") {
  TwoStateParams p;
  p.beta = BetaSeq::geometric(0.2);
  const DiscreteEnvSpec s = example_env_two_state(p);
  for (std::uint64_t k = 0; k < 200; ++k) {
    const CouplingTrace t = couple_joint(s, 3, 0, 0, 1, k);
    REQUIRE(t.coupled);
    CHECK(t.retries.size() == static_cast<std::size_t>(t.J + 1));
    double total = 0.0;
    for (const auto& r : t.retries) total += r.tau;
    for (std::size_t i = 0; i + 1 < t.retries.size(); ++i) total += t.retries[i].eta;
    total += t.retries.back().zeta;
    CHECK(t.tau == doctest::Approx(total));
  }
}

TEST_CASE("mgf check rejects an eta that breaks its tail") {
  CHECK_THROWS_AS(mgf_min_check(1.0, 1.0, 1.0, 0.5, 1000, 1, [](Rng&) { return -1.0; }), SpecError);
  // Exp(0.5) has a heavier tail than e^{-t}
  CHECK_THROWS_AS(mgf_min_check(1.0, 1.0, 1.0, 0.5, 20000, 1, [](Rng& r) { return r.exponential(0.5); }),
                  SpecError);
  const MgfCheckReport ok = mgf_min_check(1.5, 1.0, 1.0, 0.5, 20000, 2, [](Rng& r) { return r.exponential(1.0); });
  CHECK(ok.mgf_ok);
  CHECK(ok.prob_ok);
}

TEST_CASE("TV decay on a small joint chain") {
  TwoStateParams p;
  p.beta = BetaSeq::geometric(0.125);
  const DiscreteEnvSpec s = example_env_two_state(p);
  const JumpCouplingSpec jc = best_jump_coupling(level0_rates(s));
  const RateCertificate cert = optimize_rate(1.0001, jc.gamma(), s.rates.lambda_bar, s.rates.mu_bar, {80, 60});
  const TvDecayReport r = tv_decay_check(s, cert, 3, 0, {0.5, 1, 2, 4, 8}, 40);
  CHECK(r.all_hold);
  CHECK(r.fitted_rate >= cert.kappa);
  CHECK(r.points.front().tv <= 1.0);
}
