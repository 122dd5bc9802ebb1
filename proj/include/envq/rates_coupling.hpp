#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "envq/discrete_chain.hpp"
#include "envq/env_core.hpp"
#include "envq/rng.hpp"

namespace envq {

// Decay exponent of the dominating queue's hitting-time MGF:
// -lambda_bar c - mu_bar / c + lambda_bar + mu_bar, for c >= 1.
double m_func(double c, double lambda_bar, double mu_bar);
// Maximizer sqrt(mu_bar / lambda_bar) and maximum (sqrt(mu_bar) - sqrt(lambda_bar))^2.
double c_star(double lambda_bar, double mu_bar);
double m_star(double lambda_bar, double mu_bar);

// MGF bound for the minimum of Exp(beta) and an eta with tail alpha e^{-gamma t}.
// Valid for 0 <= a < beta + gamma; the removable point a = beta is evaluated
// through a cancellation-free rewrite. Throws SpecError outside the range.
double theta_func(double alpha, double beta, double gamma, double a);

// gamma / (lambda_bar + gamma) * alpha^{-lambda_bar / gamma}.
double success_prob(double alpha, double gamma, double lambda_bar);

struct Feasibility {
  bool feasible = false;
  // -(eps / (1 - eps)) ln(1 - p) - ln(c theta); positive iff feasible.
  double margin = 0.0;
  double kappa_c = 0.0;  // c * theta(alpha, lambda_bar, gamma, m(c))
};

Feasibility feasible(double c, double epsilon, double alpha, double gamma, double lambda_bar, double mu_bar);

struct RateCertificate {
  double alpha = 0.0, gamma = 0.0, lambda_bar = 0.0, mu_bar = 0.0;
  double c = 1.0;
  double epsilon = 0.5;
  double m_c = 0.0;
  double kappa = 0.0;    // (1 - eps) m(c)
  double kappa_c = 1.0;  // c theta(alpha, lambda_bar, gamma, m(c))
  double p = 0.0;
  double q = 1.0;
  double margin = 0.0;
  double C_star = 0.0;  // pairwise constant: TV <= C_star (c^{n1} + c^{n2}) e^{-kappa t}
  double C = 0.0;       // C_star / (1 - sqrt(rho_bar)): TV to pi <= C (1 + c^{n0}) e^{-kappa t}
  double c_star = 0.0;
  double m_star = 0.0;
  int grid_feasible_cells = 0;
  int refinement_steps = 0;

  double bound_to_pi(int n0, double t) const;
  double bound_pairwise(int n1, int n2, double t) const;
};

struct OptimizeOptions {
  int grid = 200;
  int refine_iters = 60;
};

// Grid over (c, eps) then bisection on the feasible boundary in c and
// golden-section search in eps. Throws SpecError if mu_bar <= lambda_bar.
RateCertificate optimize_rate(double alpha, double gamma, double lambda_bar, double mu_bar,
                              const OptimizeOptions& opt = {});
// Certificate at a given (c, eps); throws NumericalError if infeasible.
RateCertificate make_certificate(double c, double epsilon, double alpha, double gamma, double lambda_bar,
                                 double mu_bar);

// Classical M/M/1 bound (1 + rho_bar^{-n/2}) exp(-(sqrt(lambda_bar) - sqrt(mu_bar))^2 t).
double robert_bound(int n, double lambda_bar, double mu_bar, double t);

// Pure-jump chain uniformized at rate Lambda: lazified kernels
// nu_bar(x, .) = nu(x, .) / Lambda + (1 - lambda(x) / Lambda) delta_x.
struct JumpCouplingSpec {
  double Lambda = 0.0;
  std::vector<std::vector<double>> nu_bar;
  double q = 0.0;  // max over pairs of the TV (half L1) between lazified kernels

  int size() const { return static_cast<int>(nu_bar.size()); }
  double gamma() const { return (1.0 - q) * Lambda; }
};

// rates[i][j] = jump intensity i -> j (diagonal ignored). Throws SpecError if
// Lambda is below the largest exit rate or the kernels give q >= 1.
JumpCouplingSpec make_jump_coupling(const std::vector<std::vector<double>>& rates, double Lambda);
// Lambda maximizing (1 - q) Lambda among the breakpoints of that piecewise
// linear function.
JumpCouplingSpec best_jump_coupling(const std::vector<std::vector<double>>& rates);
// Level-0 environment intensities tau_0(i, j) of a discrete spec.
std::vector<std::vector<double>> level0_rates(const DiscreteEnvSpec& spec);

struct JumpCouplingRun {
  bool coupled = false;
  double tau = 0.0;
  int rings = 0;
  int x_end = 0;
  int y_end = 0;
};

// Shared Exp(Lambda) clocks; at each ring the pair is drawn from the maximal
// coupling of the two lazified kernels. Stops at coupling or at time limit.
JumpCouplingRun run_maximal_coupling(const JumpCouplingSpec& spec, int x, int y, double limit, Rng& rng);
JumpCouplingRun maximal_coupling_jump(const JumpCouplingSpec& spec, int x, int y, std::uint64_t seed);

struct Retry {
  double eta;   // arrival clock of the dominating queue at 0
  double zeta;  // environment coupling time (censored at eta on failure)
  double tau;   // hitting time of 0 by the dominating queue before this try
};

struct CouplingTrace {
  double tau0 = 0.0;
  std::vector<Retry> retries;  // retries[k] holds (eta_k, zeta_k, tau_k); tau_0 = tau0
  int J = 0;                   // index of the successful try
  double tau = 0.0;
  bool coupled = false;        // false if the horizon ran out
  bool zeta_censored = false;  // zeta recorded as a lower bound on failed tries
};

struct HarnessOptions {
  double horizon = 1e6;
  double dt = 1e-3;    // diffusive environments only
  double h_cap = 1e-2; // diffusive environments only
};

// Coupling construction: both queue copies dominated by an M/M/1 queue with
// rates (lambda_bar, mu_bar); at each visit of the dominating queue to 0 the
// environments race an Exp(lambda_bar) clock.
CouplingTrace couple_joint(const DiscreteEnvSpec& spec, int n1, int z1, int n2, int z2, std::uint64_t seed,
                           const HarnessOptions& opt = {});
CouplingTrace couple_joint(const DiffusionEnvSpec& spec, int n1, double z1, int n2, double z2, std::uint64_t seed,
                           const HarnessOptions& opt = {});

struct MgfCheckReport {
  std::size_t samples = 0;
  double mgf_empirical = 0.0;
  double mgf_se = 0.0;
  double theta = 0.0;
  double prob_empirical = 0.0;  // P(eta < xi)
  double prob_se = 0.0;
  double prob_bound = 0.0;      // alpha^{-beta/gamma} gamma / (beta + gamma)
  double tail_max_excess = 0.0; // max over the grid of S_eta(t) - alpha e^{-gamma t}
  double dkw_eps = 0.0;
  bool tail_ok = false;
  bool mgf_ok = false;   // empirical <= theta + 3 se
  bool prob_ok = false;  // empirical >= bound - 3 se
};

using EtaSampler = std::function<double(Rng&)>;

// xi ~ Exp(beta) against eta from the sampler. Throws SpecError if eta
// violates its declared tail (non-positive draws, or survival above
// alpha e^{-gamma t} + DKW on the grid).
MgfCheckReport mgf_min_check(double alpha, double beta, double gamma, double a, std::size_t n_samples,
                             std::uint64_t seed, const EtaSampler& eta);

struct TvDecayPoint {
  double t;
  double tv;
  double bound;
};

struct TvDecayReport {
  int n0 = 0;
  int z0 = 0;
  std::vector<TvDecayPoint> points;
  bool all_hold = false;
  double fitted_rate = 0.0;  // slope of -log TV over the second half of the grid
  double truncation_tail = 0.0;
};

// Exact TV(P^t(x0, .), pi) on the truncated chain (pi renormalized to the
// truncation) against C (1 + c^{n0}) e^{-kappa t}.
TvDecayReport tv_decay_check(const DiscreteEnvSpec& spec, const RateCertificate& cert, int n0, int z0,
                             const std::vector<double>& t_grid, int n_max);

}  // namespace envq
