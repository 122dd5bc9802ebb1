#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <string>
#include <vector>

#include "envq/env_core.hpp"

namespace envq {

// Truncated joint generator on {0..n_max} x states, state index n*m + i.
struct GeneratorMatrix {
  int n_max = 0;
  int m = 0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> R;
  bool up_rate_redirected = true;  // arrivals at n_max are dropped (self-loop)

  int index(int n, int i) const { return n * m + i; }
  int level(int x) const { return x / m; }
  int env(int x) const { return x % m; }
  int size() const { return (n_max + 1) * m; }
  double max_exit_rate() const;
};

GeneratorMatrix build_generator(const DiscreteEnvSpec& spec, int n_max);

struct DiscretePi {
  double xi = 0.0;
  int n_max = 0;
  int m = 0;
  std::vector<double> weights;   // index n*m + i
  double tail_mass = 0.0;        // exact mass above n_max
  double tail_mass_bound = 0.0;  // sum_z v(z) rho_bar^(n_max+1) / (1 - rho_bar) / xi

  double at(int n, int i) const { return weights[static_cast<std::size_t>(n * m + i)]; }
};

DiscretePi invariant_measure_discrete(const DiscreteEnvSpec& spec, int n_max);

// Max over columns y with level < n_max of |sum_x pi(x) R[x, y]|.
double check_balance(const DiscretePi& pi, const GeneratorMatrix& R);
double check_balance(const std::vector<double>& pi, const GeneratorMatrix& R);

struct CtmcEvent {
  double t;
  int state;
};

struct CtmcPath {
  std::vector<CtmcEvent> events;  // first entry is the start
  std::vector<double> occupation; // time spent in each state
  double horizon = 0.0;
  std::uint64_t jumps = 0;
};

struct CtmcOptions {
  std::uint64_t max_events = 100000000;
  std::size_t max_logged = 100000;
};

CtmcPath simulate_ctmc(const GeneratorMatrix& R, int x0, double horizon, std::uint64_t seed,
                       const CtmcOptions& opt = {});

struct TransientOptions {
  double tv_tol = 1e-10;
  double max_poisson_mean = 5e7;  // beyond this, dense exponential for small chains
};

// Row x0 of exp(t R).
std::vector<double> transient_law(const GeneratorMatrix& R, int x0, double t, const TransientOptions& opt = {});
// Propagates an arbitrary initial law.
std::vector<double> transient_law(const GeneratorMatrix& R, const std::vector<double>& p0, double t,
                                  const TransientOptions& opt = {});

enum class Ex21Mode { cyclic, uniform, mixed };

struct Ex21Params {
  std::vector<double> points;            // values in (0,1); also the rho of each state
  std::vector<int> m_n;                  // |D_n| per level; the last entry repeats
  std::vector<int> uniform_levels;       // the set L (levels using uniform jumps)
  bool all_uniform = false;
  BetaSeq beta;
  double mu = 1.0;
};

struct Ex22Params {
  int half_width = 20;                   // window i in [-W, W]
  double rho0 = 0.5;                     // rho at i = 0
  double power = 1.0;                    // rho_i = 1 - (1 - rho0) / (1 + |i|)^power
  BetaSeq beta;
  double mu = 1.0;
};

struct TwoStateParams {
  double rho1 = 0.2;
  double rho2 = 0.5;
  double tau12 = 1.0;
  double tau21 = 1.0;
  BetaSeq beta;
  double mu = 1.0;
};

DiscreteEnvSpec example_env_ex21(const Ex21Params& p);
DiscreteEnvSpec example_env_ex22(const Ex22Params& p);
DiscreteEnvSpec example_env_two_state(const TwoStateParams& p);
// One-state environment: plain M/M/1 with rates (lambda, mu).
DiscreteEnvSpec example_env_single(double lambda, double mu);

// Xi of the truncated shift window, and partial sums of the infinite-lattice
// series for growing windows (which grow without bound for v = 1).
struct Ex22XiReport {
  double window_xi;
  std::vector<std::pair<int, double>> lattice_partial_sums;
  bool lattice_finite;
};
Ex22XiReport ex22_xi_variants(const Ex22Params& p);

}  // namespace envq
