#include "envq/discrete_chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

#include "envq/errors.hpp"
#include "envq/rng.hpp"

namespace envq {

double GeneratorMatrix::max_exit_rate() const {
  double q = 0.0;
  for (int x = 0; x < R.outerSize(); ++x) q = std::max(q, -R.coeff(x, x));
  return q;
}

GeneratorMatrix build_generator(const DiscreteEnvSpec& spec, int n_max) {
  if (n_max < 1) throw SpecError("n_max must be at least 1");
  const int m = spec.size();
  if (m == 0) throw SpecError("environment has no states");
  GeneratorMatrix g;
  g.n_max = n_max;
  g.m = m;
  std::vector<Rates> rates(m);
  for (int i = 0; i < m; ++i) rates[i] = spec.rates_at(i);

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::pair<int, double>> row;
  const double log_max = std::log(std::numeric_limits<double>::max());
  for (int n = 0; n <= n_max; ++n) {
    for (int i = 0; i < m; ++i) {
      const int x = g.index(n, i);
      double out = 0.0;
      if (n < n_max && rates[i].lambda > 0.0) {
        trip.emplace_back(x, g.index(n + 1, i), rates[i].lambda);
        out += rates[i].lambda;
      }
      if (n >= 1) {
        trip.emplace_back(x, g.index(n - 1, i), rates[i].mu);
        out += rates[i].mu;
      }
      row.clear();
      spec.tau.row(n, i, m, row);
      for (auto& [j, w] : row) {
        if (w <= 0.0) continue;
        double lr;
        if (n == 0) lr = std::log(w);
        else if (rates[i].rho <= 0.0) lr = std::numeric_limits<double>::infinity();
        else lr = std::log(w) - n * std::log(rates[i].rho);
        if (!(lr < log_max))
          throw NumericalError("environment rate rho^-n tau_n overflows at n=" + std::to_string(n) +
                               ", state " + std::to_string(i));
        const double r = std::exp(lr);
        trip.emplace_back(x, g.index(n, j), r);
        out += r;
      }
      trip.emplace_back(x, x, -out);
    }
  }
  g.R.resize(g.size(), g.size());
  g.R.setFromTriplets(trip.begin(), trip.end());
  g.R.makeCompressed();
  return g;
}

DiscretePi invariant_measure_discrete(const DiscreteEnvSpec& spec, int n_max) {
  const int m = spec.size();
  std::vector<double> rho(m);
  double xi = 0.0;
  double rho_max = 0.0;
  for (int i = 0; i < m; ++i) {
    rho[i] = spec.rates_at(i).rho;
    if (!(rho[i] < 1.0)) throw NumericalError("Xi diverges: rho(z) >= 1 at state " + std::to_string(i));
    xi += spec.v[i] / (1.0 - rho[i]);
    rho_max = std::max(rho_max, rho[i]);
  }
  if (!std::isfinite(xi)) throw NumericalError("Xi overflow");
  DiscretePi pi;
  pi.xi = xi;
  pi.n_max = n_max;
  pi.m = m;
  pi.weights.resize(static_cast<std::size_t>((n_max + 1) * m));
  for (int n = 0; n <= n_max; ++n)
    for (int i = 0; i < m; ++i) pi.weights[n * m + i] = std::pow(rho[i], n) * spec.v[i] / xi;
  double tail = 0.0;
  double vsum = 0.0;
  for (int i = 0; i < m; ++i) {
    tail += spec.v[i] * std::pow(rho[i], n_max + 1) / (1.0 - rho[i]);
    vsum += spec.v[i];
  }
  pi.tail_mass = tail / xi;
  pi.tail_mass_bound = vsum * std::pow(rho_max, n_max + 1) / (1.0 - rho_max) / xi;
  return pi;
}

double check_balance(const std::vector<double>& pi, const GeneratorMatrix& g) {
  if (static_cast<int>(pi.size()) != g.size()) throw SpecError("check_balance: index sets differ");
  std::vector<double> acc(pi.size(), 0.0);
  for (int x = 0; x < g.R.outerSize(); ++x)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g.R, x); it; ++it)
      acc[it.col()] += pi[x] * it.value();
  double worst = 0.0;
  for (int y = 0; y < g.size(); ++y)
    if (g.level(y) < g.n_max) worst = std::max(worst, std::abs(acc[y]));
  return worst;
}

double check_balance(const DiscretePi& pi, const GeneratorMatrix& g) {
  if (pi.m != g.m || pi.n_max != g.n_max) throw SpecError("check_balance: index sets differ");
  return check_balance(pi.weights, g);
}

CtmcPath simulate_ctmc(const GeneratorMatrix& g, int x0, double horizon, std::uint64_t seed,
                       const CtmcOptions& opt) {
  if (!(horizon > 0.0)) throw SpecError("horizon must be positive");
  Rng rng(seed);
  CtmcPath path;
  path.horizon = horizon;
  path.occupation.assign(g.size(), 0.0);
  path.events.push_back({0.0, x0});
  int x = x0;
  double t = 0.0;
  std::vector<double> w;
  std::vector<int> dest;
  while (true) {
    const double rate = -g.R.coeff(x, x);
    if (rate <= 0.0) {
      path.occupation[x] += horizon - t;
      break;
    }
    const double hold = rng.exponential(rate);
    if (t + hold >= horizon) {
      path.occupation[x] += horizon - t;
      break;
    }
    path.occupation[x] += hold;
    t += hold;
    w.clear();
    dest.clear();
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g.R, x); it; ++it) {
      if (it.col() == x) continue;
      w.push_back(it.value());
      dest.push_back(static_cast<int>(it.col()));
    }
    x = dest[rng.categorical(w, rate)];
    ++path.jumps;
    if (path.events.size() < opt.max_logged) path.events.push_back({t, x});
    if (path.jumps >= opt.max_events)
      throw BudgetExceeded("event budget of " + std::to_string(opt.max_events) + " exceeded at t=" +
                           std::to_string(t));
  }
  return path;
}

std::vector<double> transient_law(const GeneratorMatrix& g, int x0, double t, const TransientOptions& opt) {
  std::vector<double> p0(g.size(), 0.0);
  p0.at(x0) = 1.0;
  return transient_law(g, p0, t, opt);
}

std::vector<double> transient_law(const GeneratorMatrix& g, const std::vector<double>& p0, double t,
                                  const TransientOptions& opt) {
  if (t < 0.0) throw SpecError("transient_law: t must be nonnegative");
  const int N = g.size();
  if (static_cast<int>(p0.size()) != N) throw SpecError("transient_law: initial law has wrong size");
  if (t == 0.0) return p0;
  const double lam = g.max_exit_rate() * (1.0 + 1e-12);
  if (lam == 0.0) return p0;
  const double a = lam * t;
  if (!std::isfinite(a)) throw NumericalError("uniformization rate overflow");

  if (a > opt.max_poisson_mean) {
    if (N > 200)
      throw NumericalError("uniformization rate overflow: Poisson mean " + std::to_string(a) +
                           " exceeds budget for " + std::to_string(N) + " states");
    Eigen::MatrixXd A = Eigen::MatrixXd(g.R) * t;
    Eigen::MatrixXd P = A.exp();
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p0.data(), N);
    Eigen::VectorXd out = P.transpose() * v;
    std::vector<double> res(out.data(), out.data() + N);
    for (double& r : res) {
      if (!std::isfinite(r)) throw NumericalError("matrix exponential produced a non-finite entry");
      r = std::max(r, 0.0);
    }
    return res;
  }

  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p0.data(), N);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(N);
  Eigen::SparseMatrix<double> Rt = g.R.transpose();
  Rt /= lam;
  const double loga = std::log(a);
  double cum = 0.0;
  for (long k = 0;; ++k) {
    const double lw = -a + k * loga - std::lgamma(static_cast<double>(k) + 1.0);
    const double w = std::exp(lw);
    if (w > 0.0) acc += w * v;
    cum += w;
    if (k > a) {
      const double r = a / (k + 1.0);
      if (w * r / (1.0 - r) <= opt.tv_tol && 1.0 - cum <= 10.0 * opt.tv_tol + 1e-12) break;
    }
    if (k > 10 * static_cast<long>(a) + 1000) throw NumericalError("uniformization did not terminate");
    v += Rt * v;
  }
  return std::vector<double>(acc.data(), acc.data() + N);
}

DiscreteEnvSpec example_env_ex21(const Ex21Params& p) {
  const int M = static_cast<int>(p.points.size());
  if (M < 2) throw SpecError("ex2.1 needs at least two points");
  if (p.m_n.empty()) throw SpecError("ex2.1 needs m_n");
  for (int mn : p.m_n)
    if (mn < 2 || mn > M) throw SpecError("ex2.1: each m_n must satisfy 2 <= m_n <= number of points");
  for (double z : p.points)
    if (!(z > 0.0 && z < 1.0)) throw SpecError("ex2.1 points must lie in (0,1)");
  if (*std::max_element(p.m_n.begin(), p.m_n.end()) < M)
    throw SpecError("ex2.1: some points never belong to any D_n");

  DiscreteEnvSpec s;
  s.name = "ex2.1";
  s.states = p.points;
  s.v.assign(M, 1.0);
  s.rates.lambda = ScalarField::linear(p.mu, 0.0);
  s.rates.mu = ScalarField::constant(p.mu);
  s.rates.lambda_bar = p.mu * *std::max_element(p.points.begin(), p.points.end());
  s.rates.mu_bar = p.mu;
  s.tau.kind = TauModel::Kind::subsets;
  s.tau.beta = p.beta;

  int K = static_cast<int>(p.m_n.size());
  for (int l : p.uniform_levels) K = std::max(K, l + 1);
  auto mode_at = [&](int n) {
    if (p.all_uniform) return TauModel::Mode::uniform;
    return std::find(p.uniform_levels.begin(), p.uniform_levels.end(), n) != p.uniform_levels.end()
               ? TauModel::Mode::uniform
               : TauModel::Mode::cyclic;
  };
  for (int n = 0; n <= K; ++n) {
    const int mn = p.m_n[std::min<std::size_t>(static_cast<std::size_t>(n), p.m_n.size() - 1)];
    TauModel::Regime r;
    r.from_n = n;
    for (int k = 0; k < mn; ++k) r.members.push_back(k);
    r.mode = mode_at(n);
    s.tau.regimes.push_back(std::move(r));
  }
  return s;
}

DiscreteEnvSpec example_env_ex22(const Ex22Params& p) {
  if (p.half_width < 1) throw SpecError("ex2.2 window half-width must be at least 1");
  if (!(p.rho0 > 0.0 && p.rho0 < 1.0)) throw SpecError("ex2.2 rho0 must lie in (0,1)");
  const int M = 2 * p.half_width + 1;
  DiscreteEnvSpec s;
  s.name = "ex2.2";
  double rmax = 0.0;
  for (int k = 0; k < M; ++k) {
    const int i = k - p.half_width;
    const double r = 1.0 - (1.0 - p.rho0) / std::pow(1.0 + std::abs(i), p.power);
    s.states.push_back(r);
    rmax = std::max(rmax, r);
  }
  // States with equal rho share a coordinate; the rates use a table over the
  // index instead of the value.
  std::vector<double> idx(M), lam(M);
  for (int k = 0; k < M; ++k) {
    idx[k] = k;
    lam[k] = p.mu * s.states[k];
  }
  s.states = idx;
  s.v.assign(M, 1.0);
  s.rates.lambda = ScalarField::table(idx, lam);
  s.rates.mu = ScalarField::constant(p.mu);
  s.rates.lambda_bar = p.mu * rmax;
  s.rates.mu_bar = p.mu;
  s.tau.kind = TauModel::Kind::shift;
  s.tau.beta = p.beta;
  return s;
}

DiscreteEnvSpec example_env_two_state(const TwoStateParams& p) {
  if (!(p.tau12 > 0.0 && p.tau21 > 0.0)) throw SpecError("two-state: switching rates must be positive");
  DiscreteEnvSpec s;
  s.name = "two-state";
  s.states = {0.0, 1.0};
  s.v = {1.0, p.tau12 / p.tau21};
  s.rates.lambda = ScalarField::table({0.0, 1.0}, {p.mu * p.rho1, p.mu * p.rho2});
  s.rates.mu = ScalarField::constant(p.mu);
  s.rates.lambda_bar = p.mu * std::max(p.rho1, p.rho2);
  s.rates.mu_bar = p.mu;
  s.tau.kind = TauModel::Kind::matrix;
  s.tau.base = {{0.0, p.tau12}, {p.tau21, 0.0}};
  s.tau.beta = p.beta;
  return s;
}

DiscreteEnvSpec example_env_single(double lambda, double mu) {
  DiscreteEnvSpec s;
  s.name = "single-state";
  s.states = {0.0};
  s.v = {1.0};
  s.rates.lambda = ScalarField::constant(lambda);
  s.rates.mu = ScalarField::constant(mu);
  s.rates.lambda_bar = lambda;
  s.rates.mu_bar = mu;
  s.tau.kind = TauModel::Kind::matrix;
  s.tau.base = {{0.0}};
  return s;
}

Ex22XiReport ex22_xi_variants(const Ex22Params& p) {
  auto xi_for = [&](int W) {
    double s = 0.0;
    for (int i = -W; i <= W; ++i) s += std::pow(1.0 + std::abs(i), p.power) / (1.0 - p.rho0);
    return s;
  };
  Ex22XiReport r;
  r.window_xi = xi_for(p.half_width);
  for (int W : {10, 100, 1000, 10000}) r.lattice_partial_sums.emplace_back(W, xi_for(W));
  const double s3 = r.lattice_partial_sums[2].second;
  const double s4 = r.lattice_partial_sums[3].second;
  r.lattice_finite = (s4 - s3) <= 1e-8 * s4;
  return r;
}

}  // namespace envq
