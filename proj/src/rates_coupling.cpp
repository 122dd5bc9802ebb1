#include "envq/rates_coupling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "envq/errors.hpp"
#include "envq/reflected_sde.hpp"

namespace envq {

namespace {

void require_rates(double lambda_bar, double mu_bar) {
  if (!(lambda_bar > 0.0) || !(mu_bar > 0.0)) throw SpecError("lambda_bar and mu_bar must be positive");
  if (!(mu_bar > lambda_bar)) throw SpecError("mu_bar must exceed lambda_bar");
}

// expm1(x) / x, equal to 1 at x = 0.
double expm1_ratio(double x) { return std::abs(x) < 1e-8 ? 1.0 + 0.5 * x : std::expm1(x) / x; }

}  // namespace

double m_func(double c, double lambda_bar, double mu_bar) {
  if (!(c >= 1.0)) throw SpecError("m(c) needs c >= 1");
  return -lambda_bar * c - mu_bar / c + (lambda_bar + mu_bar);
}

double c_star(double lambda_bar, double mu_bar) {
  require_rates(lambda_bar, mu_bar);
  return std::sqrt(mu_bar / lambda_bar);
}

double m_star(double lambda_bar, double mu_bar) {
  require_rates(lambda_bar, mu_bar);
  const double d = std::sqrt(mu_bar) - std::sqrt(lambda_bar);
  return d * d;
}

double theta_func(double alpha, double beta, double gamma, double a) {
  if (!(alpha >= 1.0) || !(beta > 0.0) || !(gamma > 0.0))
    throw SpecError("theta needs alpha >= 1 and beta, gamma > 0");
  if (!(a >= 0.0) || !(a < beta + gamma)) throw SpecError("theta needs 0 <= a < beta + gamma");
  const double L = std::log(alpha);
  const double d = a - beta;
  if (std::abs(d) < 1e-3 * std::max(1.0, beta)) {
    // Both terms share the pole at d = 0; combined over the common
    // denominator the ratio is regular:
    // [beta (gamma expm1(dL/gamma)/d + 1) + gamma e^{dL/gamma}] / (gamma - d).
    const double x = d * L / gamma;
    return (beta * (L * expm1_ratio(x) + 1.0) + gamma * std::exp(x)) / (gamma - d);
  }
  return a * gamma / (d * (beta + gamma - a)) * std::exp(d * L / gamma) + beta / (beta - a);
}

double success_prob(double alpha, double gamma, double lambda_bar) {
  if (!(alpha >= 1.0) || !(gamma > 0.0) || !(lambda_bar > 0.0))
    throw SpecError("success_prob needs alpha >= 1 and gamma, lambda_bar > 0");
  return gamma / (lambda_bar + gamma) * std::exp(-lambda_bar / gamma * std::log(alpha));
}

Feasibility feasible(double c, double epsilon, double alpha, double gamma, double lambda_bar, double mu_bar) {
  require_rates(lambda_bar, mu_bar);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw SpecError("epsilon must lie in (0, 1)");
  if (!(c >= 1.0)) throw SpecError("c must be at least 1");
  Feasibility f;
  const double a = m_func(c, lambda_bar, mu_bar);
  if (a >= lambda_bar + gamma) {
    f.kappa_c = std::numeric_limits<double>::infinity();
    f.margin = -std::numeric_limits<double>::infinity();
    return f;
  }
  f.kappa_c = c * theta_func(alpha, lambda_bar, gamma, a);
  const double p = success_prob(alpha, gamma, lambda_bar);
  f.margin = -(epsilon / (1.0 - epsilon)) * std::log1p(-p) - std::log(f.kappa_c);
  f.feasible = f.margin > 0.0;
  return f;
}

double RateCertificate::bound_to_pi(int n0, double t) const {
  return C * (1.0 + std::pow(c, n0)) * std::exp(-kappa * t);
}

double RateCertificate::bound_pairwise(int n1, int n2, double t) const {
  return C_star * (std::pow(c, n1) + std::pow(c, n2)) * std::exp(-kappa * t);
}

RateCertificate make_certificate(double c, double epsilon, double alpha, double gamma, double lambda_bar,
                                 double mu_bar) {
  const Feasibility f = feasible(c, epsilon, alpha, gamma, lambda_bar, mu_bar);
  if (!f.feasible) throw NumericalError("(c, epsilon) violates the feasibility constraint");
  RateCertificate r;
  r.alpha = alpha;
  r.gamma = gamma;
  r.lambda_bar = lambda_bar;
  r.mu_bar = mu_bar;
  r.c = c;
  r.epsilon = epsilon;
  r.m_c = m_func(c, lambda_bar, mu_bar);
  r.kappa = (1.0 - epsilon) * r.m_c;
  r.kappa_c = f.kappa_c;
  r.p = success_prob(alpha, gamma, lambda_bar);
  r.q = 1.0 - r.p;
  r.margin = f.margin;
  const double ratio = (1.0 - epsilon) / epsilon;
  const double K = std::pow(f.kappa_c, ratio);
  r.C_star = r.p * std::pow(f.kappa_c, (1.0 - epsilon) * (1.0 / epsilon + 1.0)) / (1.0 - K * r.q);
  const double rho_bar = lambda_bar / mu_bar;
  r.C = r.C_star / (1.0 - std::sqrt(rho_bar));
  r.c_star = c_star(lambda_bar, mu_bar);
  r.m_star = m_star(lambda_bar, mu_bar);
  return r;
}

RateCertificate optimize_rate(double alpha, double gamma, double lambda_bar, double mu_bar,
                              const OptimizeOptions& opt) {
  require_rates(lambda_bar, mu_bar);
  if (!(alpha >= 1.0) || !(gamma > 0.0)) throw SpecError("optimize_rate needs alpha >= 1 and gamma > 0");
  const int G = std::max(4, opt.grid);
  const double cs = c_star(lambda_bar, mu_bar);
  const double log_s0 = std::log(1e-4);
  auto c_of = [&](int k) { return 1.0 + (cs - 1.0) * std::exp(log_s0 * (1.0 - static_cast<double>(k) / G)); };
  const double le0 = std::log(1e-4), le1 = std::log(1.0 - 1e-4);
  auto eps_of = [&](int k) { return std::exp(le0 + (le1 - le0) * k / (G - 1)); };

  int feasible_cells = 0;
  int best_e = -1;
  double best_kappa = -1.0;
  for (int j = 0; j < G; ++j) {
    const double e = eps_of(j);
    for (int k = 0; k < G; ++k) {
      const double c = c_of(k);
      if (!feasible(c, e, alpha, gamma, lambda_bar, mu_bar).feasible) continue;
      ++feasible_cells;
      const double kap = (1.0 - e) * m_func(c, lambda_bar, mu_bar);
      if (kap > best_kappa) {
        best_kappa = kap;
        best_e = j;
      }
    }
  }
  if (best_e < 0) throw NumericalError("optimize_rate: no feasible grid cell");

  int steps = 0;
  // Largest feasible c for a given eps; feasibility is monotone in c since
  // c theta(m(c)) increases on [1, c*].
  auto c_max = [&](double e) {
    double lo = 1.0, hi = cs;
    if (feasible(hi, e, alpha, gamma, lambda_bar, mu_bar).feasible) return hi;
    for (int it = 0; it < opt.refine_iters; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid, e, alpha, gamma, lambda_bar, mu_bar).feasible) lo = mid;
      else hi = mid;
      ++steps;
    }
    return lo;
  };
  auto kappa_of = [&](double e) {
    const double c = c_max(e);
    return c > 1.0 ? (1.0 - e) * m_func(c, lambda_bar, mu_bar) : 0.0;
  };
  double a = eps_of(std::max(0, best_e - 1)), b = eps_of(std::min(G - 1, best_e + 1));
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = kappa_of(x1), f2 = kappa_of(x2);
  for (int it = 0; it < opt.refine_iters; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = kappa_of(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = kappa_of(x1);
    }
  }
  double e_best = f1 >= f2 ? x1 : x2;
  double c_best = c_max(e_best);
  // Fall back to the grid optimum if refinement did not improve on it.
  if ((1.0 - e_best) * m_func(c_best, lambda_bar, mu_bar) < best_kappa || !(c_best > 1.0)) {
    e_best = eps_of(best_e);
    c_best = c_max(e_best);
  }
  if (c_best >= cs) c_best = std::nextafter(cs, 1.0);
  while (!feasible(c_best, e_best, alpha, gamma, lambda_bar, mu_bar).feasible && c_best > 1.0)
    c_best = 1.0 + (c_best - 1.0) * (1.0 - 1e-9);
  RateCertificate r = make_certificate(c_best, e_best, alpha, gamma, lambda_bar, mu_bar);
  r.grid_feasible_cells = feasible_cells;
  r.refinement_steps = steps;
  return r;
}

double robert_bound(int n, double lambda_bar, double mu_bar, double t) {
  require_rates(lambda_bar, mu_bar);
  if (n < 0 || t < 0.0) throw SpecError("robert_bound needs n >= 0 and t >= 0");
  const double rho = lambda_bar / mu_bar;
  const double d = std::sqrt(lambda_bar) - std::sqrt(mu_bar);
  return (1.0 + std::pow(rho, -0.5 * n)) * std::exp(-d * d * t);
}

JumpCouplingSpec make_jump_coupling(const std::vector<std::vector<double>>& rates, double Lambda) {
  const int m = static_cast<int>(rates.size());
  if (m == 0) throw SpecError("jump coupling needs at least one state");
  JumpCouplingSpec s;
  s.Lambda = Lambda;
  s.nu_bar.assign(m, std::vector<double>(m, 0.0));
  double max_exit = 0.0;
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(rates[i].size()) != m) throw SpecError("jump rates must be square");
    double out = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      if (rates[i][j] < 0.0) throw SpecError("jump rates must be nonnegative");
      out += rates[i][j];
    }
    max_exit = std::max(max_exit, out);
  }
  if (!(Lambda > 0.0) || Lambda < max_exit * (1.0 - 1e-12))
    throw SpecError("Lambda must be positive and at least the largest exit rate");
  for (int i = 0; i < m; ++i) {
    double out = 0.0;
    for (int j = 0; j < m; ++j)
      if (j != i) {
        s.nu_bar[i][j] = rates[i][j] / Lambda;
        out += rates[i][j];
      }
    s.nu_bar[i][i] = std::max(0.0, 1.0 - out / Lambda);
  }
  double q = 0.0;
  for (int x = 0; x < m; ++x)
    for (int y = x + 1; y < m; ++y) {
      double d = 0.0;
      for (int k = 0; k < m; ++k) d += std::abs(s.nu_bar[x][k] - s.nu_bar[y][k]);
      q = std::max(q, 0.5 * d);
    }
  s.q = q;
  if (!(q < 1.0 - 1e-12)) throw SpecError("lazified kernels are mutually singular (q = 1)");
  return s;
}

JumpCouplingSpec best_jump_coupling(const std::vector<std::vector<double>>& rates) {
  const int m = static_cast<int>(rates.size());
  if (m == 0) throw SpecError("jump coupling needs at least one state");
  std::vector<double> exit(m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (j != i) exit[i] += rates[i][j];
  const double lmin = *std::max_element(exit.begin(), exit.end());
  if (m == 1) return make_jump_coupling(rates, lmin > 0.0 ? lmin : 1.0);
  std::vector<double> cand;
  if (lmin > 0.0) cand.push_back(lmin);
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      if (x != y && exit[x] + rates[y][x] >= lmin && exit[x] + rates[y][x] > 0.0) cand.push_back(exit[x] + rates[y][x]);
  std::sort(cand.begin(), cand.end());
  std::optional<JumpCouplingSpec> best;
  for (double L : cand) {
    try {
      JumpCouplingSpec s = make_jump_coupling(rates, L);
      if (!best || s.gamma() > best->gamma() * (1.0 + 1e-12)) best = s;
    } catch (const SpecError&) {
    }
  }
  if (!best) throw SpecError("no uniformization rate gives q < 1");
  return *best;
}

std::vector<std::vector<double>> level0_rates(const DiscreteEnvSpec& spec) {
  const int m = spec.size();
  std::vector<std::vector<double>> r(m, std::vector<double>(m, 0.0));
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < m; ++i) {
    row.clear();
    spec.tau.row(0, i, m, row);
    for (auto& [j, w] : row) r[i][j] += w;
  }
  return r;
}

JumpCouplingRun run_maximal_coupling(const JumpCouplingSpec& spec, int x, int y, double limit, Rng& rng) {
  JumpCouplingRun run;
  if (x == y) {
    run.coupled = true;
    run.x_end = run.y_end = x;
    return run;
  }
  const int m = spec.size();
  std::vector<double> w(m), a(m), b(m);
  double t = 0.0;
  while (true) {
    t += rng.exponential(spec.Lambda);
    if (t >= limit) {
      run.tau = limit;
      run.x_end = x;
      run.y_end = y;
      return run;
    }
    ++run.rings;
    const auto& px = spec.nu_bar[x];
    const auto& py = spec.nu_bar[y];
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      w[k] = std::min(px[k], py[k]);
      a[k] = px[k] - w[k];
      b[k] = py[k] - w[k];
      s += w[k];
    }
    if (rng.uniform() < s) {
      x = y = static_cast<int>(rng.categorical(w, s));
      run.coupled = true;
      run.tau = t;
      run.x_end = run.y_end = x;
      return run;
    }
    x = static_cast<int>(rng.categorical(a, 1.0 - s));
    y = static_cast<int>(rng.categorical(b, 1.0 - s));
  }
}

JumpCouplingRun maximal_coupling_jump(const JumpCouplingSpec& spec, int x, int y, std::uint64_t seed) {
  if (!(spec.q < 1.0)) throw SpecError("maximal coupling needs q < 1");
  Rng rng(seed);
  return run_maximal_coupling(spec, x, y, std::numeric_limits<double>::infinity(), rng);
}

namespace {

CouplingTrace immediate_trace() {
  CouplingTrace tr;
  tr.coupled = true;
  tr.retries.push_back({0.0, 0.0, 0.0});
  return tr;
}

// Records try k and returns true on success.
bool finish_try(CouplingTrace& tr, double& t, double tau_k, double eta, bool coupled, double zeta) {
  if (tr.retries.empty()) tr.tau0 = tau_k;
  if (coupled) {
    tr.retries.push_back({eta, zeta, tau_k});
    tr.J = static_cast<int>(tr.retries.size()) - 1;
    t += zeta;
    tr.tau = t;
    tr.coupled = true;
    return true;
  }
  tr.retries.push_back({eta, eta, tau_k});
  tr.zeta_censored = true;
  t += eta;
  return false;
}

}  // namespace

CouplingTrace couple_joint(const DiscreteEnvSpec& spec, int n1, int z1, int n2, int z2, std::uint64_t seed,
                           const HarnessOptions& opt) {
  const double lb = spec.rates.lambda_bar, mb = spec.rates.mu_bar;
  require_rates(lb, mb);
  const int m = spec.size();
  if (n1 < 0 || n2 < 0 || z1 < 0 || z2 < 0 || z1 >= m || z2 >= m) throw SpecError("couple_joint: invalid start");
  if (n1 == n2 && z1 == z2) return immediate_trace();
  const JumpCouplingSpec jc = best_jump_coupling(level0_rates(spec));
  std::vector<Rates> rates(m);
  for (int i = 0; i < m; ++i) rates[i] = spec.rates_at(i);

  Rng rng(seed);
  CouplingTrace tr;
  int nb = std::max(n1, n2);
  int N[2] = {n1, n2};
  int Z[2] = {z1, z2};
  double t = 0.0;
  std::vector<std::pair<int, double>> row[2];
  double env_total[2];
  auto env_rates = [&](int c) {
    row[c].clear();
    spec.tau.row(N[c], Z[c], m, row[c]);
    double tot = 0.0;
    const double lr = N[c] > 0 ? -N[c] * std::log(rates[Z[c]].rho) : 0.0;
    for (auto& [j, w] : row[c]) {
      w = w > 0.0 ? std::exp(std::log(w) + lr) : 0.0;
      if (!std::isfinite(w)) throw NumericalError("couple_joint: environment rate overflow at n=" + std::to_string(N[c]));
      tot += w;
    }
    env_total[c] = tot;
  };

  while (true) {
    const double t_start = t;
    while (nb > 0) {
      env_rates(0);
      env_rates(1);
      const double ex0 = N[0] > 0 ? rates[Z[0]].mu - mb : 0.0;
      const double ex1 = N[1] > 0 ? rates[Z[1]].mu - mb : 0.0;
      const double w[6] = {lb, mb, std::max(0.0, ex0), std::max(0.0, ex1), env_total[0], env_total[1]};
      const double tot = w[0] + w[1] + w[2] + w[3] + w[4] + w[5];
      t += rng.exponential(tot);
      if (t > opt.horizon) {
        tr.tau = opt.horizon;
        return tr;
      }
      const std::size_t ev = rng.categorical(std::array<double, 6>{w[0], w[1], w[2], w[3], w[4], w[5]}, tot);
      switch (ev) {
        case 0: {
          ++nb;
          const double u = rng.uniform() * lb;
          for (int c = 0; c < 2; ++c)
            if (u < rates[Z[c]].lambda) ++N[c];
          break;
        }
        case 1:
          --nb;
          for (int c = 0; c < 2; ++c)
            if (N[c] > 0) --N[c];
          break;
        case 2: --N[0]; break;
        case 3: --N[1]; break;
        default: {
          const int c = ev == 4 ? 0 : 1;
          std::vector<double> ws(row[c].size());
          for (std::size_t k = 0; k < ws.size(); ++k) ws[k] = row[c][k].second;
          Z[c] = row[c][rng.categorical(ws, env_total[c])].first;
          break;
        }
      }
      if (N[0] > nb || N[1] > nb) throw NumericalError("couple_joint: domination violated");
    }
    if (N[0] != 0 || N[1] != 0) throw NumericalError("couple_joint: copies not at 0 with the dominating queue");
    const double tau_k = t - t_start;
    const double eta = rng.exponential(lb);
    const JumpCouplingRun run = run_maximal_coupling(jc, Z[0], Z[1], eta, rng);
    if (finish_try(tr, t, tau_k, eta, run.coupled, run.tau)) return tr;
    Z[0] = run.x_end;
    Z[1] = run.y_end;
    if (t > opt.horizon) {
      tr.tau = opt.horizon;
      return tr;
    }
    nb = 1;
    const double u = rng.uniform() * lb;
    for (int c = 0; c < 2; ++c) N[c] = u < rates[Z[c]].lambda ? 1 : 0;
  }
}

CouplingTrace couple_joint(const DiffusionEnvSpec& spec, int n1, double z1, int n2, double z2, std::uint64_t seed,
                           const HarnessOptions& opt) {
  if (spec.dim() != 1) throw SpecError("couple_joint needs a 1-D diffusive environment");
  const double lb = spec.rates.lambda_bar, mb = spec.rates.mu_bar;
  require_rates(lb, mb);
  if (n1 < 0 || n2 < 0) throw SpecError("couple_joint: invalid start");
  const double tol = 1e-6 * spec.domain.diameter();
  if (n1 == n2 && std::abs(z1 - z2) <= tol) return immediate_trace();

  Rng rng(seed);
  CouplingTrace tr;
  int nb = std::max(n1, n2);
  int N[2] = {n1, n2};
  SdeState S[2] = {make_state(spec, {z1, 0.0}), make_state(spec, {z2, 0.0})};
  double t = 0.0;
  StepOptions fold;
  StepOptions clamp;
  clamp.mode = Reflection::clamp;
  const double log_cap = std::log(opt.h_cap);
  const double log_dt = std::log(opt.dt);

  while (true) {
    const double t_start = t;
    while (nb > 0) {
      Rates r[2];
      double ls[2];
      double lstep = log_dt;
      for (int c = 0; c < 2; ++c) {
        r[c] = eval_rates(spec.rates, S[c].z);
        ls[c] = spec.beta.log_at(N[c]) - (N[c] > 0 ? N[c] * std::log(r[c].rho) : 0.0);
        if (std::isnan(ls[c])) throw NumericalError("couple_joint: time-change scale undefined");
        lstep = std::min(lstep, log_cap - ls[c]);
      }
      const double dtr = std::exp(lstep);
      if (!(dtr > 0.0)) throw NumericalError("couple_joint: time-change scale overflow");
      for (int c = 0; c < 2; ++c) {
        const Vec2 noise{rng.normal(), 0.0};
        advance_reflected(spec, S[c], std::exp(lstep + ls[c]), 1.0, noise, fold);
      }
      const double u = rng.uniform();
      if (u < lb * dtr) {
        ++nb;
        const double v = rng.uniform() * lb;
        for (int c = 0; c < 2; ++c)
          if (v < r[c].lambda) ++N[c];
      } else if (u < (lb + mb) * dtr) {
        --nb;
        for (int c = 0; c < 2; ++c)
          if (N[c] > 0) --N[c];
      }
      for (int c = 0; c < 2; ++c)
        if (N[c] > 0 && rng.uniform() < (r[c].mu - mb) * dtr) --N[c];
      t += dtr;
      if (t > opt.horizon) {
        tr.tau = opt.horizon;
        return tr;
      }
    }
    if (N[0] != 0 || N[1] != 0) throw NumericalError("couple_joint: copies not at 0 with the dominating queue");
    const double tau_k = t - t_start;
    const double eta = rng.exponential(lb);
    // Level-0 environments with shared noise until they meet or eta rings.
    const double scale = spec.beta(0);
    double s = 0.0;
    bool met = std::abs(S[0].z[0] - S[1].z[0]) <= tol;
    while (!met && s < eta) {
      const double h = std::min(opt.dt, eta - s);
      const Vec2 noise{rng.normal(), 0.0};
      advance_reflected(spec, S[0], h, scale, noise, clamp);
      advance_reflected(spec, S[1], h, scale, noise, clamp);
      s += h;
      met = std::abs(S[0].z[0] - S[1].z[0]) <= tol;
    }
    if (met) S[1].z = S[0].z;
    if (finish_try(tr, t, tau_k, eta, met, s)) return tr;
    if (t > opt.horizon) {
      tr.tau = opt.horizon;
      return tr;
    }
    nb = 1;
    const double v = rng.uniform() * lb;
    for (int c = 0; c < 2; ++c) N[c] = v < eval_rates(spec.rates, S[c].z).lambda ? 1 : 0;
  }
}

MgfCheckReport mgf_min_check(double alpha, double beta, double gamma, double a, std::size_t n_samples,
                             std::uint64_t seed, const EtaSampler& eta) {
  if (n_samples < 100) throw SpecError("mgf_min_check needs at least 100 samples");
  if (!(a < beta + gamma) || a < 0.0) throw SpecError("mgf_min_check needs 0 <= a < beta + gamma");
  Rng rng(seed);
  std::vector<double> etas(n_samples);
  double s_mgf = 0.0, s_mgf2 = 0.0, wins = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double xi = rng.exponential(beta);
    const double e = eta(rng);
    if (!(e > 0.0)) throw SpecError("eta sampler violates its declared tail: non-positive draw");
    etas[k] = e;
    const double v = std::exp(a * std::min(xi, e));
    s_mgf += v;
    s_mgf2 += v * v;
    if (e < xi) wins += 1.0;
  }
  const double n = static_cast<double>(n_samples);
  MgfCheckReport rep;
  rep.samples = n_samples;
  rep.mgf_empirical = s_mgf / n;
  rep.mgf_se = std::sqrt(std::max(0.0, s_mgf2 / n - rep.mgf_empirical * rep.mgf_empirical) / n);
  rep.prob_empirical = wins / n;
  rep.prob_se = std::sqrt(rep.prob_empirical * (1.0 - rep.prob_empirical) / n);
  rep.theta = theta_func(alpha, beta, gamma, a);
  rep.prob_bound = std::exp(-beta / gamma * std::log(alpha)) * gamma / (beta + gamma);
  rep.dkw_eps = dkw_epsilon(n_samples);

  std::sort(etas.begin(), etas.end());
  const double t_max = etas[static_cast<std::size_t>(0.99 * (n_samples - 1))];
  double excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 50; ++k) {
    const double t = t_max * k / 50.0;
    const auto it = std::upper_bound(etas.begin(), etas.end(), t);
    const double surv = static_cast<double>(etas.end() - it) / n;
    excess = std::max(excess, surv - std::min(1.0, alpha * std::exp(-gamma * t)));
  }
  rep.tail_max_excess = excess;
  rep.tail_ok = excess <= rep.dkw_eps;
  if (!rep.tail_ok)
    throw SpecError("eta sampler violates its declared tail: survival exceeds alpha e^{-gamma t} by " +
                    std::to_string(excess));
  rep.mgf_ok = rep.mgf_empirical <= rep.theta + 3.0 * rep.mgf_se;
  rep.prob_ok = rep.prob_empirical >= rep.prob_bound - 3.0 * rep.prob_se;
  return rep;
}

TvDecayReport tv_decay_check(const DiscreteEnvSpec& spec, const RateCertificate& cert, int n0, int z0,
                             const std::vector<double>& t_grid, int n_max) {
  if (n0 < 0 || n0 > n_max || z0 < 0 || z0 >= spec.size()) throw SpecError("tv_decay_check: invalid start");
  const GeneratorMatrix g = build_generator(spec, n_max);
  const DiscretePi pi = invariant_measure_discrete(spec, n_max);
  std::vector<double> w = pi.weights;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  TvDecayReport rep;
  rep.n0 = n0;
  rep.z0 = z0;
  rep.truncation_tail = pi.tail_mass;
  rep.all_hold = true;
  for (double t : t_grid) {
    const std::vector<double> p = transient_law(g, g.index(n0, z0), t);
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) d += std::abs(p[k] - w[k]);
    const double tv = 0.5 * d;
    const double b = cert.bound_to_pi(n0, t);
    rep.points.push_back({t, tv, b});
    if (!(tv <= b)) rep.all_hold = false;
  }
  const std::size_t half = rep.points.size() / 2;
  std::vector<double> xs, ys;
  for (std::size_t k = half; k < rep.points.size(); ++k)
    if (rep.points[k].tv > 1e-14) {
      xs.push_back(rep.points[k].t);
      ys.push_back(-std::log(rep.points[k].tv));
    }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxx += (xs[k] - mx) * (xs[k] - mx);
      sxy += (xs[k] - mx) * (ys[k] - my);
    }
    rep.fitted_rate = sxy / sxx;
  }
  return rep;
}

}  // namespace envq
