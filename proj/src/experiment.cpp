#include "envq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "envq/discrete_chain.hpp"
#include "envq/errors.hpp"
#include "envq/joint_sim.hpp"
#include "envq/quadrature.hpp"
#include "envq/rates_coupling.hpp"
#include "envq/reflected_sde.hpp"
#include "envq/rng.hpp"
#include "envq/stationary.hpp"

#ifndef ENVQ_VERSION
#define ENVQ_VERSION "dev"
#endif

namespace envq {

bool ExperimentResult::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

namespace {

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { line(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw Error("csv: row width mismatch");
    line(cells);
  }
  const std::string& text() const { return out_; }

 private:
  std::size_t cols_;
  std::string out_;

  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }
};

std::string I(long long v) { return std::to_string(v); }
std::string D(double v) { return fmt_num(v); }

int worker_count(int requested, std::size_t jobs) {
  int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(1, t);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), std::max<std::size_t>(jobs, 1)));
}

// Runs fn(k) for k < n on worker threads; results are indexed by k, so the
// outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const int w = worker_count(threads, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto body = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < w; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

json assertion_json(const Assertion& a) {
  return json{{"name", a.name}, {"passed", a.passed}, {"value", a.value}, {"bound", a.bound}, {"detail", a.detail}};
}

void add(ExperimentResult& r, std::string name, bool ok, double value, double bound, std::string detail = "") {
  r.assertions.push_back({std::move(name), ok, value, bound, std::move(detail)});
}

JointSimParams joint_params(const RunSection& run) {
  JointSimParams p;
  p.horizon = run.horizon;
  p.dt = run.dt;
  p.h_cap = run.h_cap;
  p.n_cap = run.n_cap;
  p.z_bins = run.bins;
  p.chunks = run.chunks;
  return p;
}

// ---------------------------------------------------------------------------

void run_stationary_discrete(const ExperimentConfig& cfg, ExperimentResult& res, Csv& csv) {
  const auto& spec = cfg.env->d;
  const auto& par = std::get<StationaryDiscreteParams>(cfg.params);
  const int n_max = cfg.run.n_max;

  DiscreteValidationOptions vo;
  vo.n_check = n_max;
  vo.balance_tol = par.balance_tol;
  const ValidationReport vr = validate_spec(spec, vo);
  json checks = json::array();
  for (const auto& c : vr.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}, {"detail", c.detail}});
  add(res, "spec_structurally_valid", structurally_valid(vr), 0.0, 0.0);
  if (!structurally_valid(vr)) {
    res.report["validation"] = checks;
    return;
  }

  const StationaryLaw law = StationaryLaw::discrete(spec);
  const DiscretePi pi = invariant_measure_discrete(spec, n_max);
  const GeneratorMatrix g = build_generator(spec, n_max);
  const double resid = check_balance(pi, g);
  add(res, "interior_balance", resid <= par.balance_tol, resid, par.balance_tol);
  const double mass = std::accumulate(pi.weights.begin(), pi.weights.end(), 0.0) + pi.tail_mass;
  add(res, "total_mass", std::abs(mass - 1.0) <= 1e-10, std::abs(mass - 1.0), 1e-10);
  const double xi_rel = std::abs(law.xi() - law.xi_series()) / law.xi();
  add(res, "xi_forms_agree", xi_rel <= 1e-8, xi_rel, 1e-8);

  csv = Csv({"n", "state", "z", "lambda", "mu", "pi"});
  for (int n = 0; n <= n_max; ++n)
    for (int i = 0; i < spec.size(); ++i) {
      const Rates r = spec.rates_at(i);
      csv.row({I(n), I(i), D(spec.states[i]), D(r.lambda), D(r.mu), D(pi.at(n, i))});
    }
  res.report["validation"] = checks;
  res.report["results"] = {{"xi", law.xi()},           {"xi_series", law.xi_series()}, {"rho_bar", law.rho_bar()},
                           {"tail_mass", pi.tail_mass}, {"tail_mass_bound", pi.tail_mass_bound},
                           {"balance_residual", resid}};
}

// Law masses on (n, z1-bin) for a 2-D polygon with zero drift and identity
// covariance, where the level-0 environment law is uniform.
OccupationMatrix polygon_law_grid(const DiffusionEnvSpec& spec, int n_cap, int bins) {
  for (int i = 0; i < 2; ++i) {
    if (spec.drift[i].kind != ScalarField::Kind::constant || spec.drift[i].c0 != 0.0)
      throw SpecError("$.spec: 2-D closed form needs zero drift");
    for (int k = 0; k < 2; ++k)
      if (spec.sigma[i][k].kind != ScalarField::Kind::constant || spec.sigma[i][k].c0 != (i == k ? 1.0 : 0.0))
        throw SpecError("$.spec: 2-D closed form needs identity covariance");
  }
  if (spec.jump) throw SpecError("$.spec: closed form is unavailable with jumps");
  const auto& d = spec.domain;
  auto z2_range = [&](double z1) {
    double lo = -1e300, hi = 1e300;
    for (const auto& f : d.faces) {
      if (std::abs(f.normal[1]) < 1e-15) continue;
      const double b = (f.offset - f.normal[0] * z1) / f.normal[1];
      if (f.normal[1] > 0) lo = std::max(lo, b);
      else hi = std::min(hi, b);
    }
    return std::pair{lo, hi};
  };
  auto rho = [&](double z1, double z2) { return eval_rates(spec, Vec2{z1, z2}).rho; };
  // inner(z1, n): integral over z2 of rho^n; n < 0 means rho^{n_cap+1}/(1-rho).
  auto inner = [&](double z1, int n) {
    auto [lo, hi] = z2_range(z1);
    if (!(hi > lo)) return 0.0;
    return integrate(
        [&](double z2) {
          const double r = rho(z1, z2);
          return n >= 0 ? std::pow(r, n) : std::pow(r, n_cap + 1) / (1.0 - r);
        },
        lo, hi, 1e-9);
  };
  const double a = d.coord0_lo(), b = d.coord0_hi();
  const double xi = integrate(
      [&](double z1) {
        auto [lo, hi] = z2_range(z1);
        if (!(hi > lo)) return 0.0;
        return integrate([&](double z2) { return 1.0 / (1.0 - rho(z1, z2)); }, lo, hi, 1e-9);
      },
      a, b, 1e-9);
  OccupationMatrix m;
  m.n_cap = n_cap;
  m.bins = bins;
  m.lo = a;
  m.hi = b;
  m.total_time = 1.0;
  m.frac.assign(static_cast<std::size_t>((n_cap + 2) * bins), 0.0);
  m.off_support.assign(static_cast<std::size_t>(n_cap + 2), 0.0);
  for (int k = 0; k < bins; ++k)
    for (int n = -1; n <= n_cap; ++n) {
      const double v = integrate([&](double z1) { return inner(z1, n); }, m.bin_lo(k), m.bin_hi(k), 1e-9) / xi;
      m.at(n >= 0 ? n : n_cap + 1, k) = v;
    }
  return m;
}

void run_stationary_diffusive(const ExperimentConfig& cfg, ExperimentResult& res, Csv& csv) {
  const auto& spec = cfg.env->c;
  const auto& par = std::get<StationaryDiffusiveParams>(cfg.params);
  const ValidationReport vr = validate_spec(spec);
  add(res, "spec_structurally_valid", structurally_valid(vr), 0.0, 0.0);
  if (!structurally_valid(vr)) return;

  JointState x0;
  x0.n = par.n0;
  if (!par.z0.empty()) {
    x0.z = {par.z0[0], par.z0.size() > 1 ? par.z0[1] : 0.0};
  } else {
    x0.z = {spec.domain.coord0_lo(), 0.0};
  }
  if (!spec.domain.contains(x0.z)) throw SpecError("$.params.z0: start point lies outside the domain");

  const JointPath path =
      simulate_replicas(spec, x0, joint_params(cfg.run), cfg.run.seed, cfg.run.replicas, cfg.run.threads);
  SummaryOptions so;
  so.burn_in = cfg.run.burn_in;
  const OccupationMatrix occ = occupation_summary(path, so);

  OccupationMatrix ref;
  json results;
  if (spec.dim() == 1) {
    const StationaryLaw law = StationaryLaw::diffusive(spec);
    ref = law_grid(law, occ.n_cap, occ.bins, occ.lo, occ.hi);
    const ComparisonReport cmp = compare_empirical(law, occ);
    results["xi"] = law.xi();
    results["rho_bar"] = law.rho_bar();
    json slopes = json::array();
    double worst = 0.0;
    for (const auto& s : cmp.slopes) {
      slopes.push_back({{"bin", s.bin},
                        {"z", s.z_center},
                        {"fitted", s.fitted_slope},
                        {"expected", s.expected_slope},
                        {"layers", s.layers}});
      worst = std::max(worst, std::abs(s.fitted_slope - s.expected_slope));
    }
    results["slopes"] = slopes;
    if (par.check_slopes) {
      add(res, "layer_slopes", !cmp.slopes.empty() && worst <= par.slope_tol, worst, par.slope_tol,
          std::to_string(cmp.slopes.size()) + " bins fitted");
    }
  } else {
    ref = polygon_law_grid(spec, occ.n_cap, occ.bins);
  }
  const double tv = tv_distance(occ.frac, ref.frac);
  add(res, "global_tv", tv <= par.tv_tol, tv, par.tv_tol);

  const BoundaryEstimate be = boundary_measure_estimate(path, cfg.run.burn_in);
  json bj = json::array();
  for (int n = 0; n <= be.n_cap + 1; ++n)
    for (int f = 0; f < be.faces; ++f)
      bj.push_back({{"n", n}, {"face", f}, {"raw_rate", be.raw(n, f)}, {"intrinsic_rate", be.intrinsic(n, f)}});
  results["boundary"] = bj;
  if (par.check_boundary) add(res, "boundary_contact", be.contact, be.contact ? 1.0 : 0.0, 1.0);

  csv = Csv({"n", "bin", "z_lo", "z_hi", "empirical", "law"});
  for (int n = 0; n <= occ.n_cap + 1; ++n)
    for (int b = 0; b < occ.bins; ++b)
      csv.row({I(n), I(b), D(occ.bin_lo(b)), D(occ.bin_hi(b)), D(occ.at(n, b)), D(ref.at(n, b))});

  results["global_tv"] = tv;
  results["steps"] = path.steps;
  results["queue_events"] = path.queue_events;
  results["max_n"] = path.max_n;
  results["domain"] = spec.domain.describe();
  res.report["results"] = results;
}

void run_stationary_threshold(const ExperimentConfig& cfg, ExperimentResult& res, Csv& csv) {
  const auto& spec = cfg.env->c;
  const auto& par = std::get<StationaryThresholdParams>(cfg.params);
  const ValidationReport vr = validate_spec(spec);
  add(res, "spec_structurally_valid", structurally_valid(vr), 0.0, 0.0);
  if (!structurally_valid(vr)) return;

  const StationaryDensity1D nu = stationary_density_1d(spec);
  const LayerSeriesCheck ls = layer_series_check(nu, spec.rates, spec.threshold);
  json results;
  results["layer_series"] = {{"finite", ls.finite}, {"value", ls.value}, {"detail", ls.detail}};
  add(res, "layer_series_finite", ls.finite, ls.value, 0.0, ls.detail);
  if (!ls.finite) {
    res.report["results"] = results;
    return;
  }
  const StationaryLaw law = StationaryLaw::diffusive(nu, spec.rates, spec.threshold);

  JointState x0;
  x0.n = par.n0;
  x0.z = {par.z0 ? *par.z0 : spec.threshold->at(par.n0).first, 0.0};
  if (!spec.domain.contains(x0.z)) throw SpecError("$.params.z0: start point lies outside the domain");

  const JointPath path =
      simulate_replicas(spec, x0, joint_params(cfg.run), cfg.run.seed, cfg.run.replicas, cfg.run.threads);
  SummaryOptions so;
  so.burn_in = cfg.run.burn_in;
  const OccupationMatrix occ = occupation_summary(path, so);
  const ComparisonReport cmp = compare_empirical(law, occ);
  const OccupationMatrix ref = law_grid(law, occ.n_cap, occ.bins, occ.lo, occ.hi);

  const int up_to = std::min(par.max_layer, occ.n_cap);
  const double worst = cmp.max_layer_tv(up_to);
  add(res, "layer_conditional_tv", worst <= par.layer_tv_tol, worst, par.layer_tv_tol,
      "layers 0.." + std::to_string(up_to));
  add(res, "frozen_displacement", path.frozen_displacement == 0.0, path.frozen_displacement, 0.0,
      "time frozen " + fmt_num(path.frozen_time));

  json layers = json::array();
  for (const auto& l : cmp.layers)
    layers.push_back({{"n", l.n},
                      {"empirical_mass", l.empirical_mass},
                      {"law_mass", l.law_mass},
                      {"conditional_tv", l.conditional_tv},
                      {"off_support_mass", l.off_support_mass}});
  results["layers"] = layers;
  results["xi"] = law.xi();
  results["frozen_time"] = path.frozen_time;
  results["steps"] = path.steps;

  csv = Csv({"n", "bin", "z_lo", "z_hi", "empirical", "law", "off_support"});
  for (int n = 0; n <= occ.n_cap + 1; ++n)
    for (int b = 0; b < occ.bins; ++b)
      csv.row({I(n), I(b), D(occ.bin_lo(b)), D(occ.bin_hi(b)), D(occ.at(n, b)), D(ref.at(n, b)),
               D(occ.off_support[n])});
  res.report["results"] = results;
}

json certificate_json(const RateCertificate& c) {
  return json{{"alpha", c.alpha},         {"gamma", c.gamma},   {"lambda_bar", c.lambda_bar},
              {"mu_bar", c.mu_bar},       {"c", c.c},           {"epsilon", c.epsilon},
              {"m_c", c.m_c},             {"kappa", c.kappa},   {"kappa_c", c.kappa_c},
              {"p", c.p},                 {"q", c.q},           {"margin", c.margin},
              {"C_star", c.C_star},       {"C", c.C},           {"c_star", c.c_star},
              {"m_star", c.m_star},       {"grid_feasible_cells", c.grid_feasible_cells},
              {"refinement_steps", c.refinement_steps}};
}

void run_rate_certificate(const ExperimentConfig& cfg, ExperimentResult& res, Csv& csv) {
  const auto& par = std::get<RateCertificateParams>(cfg.params);
  const RateCertificate cert = par.c ? make_certificate(*par.c, *par.epsilon, par.alpha, par.gamma, par.lambda_bar,
                                                        par.mu_bar)
                                     : optimize_rate(par.alpha, par.gamma, par.lambda_bar, par.mu_bar);
  add(res, "kappa_positive", cert.kappa > 0.0, cert.kappa, 0.0);
  add(res, "feasible", cert.margin > 0.0, cert.margin, 0.0);
  add(res, "C_star_at_least_one", cert.C_star >= 1.0, cert.C_star, 1.0);
  add(res, "kappa_below_m_star", cert.kappa <= cert.m_star * (1.0 + 1e-12), cert.kappa, cert.m_star);
  csv = Csv({"quantity", "value"});
  const json cj = certificate_json(cert);
  for (auto it = cj.begin(); it != cj.end(); ++it) csv.row({it.key(), D(it.value().get<double>())});
  res.report["results"] = {{"certificate", cj}};
}

void run_coupling_harness(const ExperimentConfig& cfg, ExperimentResult& res, Csv& csv) {
  const auto& par = std::get<CouplingHarnessParams>(cfg.params);
  const EnvSection& env = *cfg.env;
  const double lb = env.discrete ? env.d.rates.lambda_bar : env.c.rates.lambda_bar;
  const double mb = env.discrete ? env.d.rates.mu_bar : env.c.rates.mu_bar;
  if (!(mb > lb)) throw SpecError("$.spec: coupling harness needs mu_bar > lambda_bar");
  HarnessOptions ho;
  ho.horizon = cfg.run.horizon;
  ho.dt = cfg.run.dt;
  ho.h_cap = cfg.run.h_cap;

  double alpha = par.alpha, gamma = 0.0;
  json env_coupling;
  if (par.gamma) {
    gamma = *par.gamma;
  } else if (env.discrete) {
    const JumpCouplingSpec jc = best_jump_coupling(level0_rates(env.d));
    gamma = jc.gamma();
    env_coupling = {{"Lambda", jc.Lambda}, {"q", jc.q}};
  } else {
    const std::size_t n_fit = 2000;
    std::vector<double> taus(n_fit);
    parallel_for(n_fit, cfg.run.threads, [&](std::size_t k) {
      const Coupling1D c1 = couple_1d(env.c, par.z1, par.z2, cfg.run.horizon, cfg.run.dt,
                                      split_seed(cfg.run.seed ^ 0x5bd1e995ULL, k));
      taus[k] = c1.coupled ? c1.tau : cfg.run.horizon;
    });
    const CouplingFit fit = fit_coupling_constants(taus);
    alpha = std::max(alpha, fit.alpha);
    gamma = fit.gamma;
    env_coupling = {{"fit_alpha", fit.alpha}, {"fit_gamma", fit.gamma}, {"r_squared", fit.r_squared}};
  }
  const double p = success_prob(alpha, gamma, lb);
  const double m = m_func(par.c, lb, mb);
  const int n_top = std::max(par.n1, par.n2);
  const double mgf_bound = std::pow(par.c, n_top);

  const std::size_t S = static_cast<std::size_t>(par.samples);
  std::vector<CouplingTrace> tr(S);
  parallel_for(S, cfg.run.threads, [&](std::size_t k) {
    const std::uint64_t s = split_seed(cfg.run.seed, k);
    tr[k] = env.discrete ? couple_joint(env.d, par.n1, static_cast<int>(par.z1), par.n2, static_cast<int>(par.z2), s, ho)
                         : couple_joint(env.c, par.n1, par.z1, par.n2, par.z2, s, ho);
  });

  double s1 = 0.0, s2 = 0.0;
  std::size_t uncoupled = 0;
  for (const auto& t : tr) {
    const double e = std::exp(m * t.tau0);
    s1 += e;
    s2 += e * e;
    if (!t.coupled) ++uncoupled;
  }
  const double mean = s1 / S;
  const double se = std::sqrt(std::max(0.0, s2 / S - mean * mean) / S);
  add(res, "tau0_mgf", mean <= mgf_bound + 3.0 * se, mean, mgf_bound, "se " + fmt_num(se));

  const double eps = dkw_epsilon(S);
  double worst = -1.0;
  json jtail = json::array();
  for (int k = 1; k <= par.k_max; ++k) {
    std::size_t ge = 0;
    for (const auto& t : tr)
      if (t.J >= k || !t.coupled) ++ge;
    const double emp = static_cast<double>(ge) / S;
    const double geo = std::pow(1.0 - p, k);
    worst = std::max(worst, emp - geo - eps);
    jtail.push_back({{"k", k}, {"empirical", emp}, {"geometric", geo}});
  }
  add(res, "retry_geometric_dominance", worst <= 0.0, worst, 0.0, "DKW eps " + fmt_num(eps));
  add(res, "all_coupled", uncoupled == 0, static_cast<double>(uncoupled), 0.0);

  csv = Csv({"sample", "tau0", "J", "tau", "coupled"});
  for (std::size_t k = 0; k < S; ++k)
    csv.row({I(static_cast<long long>(k)), D(tr[k].tau0), I(tr[k].J), D(tr[k].tau), I(tr[k].coupled ? 1 : 0)});
  res.report["results"] = {{"alpha", alpha},     {"gamma", gamma},        {"p", p},
                           {"m_c", m},           {"mgf_mean", mean},      {"mgf_se", se},
                           {"mgf_bound", mgf_bound}, {"retry_tail", jtail}, {"environment_coupling", env_coupling}};
}

void run_tv_decay(const ExperimentConfig& cfg, ExperimentResult& res, Csv& csv) {
  const auto& par = std::get<TvDecayParams>(cfg.params);
  const auto& spec = cfg.env->d;
  const JumpCouplingSpec jc = best_jump_coupling(level0_rates(spec));
  const RateCertificate cert = optimize_rate(par.alpha, jc.gamma(), spec.rates.lambda_bar, spec.rates.mu_bar);
  csv = Csv({"n0", "t", "tv", "bound"});
  json reps = json::array();
  for (int n0 : par.n0) {
    const TvDecayReport r = tv_decay_check(spec, cert, n0, par.z0, par.t_grid, cfg.run.n_max);
    double worst = -1e300;
    for (const auto& pt : r.points) {
      csv.row({I(n0), D(pt.t), D(pt.tv), D(pt.bound)});
      worst = std::max(worst, pt.tv - pt.bound);
    }
    add(res, "tv_bound_n0_" + std::to_string(n0), r.all_hold, worst, 0.0);
    add(res, "decay_rate_n0_" + std::to_string(n0), r.fitted_rate >= cert.kappa, r.fitted_rate, cert.kappa);
    reps.push_back({{"n0", n0}, {"fitted_rate", r.fitted_rate}, {"truncation_tail", r.truncation_tail}});
  }
  res.report["results"] = {{"certificate", certificate_json(cert)},
                           {"Lambda", jc.Lambda},
                           {"q", jc.q},
                           {"decay", reps}};
}

void run_mgf_lemma(const ExperimentConfig& cfg, ExperimentResult& res, Csv& csv) {
  const auto& par = std::get<MgfLemmaParams>(cfg.params);
  EtaSampler eta;
  if (par.eta_kind == "exponential") {
    const double r = par.eta_value;
    eta = [r](Rng& g) { return g.exponential(r); };
  } else {
    const double v = par.eta_value;
    eta = [v](Rng&) { return v; };
  }
  const MgfCheckReport r =
      mgf_min_check(par.alpha, par.beta, par.gamma, par.a, static_cast<std::size_t>(par.samples), cfg.run.seed, eta);
  add(res, "mgf_below_theta", r.mgf_ok, r.mgf_empirical, r.theta, "se " + fmt_num(r.mgf_se));
  add(res, "success_probability", r.prob_ok, r.prob_empirical, r.prob_bound, "se " + fmt_num(r.prob_se));
  csv = Csv({"quantity", "empirical", "se", "bound"});
  csv.row({"mgf_min", D(r.mgf_empirical), D(r.mgf_se), D(r.theta)});
  csv.row({"prob_eta_first", D(r.prob_empirical), D(r.prob_se), D(r.prob_bound)});
  res.report["results"] = {{"samples", r.samples},
                           {"mgf_empirical", r.mgf_empirical},
                           {"theta", r.theta},
                           {"prob_empirical", r.prob_empirical},
                           {"prob_bound", r.prob_bound},
                           {"tail_max_excess", r.tail_max_excess},
                           {"dkw_eps", r.dkw_eps}};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("write failed for " + p.string());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  Csv csv({"empty"});
  const std::string& k = cfg.kind;
  if (k == "stationary-discrete") run_stationary_discrete(cfg, res, csv);
  else if (k == "stationary-diffusive") run_stationary_diffusive(cfg, res, csv);
  else if (k == "stationary-threshold") run_stationary_threshold(cfg, res, csv);
  else if (k == "rate-certificate") run_rate_certificate(cfg, res, csv);
  else if (k == "coupling-harness") run_coupling_harness(cfg, res, csv);
  else if (k == "tv-decay") run_tv_decay(cfg, res, csv);
  else if (k == "mgf-lemma") run_mgf_lemma(cfg, res, csv);
  else throw SpecError("$.kind: unknown experiment kind '" + k + "'");

  res.report["kind"] = k;
  res.report["config_hash"] = cfg.hash;
  res.report["version"] = ENVQ_VERSION;
  res.report["config"] = cfg.canonical;
  if (cfg.env) res.report["spec_label"] = cfg.env->label;
  json asr = json::array();
  for (const auto& a : res.assertions) asr.push_back(assertion_json(a));
  res.report["assertions"] = asr;
  res.report["passed"] = res.passed();

  const std::filesystem::path dir(cfg.output);
  std::filesystem::create_directories(dir);
  const std::string stem = k + "-" + cfg.hash;
  const auto csv_path = dir / (stem + ".csv");
  const auto json_path = dir / (stem + ".json");
  write_file(csv_path, "# config_hash=" + cfg.hash + " version=" + ENVQ_VERSION + "\n" + csv.text());
  write_file(json_path, res.report.dump(2) + "\n");
  res.files = {csv_path.string(), json_path.string()};
  return res;
}

}  // namespace envq
