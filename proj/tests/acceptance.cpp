// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "envq/builtins.hpp"
#include "envq/config.hpp"
#include "envq/discrete_chain.hpp"
#include "envq/experiment.hpp"
#include "envq/rates_coupling.hpp"
#include "envq/reflected_sde.hpp"
#include "envq/rng.hpp"
#include "envq/stationary.hpp"
#include "oracles.hpp"

using namespace envq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (cond ? "" : " [fail]");
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

const fs::path& out_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "envq_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

ExperimentResult run_doc(const std::string& doc, const std::string& sub) {
  Overrides ov;
  ov.out = (out_root() / sub).string();
  return run_experiment(parse_config(json::parse(doc), ov));
}

const Assertion* find(const ExperimentResult& r, const std::string& name) {
  for (const auto& a : r.assertions)
    if (a.name == name) return &a;
  return nullptr;
}

void require_all(Outcome& o, const ExperimentResult& r) {
  for (const auto& a : r.assertions) o.require(a.passed, a.name + "=" + num(a.value) + " vs " + num(a.bound));
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

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

Outcome discrete_invariant() {
  Outcome o;
  std::vector<std::pair<std::string, DiscreteEnvSpec>> specs;
  specs.emplace_back("two-state", example_env_two_state(TwoStateParams{}));
  specs.emplace_back("ex2.1 [5,4,3]", example_env_ex21(ex21({5, 4, 3})));
  specs.emplace_back("ex2.1 [5,3,4,2] L={1,3}", example_env_ex21(ex21({5, 3, 4, 2}, {1, 3})));
  specs.emplace_back("ex2.1 [5,2] uniform", example_env_ex21(ex21({5, 2}, {}, true)));
  for (const auto& [name, s] : specs) {
    const DiscretePi pi = invariant_measure_discrete(s, 40);
    const GeneratorMatrix g = build_generator(s, 40);
    const double gap = max_entry_gap(pi, oracle::gth(oracle::dense(g)));
    const double bal = check_balance(pi, g);
    o.require(gap <= 1e-8 && bal <= 1e-10, name + " entry " + num(gap) + " balance " + num(bal));
  }
  const double xi = xi_constant(specs.front().second);
  o.require(std::abs(xi - 3.25) <= 1e-12, "two-state Xi " + num(xi));
  return o;
}

Outcome ergodicity() {
  Outcome o;
  // untempered rates reach 5^40 at the top level; beta_n = 0.2^n keeps the generator well conditioned
  TwoStateParams p;
  p.beta = BetaSeq::geometric(0.2);
  const GeneratorMatrix g = build_generator(example_env_two_state(p), 40);
  const Eigen::MatrixXd Q = oracle::dense(g);
  const std::vector<double> pi = oracle::gth(Q);
  const double gap = oracle::spectral_gap(Q);
  const double t = 50.0 / gap;
  for (int x0 : {g.index(0, 0), g.index(10, 1), g.index(40, 0)}) {
    const double tv = oracle::half_l1(transient_law(g, x0, t), pi);
    o.require(tv <= 1e-6, "start " + std::to_string(x0) + " TV " + num(tv));
  }
  o.detail += "; gap " + num(gap) + " t " + num(t);
  return o;
}

Outcome diffusive_stationarity() {
  Outcome o;
  const ExperimentResult r = run_doc(R"({
    "kind": "stationary-diffusive",
    "spec": {"builtin": "case-a-rbm-arrival"},
    "run": {"horizon": 10000, "dt": 0.001, "replicas": 8, "n_cap": 12, "bins": 30, "seed": 7},
    "params": {"tv_tol": 0.05}})",
                                     "c3");
  const Assertion* a = find(r, "global_tv");
  o.require(a && a->passed, "global TV " + num(a ? a->value : NAN) + " (8 x 1e7 steps)");
  return o;
}

Outcome threshold_variant() {
  Outcome o;
  const char* docs[] = {
      R"({"kind": "stationary-threshold", "spec": {"builtin": "ex3.2-threshold"},
          "run": {"horizon": 10000, "dt": 0.001, "replicas": 8, "n_cap": 12, "bins": 20, "seed": 5},
          "params": {"layer_tv_tol": 0.05, "max_layer": 10}})",
      R"({"kind": "stationary-threshold", "spec": {"builtin": "ex3.1-threshold"},
          "run": {"horizon": 10000, "dt": 0.001, "replicas": 8, "n_cap": 12, "bins": 20, "seed": 6},
          "params": {"layer_tv_tol": 0.05, "max_layer": 10}})"};
  const char* names[] = {"ex3.2", "ex3.1"};
  for (int k = 0; k < 2; ++k) {
    const ExperimentResult r = run_doc(docs[k], "c4");
    const Assertion* tv = find(r, "layer_conditional_tv");
    const Assertion* fd = find(r, "frozen_displacement");
    o.require(tv && tv->passed, std::string(names[k]) + " max layer TV " + num(tv ? tv->value : NAN));
    o.require(fd && fd->value == 0.0, std::string(names[k]) + " frozen displacement " + num(fd ? fd->value : NAN));
  }
  return o;
}

Outcome density_formula() {
  Outcome o;
  const DiffusionEnvSpec s = make_diffusive_builtin("ex3.1-theta-drift", json::object(), "$.spec");
  const double lo = 0.0, hi = 0.95, dt = 1e-3;
  const int bins = 30;
  const long steps = 30000000, burn = 100000;
  SdeState st = make_state(s, {0.5, 0.0});
  Rng rng(split_seed(2718, 0));
  std::vector<double> hist(bins, 0.0);
  for (long k = 0; k < steps + burn; ++k) {
    advance_reflected(s, st, dt, 1.0, {rng.normal(), 0.0});
    if (k < burn) continue;
    const int b = std::clamp(static_cast<int>((st.z[0] - lo) / (hi - lo) * bins), 0, bins - 1);
    hist[b] += 1.0;
  }
  // bin masses of 2 (1 - z)^{-1/2} in closed form
  const double norm = 4.0 * (std::sqrt(1.0 - lo) - std::sqrt(1.0 - hi));
  std::vector<double> ref(bins), emp(bins);
  for (int b = 0; b < bins; ++b) {
    const double a = lo + (hi - lo) * b / bins, c = lo + (hi - lo) * (b + 1) / bins;
    ref[b] = 4.0 * (std::sqrt(1.0 - a) - std::sqrt(1.0 - c)) / norm;
    emp[b] = hist[b] / steps;
  }
  const double tv = tv_distance(emp, ref);
  o.require(tv <= 0.03, "histogram TV " + num(tv) + " (3e7 steps, 30 bins)");
  return o;
}

Outcome rate_functions() {
  Outcome o;
  const double lb = 1.0, mb = 4.0;
  o.require(m_func(1.0, lb, mb) == 0.0, "m(1) = " + num(m_func(1.0, lb, mb)));
  const double ms = m_func(c_star(lb, mb), lb, mb), exact = std::pow(std::sqrt(mb) - std::sqrt(lb), 2);
  o.require(std::abs(ms - exact) <= 1e-12, "m(c*) error " + num(std::abs(ms - exact)));
  Rng rng(split_seed(6, 0));
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double al = 1.0 + 4.0 * rng.uniform(), be = 0.05 + 5.0 * rng.uniform(), ga = 0.05 + 5.0 * rng.uniform();
    worst = std::max(worst, std::abs(theta_func(al, be, ga, 0.0) - 1.0));
  }
  o.require(worst <= 1e-12, "theta(.,0) max error " + num(worst));
  // continuity: agreement with the integral form on a dense window across a = beta and a = gamma
  double jump = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double al = 1.0 + 4.0 * rng.uniform(), be = 0.05 + 5.0 * rng.uniform(), ga = 0.05 + 5.0 * rng.uniform();
    for (double at : {be, ga}) {
      std::vector<double> pts{at};
      for (double h : {1e-12, 1e-10, 1e-8, 1e-7}) pts.insert(pts.end(), {at - h, at + h});
      for (int j = -60; j <= 60; ++j) pts.push_back(at + j * 5e-5 * std::max(1.0, at));
      for (double u : pts) {
        if (!(u >= 0.0 && u < be + ga)) continue;
        const double ref = oracle::theta_integral(al, be, ga, u);
        jump = std::max(jump, std::abs(theta_func(al, be, ga, u) - ref) / std::max(1.0, ref));
      }
    }
  }
  o.require(jump <= 1e-6, "theta vs integral near a in {beta, gamma}, max rel error " + num(jump));
  return o;
}

Outcome mgf_lemma() {
  Outcome o;
  const double alpha = 1.5, beta = 1.0, gamma = 1.0, a = 0.5;
  // min of Exp(1) and Exp(1) is Exp(2): E e^{a min} = 2 / (2 - a)
  const double mgf_exact = 2.0 / (2.0 - a), prob_exact = gamma / (beta + gamma);
  const double theta = theta_func(alpha, beta, gamma, a);
  o.require(std::abs(mgf_exact - 4.0 / 3.0) < 1e-15 && mgf_exact <= theta,
            "exact 4/3 <= theta " + num(theta));
  const double pb = success_prob(alpha, gamma, beta);
  o.require(prob_exact >= pb, "exact 0.5 >= " + num(pb));
  const MgfCheckReport r = mgf_min_check(alpha, beta, gamma, a, 100000, split_seed(17, 0),
                                         [gamma](Rng& g) { return g.exponential(gamma); });
  o.require(std::abs(r.mgf_empirical - mgf_exact) <= 3.0 * r.mgf_se,
            "MC mgf " + num(r.mgf_empirical) + " se " + num(r.mgf_se));
  o.require(std::abs(r.prob_empirical - prob_exact) <= 3.0 * r.prob_se,
            "MC prob " + num(r.prob_empirical) + " se " + num(r.prob_se));
  o.require(r.mgf_ok && r.prob_ok && r.tail_ok, "lemma checks");
  return o;
}

Outcome maximal_coupling() {
  Outcome o;
  const std::vector<std::vector<double>> rates{{0.0, 1.0}, {1.0, 0.0}};
  for (double Lambda : {2.0, 4.0 / 3.0}) {
    const JumpCouplingSpec s = make_jump_coupling(rates, Lambda);
    const int N = 10000;
    std::vector<double> tau(N);
    for (int k = 0; k < N; ++k) tau[k] = maximal_coupling_jump(s, 0, 1, split_seed(8, k)).tau;
    std::sort(tau.begin(), tau.end());
    const double eps = dkw_epsilon(N), rate = (1.0 - s.q) * Lambda;
    double worst = -1.0;
    for (int j = 1; j <= 20; ++j) {
      const double t = 3.0 * j / (20.0 * rate);
      const double surv = static_cast<double>(tau.end() - std::upper_bound(tau.begin(), tau.end(), t)) / N;
      worst = std::max(worst, surv - std::exp(-rate * t));
    }
    o.require(worst <= eps, "q=" + num(s.q) + " max excess " + num(worst) + " vs DKW " + num(eps));
  }
  return o;
}

Outcome coupling_harness() {
  Outcome o;
  const ExperimentResult r = run_doc(R"({
    "kind": "coupling-harness",
    "spec": {"builtin": "single-state", "params": {"lambda": 1, "mu": 4}},
    "run": {"seed": 3},
    "params": {"n1": 3, "n2": 0, "c": 1.2, "samples": 10000, "k_max": 10}})",
                                     "c9");
  require_all(o, r);
  o.require(find(r, "tau0_mgf") && find(r, "retry_geometric_dominance"), "assertions present");
  return o;
}

Outcome tv_decay() {
  Outcome o;
  const ExperimentResult r = run_doc(R"({
    "kind": "tv-decay",
    "spec": {"builtin": "two-state-rates"},
    "run": {"n_max": 60},
    "params": {"alpha": 1.0001, "n0": [0, 3, 6], "t_grid": [0.5, 1, 2, 4, 8]}})",
                                     "c10");
  for (const auto& a : r.assertions)
    if (a.name.rfind("tv_bound", 0) == 0) o.require(a.passed, a.name + " max(TV - bound) " + num(a.value));
  o.require(!r.assertions.empty(), "ran");
  return o;
}

Outcome robert_consistency() {
  Outcome o;
  const double lb = 1.0, mb = 4.0;
  const GeneratorMatrix g = build_generator(example_env_single(lb, mb), 80);
  std::vector<double> pi(81);
  for (int n = 0; n <= 80; ++n) pi[n] = 0.75 * std::pow(0.25, n);
  double worst = 0.0;
  for (int n : {0, 2, 5})
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      const double tv = oracle::half_l1(transient_law(g, g.index(n, 0), t), pi);
      const double b = robert_bound(n, lb, mb, t);
      worst = std::max(worst, tv / b);
      if (tv > b) o.require(false, "n=" + std::to_string(n) + " t=" + num(t) + " TV " + num(tv) + " > " + num(b));
    }
  o.require(worst <= 1.0, "max TV / bound " + num(worst));
  return o;
}

Outcome reproducibility() {
  Outcome o;
  const std::vector<std::string> docs = {
      R"({"kind": "stationary-discrete", "spec": {"builtin": "ex2.1-cyclic"}, "run": {"n_max": 30}})",
      R"({"kind": "coupling-harness", "spec": {"builtin": "two-state"}, "run": {"seed": 21},
          "params": {"n1": 3, "n2": 0, "c": 1.1, "samples": 2000}})",
      R"({"kind": "mgf-lemma", "run": {"seed": 4},
          "params": {"alpha": 1.5, "beta": 1, "gamma": 1, "a": 0.5, "samples": 20000}})",
      R"({"kind": "stationary-diffusive", "spec": {"builtin": "case-a-rbm-arrival"},
          "run": {"horizon": 200, "replicas": 3, "seed": 8}, "params": {"tv_tol": 1}})",
      R"({"kind": "rate-certificate", "params": {"alpha": 2, "gamma": 1, "lambda_bar": 1, "mu_bar": 4}})"};
  for (const auto& d : docs) {
    const ExperimentResult a = run_doc(d, "c12a");
    const ExperimentResult b = run_doc(d, "c12b");
    for (const auto& f : a.files) {
      if (fs::path(f).extension() != ".csv") continue;
      const fs::path other = out_root() / "c12b" / fs::path(f).filename();
      const bool same = fs::exists(other) && slurp(f) == slurp(other);
      o.require(same, fs::path(f).filename().string() + (same ? " identical" : " differs"));
    }
  }
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "discrete invariant measure", 5, discrete_invariant},
      {2, "uniformization convergence", 10, ergodicity},
      {3, "diffusive joint stationarity", 300, diffusive_stationarity},
      {4, "threshold variant", 300, threshold_variant},
      {5, "1-D stationary density", 120, density_formula},
      {6, "rate functions", 0, rate_functions},
      {7, "min-mgf lemma numerics", 10, mgf_lemma},
      {8, "maximal coupling survival", 30, maximal_coupling},
      {9, "coupling harness", 60, coupling_harness},
      {10, "certified TV decay", 120, tv_decay},
      {11, "classical M/M/1 bound", 30, robert_consistency},
      {12, "reproducibility", 0, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime " + num(secs) + " s < " + num(c.budget_s) + " s");
    else o.detail += "; runtime " + num(secs) + " s";
    if (!o.ok) ++failed;
    std::printf("%s [%d] %s: %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
