#include "envq/builtins.hpp"

#include <sstream>

#include "envq/discrete_chain.hpp"
#include "envq/errors.hpp"

namespace envq {

namespace {

std::vector<BuiltinInfo> make_catalog() {
  std::vector<BuiltinInfo> c;
  c.push_back({"two-state", true,
               "Two environment states with traffic intensities rho1, rho2 and switching rates tau12, tau21; "
               "invariant weights v = (1, tau12/tau21).",
               json{{"rho1", 0.2}, {"rho2", 0.5}, {"tau12", 1.0}, {"tau21", 1.0}, {"mu", 1.0}, {"beta", 1.0}}});
  c.push_back({"two-state-rates", true,
               "Two environment states with per-state arrival and service rates and symmetric switching; "
               "used for the end-to-end decay check.",
               json{{"lambda", {0.5, 1.0}},
                    {"mu", {4.0, 5.0}},
                    {"tau", 1.0},
                    {"lambda_bar", 1.0},
                    {"mu_bar", 4.0},
                    {"beta", json{{"kind", "geometric"}, {"base", 0.125}}}}});
  c.push_back({"single-state", true, "Trivial environment: a plain M/M/1 queue with rates (lambda, mu).",
               json{{"lambda", 1.0}, {"mu", 4.0}}});
  c.push_back({"ex2.1-cyclic", true,
               "Finite point set in (0,1) with lambda(z) = mu z; level n moves on its first m_n points by a "
               "nearest-neighbour walk with cyclic boundary.",
               json{{"points", {0.1, 0.3, 0.5, 0.7, 0.9}},
                    {"m_n", {5, 4, 3}},
                    {"uniform_levels", json::array()},
                    {"mu", 1.0},
                    {"beta", 1.0}}});
  c.push_back({"ex2.1-uniform", true,
               "Same point set; every level jumps uniformly among its first m_n points (doubly stochastic).",
               json{{"points", {0.1, 0.3, 0.5, 0.7, 0.9}}, {"m_n", {5, 4, 3}}, {"mu", 1.0}, {"beta", 1.0}}});
  c.push_back({"ex2.2-shift", true,
               "Shift chain z_i -> z_{i+n} at level n on a wraparound window [-W, W]; "
               "rho_i = 1 - (1 - rho0)/(1 + |i|)^power. The untruncated lattice has infinite Xi.",
               json{{"half_width", 20}, {"rho0", 0.5}, {"power", 1.0}, {"mu", 1.0}, {"beta", 1.0}}});
  c.push_back({"case-a-rbm-arrival", false,
               "Reflected Brownian motion on [lo, hi] driving the arrival rate lambda(z) = z with mu = 1.",
               json{{"lo", 0.0}, {"hi", 0.9}, {"drift", 0.0}, {"sigma2", 1.0}, {"beta", 1.0}}});
  c.push_back({"case-b-rbm-service", false,
               "Reflected diffusion on the ray [lo, inf), capped at cap, driving the service rate mu(z) = z "
               "with lambda = 1; constant drift toward lo.",
               json{{"lo", 2.0}, {"cap", 6.0}, {"drift", -0.5}, {"sigma2", 1.0}, {"beta", 1.0}}});
  c.push_back({"case-c-cone", false,
               "Two-dimensional reflected Brownian motion on the truncated sub-cone "
               "{0 <= z2 <= (1 - delta) z1, z_min <= z1 <= z_max}; lambda(z) = z2, mu(z) = z1.",
               json{{"delta", 0.5}, {"z_min", 1.0}, {"z_max", 1.8}, {"beta", 1.0}}});
  c.push_back({"ex3.1-theta-drift", false,
               "Arrival rate lambda(z) = z on [0, cap] with drift theta/(1 - z) and unit diffusion; the "
               "environment density is 2(1 - z)^(-2 theta). Optional threshold: D_n = [0, alpha_star] "
               "for n >= n0.",
               json{{"theta", 0.25}, {"cap", 0.95}, {"beta", 1.0}, {"alpha_star", nullptr}, {"n0", 3}}});
  c.push_back({"ex3.1-threshold", false,
               "Arrival rate lambda(z) = z driven by reflected Brownian motion on [0, 1] for n < n0; for "
               "n >= n0 it moves only in [0, alpha_star] and is frozen above.",
               json{{"alpha_star", 0.5}, {"n0", 3}, {"beta", 1.0}}});
  c.push_back({"ex3.2-threshold", false,
               "Service rate mu(z) = z driven by reflected Brownian motion on [1, alpha_star]; for n >= n0 "
               "it moves only in [alpha_n, alpha_star] and is frozen below alpha_n.",
               json{{"alpha_star", 2.0}, {"alpha_n", 1.5}, {"n0", 3}, {"beta", 1.0}}});
  return c;
}

// Merges params over defaults, rejecting keys absent from the defaults.
json merged(const BuiltinInfo& info, const json& params, const std::string& path) {
  json out = info.defaults;
  if (params.is_null()) return out;
  if (!params.is_object()) field_error(path, "must be an object");
  for (auto it = params.begin(); it != params.end(); ++it) {
    if (!out.contains(it.key())) field_error(path + "." + it.key(), "unknown parameter for builtin " + info.name);
    out[it.key()] = it.value();
  }
  return out;
}

const BuiltinInfo& require(const std::string& name, bool discrete, const std::string& path) {
  const BuiltinInfo* b = find_builtin(name);
  if (!b) field_error(path, "unknown builtin '" + name + "'");
  if (b->discrete != discrete) field_error(path, "builtin '" + name + "' is not of the requested type");
  return *b;
}

}  // namespace

const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> c = make_catalog();
  return c;
}

const BuiltinInfo* find_builtin(const std::string& name) {
  for (const auto& b : builtin_catalog())
    if (b.name == name) return &b;
  return nullptr;
}

DiscreteEnvSpec make_discrete_builtin(const std::string& name, const json& params, const std::string& path) {
  const BuiltinInfo& info = require(name, true, path);
  const json p = merged(info, params, path + ".params");
  Fields f(p, path + ".params");
  DiscreteEnvSpec s;
  if (name == "two-state") {
    TwoStateParams tp;
    tp.rho1 = f.num_in("rho1", {}, 0.0, 1.0, true, true);
    tp.rho2 = f.num_in("rho2", {}, 0.0, 1.0, true, true);
    tp.tau12 = f.num_in("tau12", {}, 0.0, 1e12, true);
    tp.tau21 = f.num_in("tau21", {}, 0.0, 1e12, true);
    tp.mu = f.num_in("mu", {}, 0.0, 1e12, true);
    tp.beta = parse_beta(f.sub("beta"), f.path("beta"));
    s = example_env_two_state(tp);
  } else if (name == "two-state-rates") {
    const auto lam = f.nums("lambda");
    const auto mu = f.nums("mu");
    if (lam.size() != 2 || mu.size() != 2) field_error(path + ".params", "lambda and mu need two entries");
    const double tau = f.num_in("tau", {}, 0.0, 1e12, true);
    s.name = name;
    s.states = {0.0, 1.0};
    s.v = {1.0, 1.0};
    s.rates.lambda = ScalarField::table({0.0, 1.0}, lam);
    s.rates.mu = ScalarField::table({0.0, 1.0}, mu);
    s.rates.lambda_bar = f.num_in("lambda_bar", {}, 0.0, 1e12, true);
    s.rates.mu_bar = f.num_in("mu_bar", {}, 0.0, 1e12, true);
    s.tau.kind = TauModel::Kind::matrix;
    s.tau.base = {{0.0, tau}, {tau, 0.0}};
    s.tau.beta = parse_beta(f.sub("beta"), f.path("beta"));
  } else if (name == "single-state") {
    const double lam = f.num_in("lambda", {}, 0.0, 1e12);
    const double mu = f.num_in("mu", {}, 0.0, 1e12, true);
    s = example_env_single(lam, mu);
  } else if (name == "ex2.1-cyclic" || name == "ex2.1-uniform") {
    Ex21Params ep;
    ep.points = f.nums("points");
    ep.m_n = f.ints("m_n");
    if (name == "ex2.1-cyclic") {
      ep.uniform_levels = f.ints("uniform_levels");
    } else {
      ep.all_uniform = true;
    }
    ep.mu = f.num_in("mu", {}, 0.0, 1e12, true);
    ep.beta = parse_beta(f.sub("beta"), f.path("beta"));
    s = example_env_ex21(ep);
  } else if (name == "ex2.2-shift") {
    Ex22Params ep;
    ep.half_width = static_cast<int>(f.integer("half_width", {}, 1, 100000));
    ep.rho0 = f.num_in("rho0", {}, 0.0, 1.0, true, true);
    ep.power = f.num_in("power", {}, 0.0, 100.0, true);
    ep.mu = f.num_in("mu", {}, 0.0, 1e12, true);
    ep.beta = parse_beta(f.sub("beta"), f.path("beta"));
    s = example_env_ex22(ep);
  }
  f.done();
  s.name = name;
  return s;
}

DiffusionEnvSpec make_diffusive_builtin(const std::string& name, const json& params, const std::string& path) {
  const BuiltinInfo& info = require(name, false, path);
  const json p = merged(info, params, path + ".params");
  Fields f(p, path + ".params");
  DiffusionEnvSpec s;
  s.name = name;
  if (name == "case-a-rbm-arrival") {
    const double lo = f.num_in("lo", {}, 0.0, 1.0);
    const double hi = f.num_in("hi", {}, 0.0, 1.0, true, true);
    if (!(hi > lo)) field_error(path + ".params.hi", "must exceed lo");
    s.domain = DomainSpec::interval(lo, hi);
    s.drift[0] = ScalarField::constant(f.num("drift"));
    s.sigma[0][0] = ScalarField::constant(f.num_in("sigma2", {}, 0.0, 1e6, true));
    s.rates.lambda = ScalarField::linear(1.0, 0.0);
    s.rates.mu = ScalarField::constant(1.0);
    s.rates.lambda_bar = hi;
    s.rates.mu_bar = 1.0;
  } else if (name == "case-b-rbm-service") {
    const double lo = f.num_in("lo", {}, 1.0, 1e6, true);
    const double cap = f.num("cap");
    if (!(cap > lo)) field_error(path + ".params.cap", "must exceed lo");
    s.domain = DomainSpec::ray(lo, cap);
    s.drift[0] = ScalarField::constant(f.num("drift"));
    s.sigma[0][0] = ScalarField::constant(f.num_in("sigma2", {}, 0.0, 1e6, true));
    s.rates.lambda = ScalarField::constant(1.0);
    s.rates.mu = ScalarField::linear(1.0, 0.0);
    s.rates.lambda_bar = 1.0;
    s.rates.mu_bar = lo;
  } else if (name == "case-c-cone") {
    const double delta = f.num_in("delta", {}, 0.0, 1.0, true, true);
    const double zmin = f.num_in("z_min", {}, 0.0, 1e6, true);
    const double zmax = f.num("z_max");
    if (!(zmax > zmin)) field_error(path + ".params.z_max", "must exceed z_min");
    s.domain = DomainSpec::cone(delta, zmin, zmax);
    s.rates.lambda = ScalarField::linear(1.0, 0.0, 1);
    s.rates.mu = ScalarField::linear(1.0, 0.0, 0);
    s.rates.lambda_bar = (1.0 - delta) * zmax;
    s.rates.mu_bar = zmin;
  } else if (name == "ex3.1-theta-drift") {
    const double theta = f.num_in("theta", {}, 0.0, 10.0, true);
    const double cap = f.num_in("cap", {}, 0.0, 1.0, true, true);
    s.domain = DomainSpec::interval(0.0, cap);
    s.drift[0] = ScalarField::pole(theta, 1.0);
    s.rates.lambda = ScalarField::linear(1.0, 0.0);
    s.rates.mu = ScalarField::constant(1.0);
    s.rates.lambda_bar = cap;
    s.rates.mu_bar = 1.0;
    const json& as = f.sub("alpha_star");
    const int n0 = static_cast<int>(f.integer("n0", {}, 1, 1000000));
    if (!as.is_null()) {
      if (!as.is_number()) field_error(path + ".params.alpha_star", "must be a number or null");
      const double a = as.get<double>();
      if (!(a > 0.0 && a < cap)) field_error(path + ".params.alpha_star", "must lie in (0, cap)");
      s.threshold = ThresholdDomains{{{0, 0.0, cap}, {n0, 0.0, a}}};
    }
  } else if (name == "ex3.1-threshold") {
    const double a = f.num_in("alpha_star", {}, 0.0, 1.0, true, true);
    const int n0 = static_cast<int>(f.integer("n0", {}, 1, 1000000));
    s.domain = DomainSpec::interval(0.0, 1.0);
    s.rates.lambda = ScalarField::linear(1.0, 0.0);
    s.rates.mu = ScalarField::constant(1.0);
    s.rates.lambda_bar = 1.0;
    s.rates.mu_bar = 1.0;
    s.threshold = ThresholdDomains{{{0, 0.0, 1.0}, {n0, 0.0, a}}};
  } else if (name == "ex3.2-threshold") {
    const double as = f.num_in("alpha_star", {}, 1.0, 1e6, true);
    const double an = f.num("alpha_n");
    if (!(an >= 1.0 && an < as)) field_error(path + ".params.alpha_n", "must lie in [1, alpha_star)");
    const int n0 = static_cast<int>(f.integer("n0", {}, 1, 1000000));
    s.domain = DomainSpec::interval(1.0, as);
    s.rates.lambda = ScalarField::constant(1.0);
    s.rates.mu = ScalarField::linear(1.0, 0.0);
    s.rates.lambda_bar = 1.0;
    s.rates.mu_bar = 1.0;
    s.threshold = ThresholdDomains{{{0, 1.0, as}, {n0, an, as}}};
  }
  s.beta = parse_beta(f.sub("beta"), f.path("beta"));
  f.done();
  return s;
}

std::string format_catalog() {
  std::ostringstream os;
  for (const auto& b : builtin_catalog()) {
    os << b.name << "  [" << (b.discrete ? "discrete" : "diffusive") << "]\n";
    os << "  " << b.summary << "\n";
    os << "  params: " << b.defaults.dump() << "\n";
  }
  return os.str();
}

}  // namespace envq
