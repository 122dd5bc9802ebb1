#include "envq/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "envq/builtins.hpp"
#include "envq/errors.hpp"

namespace envq {

void field_error(const std::string& path, const std::string& msg) { throw SpecError(path + ": " + msg); }

Fields::Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) field_error(path_, "must be an object");
}

bool Fields::has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

const json& Fields::get(const std::string& key) {
  used_.insert(key);
  return j_.at(key);
}

double Fields::num(const std::string& key, std::optional<double> def) {
  used_.insert(key);
  if (!j_.contains(key)) {
    if (!def) field_error(path(key), "required number is missing");
    return *def;
  }
  const json& v = j_.at(key);
  if (!v.is_number()) field_error(path(key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) field_error(path(key), "must be finite");
  return x;
}

double Fields::num_in(const std::string& key, std::optional<double> def, double lo, double hi, bool open_lo,
                      bool open_hi) {
  const double x = num(key, def);
  const bool ok_lo = open_lo ? x > lo : x >= lo;
  const bool ok_hi = open_hi ? x < hi : x <= hi;
  if (!ok_lo || !ok_hi) {
    std::ostringstream os;
    os << "value " << x << " outside " << (open_lo ? "(" : "[") << lo << ", " << hi << (open_hi ? ")" : "]");
    field_error(path(key), os.str());
  }
  return x;
}

long long Fields::integer(const std::string& key, std::optional<long long> def, long long lo, long long hi) {
  used_.insert(key);
  long long x = 0;
  if (!j_.contains(key)) {
    if (!def) field_error(path(key), "required integer is missing");
    x = *def;
  } else {
    const json& v = j_.at(key);
    if (v.is_number_integer()) {
      x = v.get<long long>();
    } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
               std::fabs(v.get<double>()) < 9e15) {
      x = static_cast<long long>(v.get<double>());
    } else {
      field_error(path(key), "must be an integer");
    }
  }
  if (x < lo || x > hi) {
    field_error(path(key), "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
  }
  return x;
}

std::uint64_t Fields::seed(const std::string& key, std::uint64_t def) {
  used_.insert(key);
  if (!j_.contains(key)) return def;
  const json& v = j_.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  field_error(path(key), "must be a non-negative integer");
}

bool Fields::flag(const std::string& key, bool def) {
  used_.insert(key);
  if (!j_.contains(key)) return def;
  const json& v = j_.at(key);
  if (!v.is_boolean()) field_error(path(key), "must be true or false");
  return v.get<bool>();
}

std::string Fields::str(const std::string& key, std::optional<std::string> def) {
  used_.insert(key);
  if (!j_.contains(key)) {
    if (!def) field_error(path(key), "required string is missing");
    return *def;
  }
  const json& v = j_.at(key);
  if (!v.is_string()) field_error(path(key), "must be a string");
  return v.get<std::string>();
}

std::vector<double> Fields::nums(const std::string& key, std::optional<std::vector<double>> def) {
  used_.insert(key);
  if (!j_.contains(key)) {
    if (!def) field_error(path(key), "required list is missing");
    return *def;
  }
  const json& v = j_.at(key);
  if (!v.is_array()) field_error(path(key), "must be a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) field_error(path(key) + "[" + std::to_string(i) + "]", "must be a number");
    out.push_back(v[i].get<double>());
    if (!std::isfinite(out.back())) field_error(path(key) + "[" + std::to_string(i) + "]", "must be finite");
  }
  return out;
}

std::vector<int> Fields::ints(const std::string& key, std::optional<std::vector<int>> def) {
  used_.insert(key);
  if (!j_.contains(key)) {
    if (!def) field_error(path(key), "required list is missing");
    return *def;
  }
  const json& v = j_.at(key);
  if (!v.is_array()) field_error(path(key), "must be a list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) field_error(path(key) + "[" + std::to_string(i) + "]", "must be an integer");
    out.push_back(v[i].get<int>());
  }
  return out;
}

std::vector<std::vector<double>> Fields::matrix(const std::string& key) {
  const json& v = get_or_missing(key);
  if (!v.is_array() || v.empty()) field_error(path(key), "must be a non-empty list of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string rp = path(key) + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != v.size()) field_error(rp, "must be a row of length " + std::to_string(v.size()));
    std::vector<double> row;
    for (const auto& x : v[i]) {
      if (!x.is_number() || x.get<double>() < 0.0) field_error(rp, "entries must be non-negative numbers");
      row.push_back(x.get<double>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

const json& Fields::get_or_missing(const std::string& key) {
  if (!j_.contains(key)) field_error(path(key), "required field is missing");
  return get(key);
}

const json& Fields::sub(const std::string& key) {
  static const json null_json;
  used_.insert(key);
  if (!j_.contains(key)) return null_json;
  return j_.at(key);
}

json Fields::sub_or_empty(const std::string& key) {
  used_.insert(key);
  if (!j_.contains(key) || j_.at(key).is_null()) return json::object();
  return j_.at(key);
}

void Fields::done() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!used_.count(it.key())) field_error(path(it.key()), "unknown key");
}

ScalarField parse_field(const json& j, const std::string& path) {
  if (j.is_number()) return ScalarField::constant(j.get<double>());
  Fields f(j, path);
  const std::string kind = f.str("kind");
  ScalarField out;
  if (kind == "constant") {
    out = ScalarField::constant(f.num("value"));
  } else if (kind == "linear") {
    const double slope = f.num("slope");
    const double icpt = f.num("intercept", 0.0);
    const int coord = static_cast<int>(f.integer("coord", 0, 0, 1));
    out = ScalarField::linear(slope, icpt, coord);
  } else if (kind == "table") {
    auto knots = f.nums("knots");
    auto values = f.nums("values");
    if (knots.size() < 2 || knots.size() != values.size())
      field_error(path, "table needs at least two knots and one value per knot");
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (!(knots[i] > knots[i - 1])) field_error(path + ".knots", "must be strictly increasing");
    const int coord = static_cast<int>(f.integer("coord", 0, 0, 1));
    out = ScalarField::table(std::move(knots), std::move(values), coord);
  } else if (kind == "pole") {
    const double theta = f.num("theta");
    const double at = f.num("at");
    const int coord = static_cast<int>(f.integer("coord", 0, 0, 1));
    out = ScalarField::pole(theta, at, coord);
  } else {
    field_error(path + ".kind", "unknown field kind '" + kind + "' (constant, linear, table, pole)");
  }
  f.done();
  return out;
}

BetaSeq parse_beta(const json& j, const std::string& path) {
  if (j.is_null()) return BetaSeq::constant(1.0);
  if (j.is_number()) {
    const double b = j.get<double>();
    if (!(b > 0.0) || !std::isfinite(b)) field_error(path, "must be positive");
    return BetaSeq::constant(b);
  }
  Fields f(j, path);
  const std::string kind = f.str("kind");
  BetaSeq out;
  if (kind == "constant") {
    out = BetaSeq::constant(f.num_in("value", {}, 0.0, 1e300, true));
  } else if (kind == "geometric") {
    const double base = f.num_in("base", {}, 0.0, 1e300, true);
    const double scale = f.num_in("scale", 1.0, 0.0, 1e300, true);
    out = BetaSeq::geometric(base, scale);
  } else if (kind == "table") {
    auto v = f.nums("values");
    if (v.empty()) field_error(path + ".values", "must not be empty");
    for (double x : v)
      if (!(x > 0.0)) field_error(path + ".values", "entries must be positive");
    out = BetaSeq::table(std::move(v));
  } else {
    field_error(path + ".kind", "unknown beta kind '" + kind + "' (constant, geometric, table)");
  }
  f.done();
  return out;
}

namespace {

DomainSpec parse_domain(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string kind = f.str("kind");
  DomainSpec d;
  if (kind == "interval") {
    const double lo = f.num("lo");
    const double hi = f.num("hi");
    if (!(hi > lo)) field_error(path + ".hi", "must exceed lo");
    d = DomainSpec::interval(lo, hi);
  } else if (kind == "ray") {
    const double lo = f.num("lo");
    const double cap = f.num("cap");
    if (!(cap > lo)) field_error(path + ".cap", "must exceed lo");
    d = DomainSpec::ray(lo, cap);
  } else if (kind == "cone") {
    const double delta = f.num_in("delta", {}, 0.0, 1.0, true, true);
    const double zmin = f.num_in("z_min", {}, 0.0, 1e300, true);
    const double zmax = f.num("z_max");
    if (!(zmax > zmin)) field_error(path + ".z_max", "must exceed z_min");
    d = DomainSpec::cone(delta, zmin, zmax);
  } else {
    field_error(path + ".kind", "unknown domain kind '" + kind + "' (interval, ray, cone)");
  }
  f.done();
  return d;
}

DiscreteEnvSpec parse_custom_discrete(Fields& f, const std::string& path) {
  DiscreteEnvSpec s;
  s.name = "custom";
  const auto lam = f.nums("lambda");
  const auto mu = f.nums("mu");
  const std::size_t m = lam.size();
  if (m == 0 || mu.size() != m) field_error(path + ".mu", "lambda and mu need the same non-zero length");
  s.states.resize(m);
  for (std::size_t i = 0; i < m; ++i) s.states[i] = static_cast<double>(i);
  s.v = f.nums("v", std::vector<double>(m, 1.0));
  if (s.v.size() != m) field_error(path + ".v", "needs one weight per state");
  for (double x : s.v)
    if (!(x > 0.0)) field_error(path + ".v", "weights must be positive");
  if (m == 1) {
    s.rates.lambda = ScalarField::constant(lam[0]);
    s.rates.mu = ScalarField::constant(mu[0]);
    s.tau.base = {{0.0}};
    f.sub("tau");
  } else {
    s.rates.lambda = ScalarField::table(s.states, lam);
    s.rates.mu = ScalarField::table(s.states, mu);
    s.tau.base = f.matrix("tau");
    if (s.tau.base.size() != m) field_error(path + ".tau", "must be " + std::to_string(m) + " x " + std::to_string(m));
  }
  s.tau.kind = TauModel::Kind::matrix;
  double lmax = 0.0, mmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    lmax = std::max(lmax, lam[i]);
    mmin = std::min(mmin, mu[i]);
  }
  s.rates.lambda_bar = f.num_in("lambda_bar", lmax, 0.0, 1e300);
  s.rates.mu_bar = f.num_in("mu_bar", mmin, 0.0, 1e300, true);
  s.tau.beta = parse_beta(f.sub("beta"), f.path("beta"));
  return s;
}

DiffusionEnvSpec parse_custom_diffusive(Fields& f, const std::string& path) {
  DiffusionEnvSpec s;
  s.name = "custom";
  s.domain = parse_domain(f.sub("domain"), f.path("domain"));
  const json& drift = f.sub("drift");
  if (drift.is_array()) {
    if (drift.size() != static_cast<std::size_t>(s.dim())) field_error(f.path("drift"), "needs one entry per coordinate");
    for (std::size_t i = 0; i < drift.size(); ++i)
      s.drift[i] = parse_field(drift[i], f.path("drift") + "[" + std::to_string(i) + "]");
  } else if (!drift.is_null()) {
    s.drift[0] = parse_field(drift, f.path("drift"));
  }
  const json& cov = f.sub("covariance");
  if (cov.is_array()) {
    if (cov.size() != 2 || !cov[0].is_array() || cov[0].size() != 2 || !cov[1].is_array() || cov[1].size() != 2)
      field_error(f.path("covariance"), "must be a 2 x 2 list of fields");
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        s.sigma[i][k] = parse_field(cov[i][k], f.path("covariance") + "[" + std::to_string(i) + "][" +
                                                   std::to_string(k) + "]");
  } else if (!cov.is_null()) {
    s.sigma[0][0] = parse_field(cov, f.path("covariance"));
  }
  s.ellipticity = f.num_in("ellipticity", 1e-6, 0.0, 1e300, true);
  const json& jump = f.sub("jump_rate");
  if (!jump.is_null()) s.jump = JumpSpec{parse_field(jump, f.path("jump_rate"))};
  s.rates.lambda = parse_field(f.sub("lambda"), f.path("lambda"));
  s.rates.mu = parse_field(f.sub("mu"), f.path("mu"));
  s.rates.lambda_bar = f.num_in("lambda_bar", {}, 0.0, 1e300);
  s.rates.mu_bar = f.num_in("mu_bar", {}, 0.0, 1e300, true);
  s.beta = parse_beta(f.sub("beta"), f.path("beta"));
  const json& th = f.sub("threshold");
  if (!th.is_null()) {
    if (s.dim() != 1) field_error(f.path("threshold"), "only one-dimensional domains support thresholds");
    if (!th.is_array() || th.empty()) field_error(f.path("threshold"), "must be a non-empty list of regimes");
    ThresholdDomains td;
    for (std::size_t i = 0; i < th.size(); ++i) {
      const std::string rp = f.path("threshold") + "[" + std::to_string(i) + "]";
      Fields r(th[i], rp);
      ThresholdDomains::Regime reg;
      reg.from_n = static_cast<int>(r.integer("from_n", {}, 0, 1000000000));
      reg.lo = r.num("lo");
      reg.hi = r.num("hi");
      r.done();
      if (!(reg.hi > reg.lo)) field_error(rp + ".hi", "must exceed lo");
      if (reg.lo < s.domain.lo || reg.hi > s.domain.hi) field_error(rp, "must lie inside the domain");
      if (i == 0 ? reg.from_n != 0 : reg.from_n <= td.regimes.back().from_n)
        field_error(rp + ".from_n", "regimes must start at 0 and increase");
      td.regimes.push_back(reg);
    }
    s.threshold = td;
  }
  (void)path;
  return s;
}

RunSection parse_run(const json& j, const std::string& path) {
  RunSection r;
  if (j.is_null()) return r;
  Fields f(j, path);
  r.n_max = static_cast<int>(f.integer("n_max", r.n_max, 1, 100000));
  r.horizon = f.num_in("horizon", r.horizon, 0.0, 1e12, true);
  r.dt = f.num_in("dt", r.dt, 0.0, 1.0, true);
  r.h_cap = f.num_in("h_cap", r.h_cap, 0.0, 1.0, true);
  r.seed = f.seed("seed", r.seed);
  r.replicas = static_cast<int>(f.integer("replicas", r.replicas, 1, 100000));
  r.threads = static_cast<int>(f.integer("threads", r.threads, 0, 4096));
  r.n_cap = static_cast<int>(f.integer("n_cap", r.n_cap, 0, 10000));
  r.bins = static_cast<int>(f.integer("bins", r.bins, 1, 100000));
  r.burn_in = f.num_in("burn_in", r.burn_in, 0.0, 0.9);
  r.chunks = static_cast<int>(f.integer("chunks", r.chunks, 2, 100000));
  f.done();
  return r;
}

KindParams parse_params(const std::string& kind, const json& j, const std::string& path) {
  const json obj = j.is_null() ? json::object() : j;
  Fields f(obj, path);
  KindParams out;
  if (kind == "stationary-discrete") {
    StationaryDiscreteParams p;
    p.balance_tol = f.num_in("balance_tol", p.balance_tol, 0.0, 1.0, true);
    out = p;
  } else if (kind == "stationary-diffusive") {
    StationaryDiffusiveParams p;
    p.z0 = f.nums("z0", std::vector<double>{});
    if (p.z0.size() > 2) field_error(f.path("z0"), "at most two coordinates");
    p.n0 = static_cast<int>(f.integer("n0", p.n0, 0, 1000000));
    p.tv_tol = f.num_in("tv_tol", p.tv_tol, 0.0, 1.0, true);
    p.slope_tol = f.num_in("slope_tol", p.slope_tol, 0.0, 100.0, true);
    p.check_slopes = f.flag("check_slopes", p.check_slopes);
    p.boundary_band = f.num_in("boundary_band", p.boundary_band, 0.0, 1.0, true);
    p.check_boundary = f.flag("check_boundary", p.check_boundary);
    out = p;
  } else if (kind == "stationary-threshold") {
    StationaryThresholdParams p;
    if (f.has("z0")) p.z0 = f.num("z0");
    else f.sub("z0");
    p.n0 = static_cast<int>(f.integer("n0", p.n0, 0, 1000000));
    p.layer_tv_tol = f.num_in("layer_tv_tol", p.layer_tv_tol, 0.0, 1.0, true);
    p.max_layer = static_cast<int>(f.integer("max_layer", p.max_layer, 0, 10000));
    out = p;
  } else if (kind == "rate-certificate") {
    RateCertificateParams p;
    p.alpha = f.num_in("alpha", p.alpha, 1.0, 1e300);
    p.gamma = f.num_in("gamma", p.gamma, 0.0, 1e300, true);
    p.lambda_bar = f.num_in("lambda_bar", p.lambda_bar, 0.0, 1e300, true);
    p.mu_bar = f.num_in("mu_bar", p.mu_bar, 0.0, 1e300, true);
    if (f.has("c")) p.c = f.num_in("c", {}, 1.0, 1e300, true);
    else f.sub("c");
    if (f.has("epsilon")) p.epsilon = f.num_in("epsilon", {}, 0.0, 1.0, true, true);
    else f.sub("epsilon");
    if (p.c.has_value() != p.epsilon.has_value()) field_error(path, "c and epsilon must be given together");
    out = p;
  } else if (kind == "coupling-harness") {
    CouplingHarnessParams p;
    p.n1 = static_cast<int>(f.integer("n1", p.n1, 0, 1000000));
    p.n2 = static_cast<int>(f.integer("n2", p.n2, 0, 1000000));
    p.z1 = f.num("z1", p.z1);
    p.z2 = f.num("z2", p.z2);
    p.c = f.num_in("c", p.c, 1.0, 1e300, true);
    p.samples = static_cast<int>(f.integer("samples", p.samples, 10, 100000000));
    p.k_max = static_cast<int>(f.integer("k_max", p.k_max, 1, 10000));
    p.alpha = f.num_in("alpha", p.alpha, 1.0, 1e300);
    if (f.has("gamma")) p.gamma = f.num_in("gamma", {}, 0.0, 1e300, true);
    else f.sub("gamma");
    out = p;
  } else if (kind == "tv-decay") {
    TvDecayParams p;
    p.alpha = f.num_in("alpha", p.alpha, 1.0, 1e300);
    p.n0 = f.ints("n0", p.n0);
    for (int n : p.n0)
      if (n < 0) field_error(f.path("n0"), "entries must be non-negative");
    p.z0 = static_cast<int>(f.integer("z0", p.z0, 0, 1000000));
    p.t_grid = f.nums("t_grid", p.t_grid);
    if (p.t_grid.empty()) field_error(f.path("t_grid"), "must not be empty");
    for (double t : p.t_grid)
      if (!(t >= 0.0)) field_error(f.path("t_grid"), "times must be non-negative");
    out = p;
  } else if (kind == "mgf-lemma") {
    MgfLemmaParams p;
    p.alpha = f.num_in("alpha", p.alpha, 1.0, 1e300);
    p.beta = f.num_in("beta", p.beta, 0.0, 1e300, true);
    p.gamma = f.num_in("gamma", p.gamma, 0.0, 1e300, true);
    p.a = f.num_in("a", p.a, 0.0, 1e300);
    if (!(p.a < p.beta + p.gamma)) field_error(f.path("a"), "must be below beta + gamma");
    p.samples = static_cast<int>(f.integer("samples", p.samples, 10, 100000000));
    p.eta_kind = f.str("eta_kind", p.eta_kind);
    if (p.eta_kind != "exponential" && p.eta_kind != "constant")
      field_error(f.path("eta_kind"), "must be 'exponential' or 'constant'");
    p.eta_value = f.num_in("eta_value", p.eta_value, 0.0, 1e300, true);
    out = p;
  }
  f.done();
  return out;
}

}  // namespace

EnvSection parse_env(const json& j, const std::string& path) {
  Fields f(j, path);
  EnvSection e;
  if (f.has("builtin")) {
    const std::string name = f.str("builtin");
    const BuiltinInfo* b = find_builtin(name);
    if (!b) field_error(f.path("builtin"), "unknown builtin '" + name + "' (see list-builtins)");
    e.label = name;
    e.discrete = b->discrete;
    const json params = f.sub_or_empty("params");
    if (e.discrete) {
      e.d = make_discrete_builtin(name, params, path);
    } else {
      e.c = make_diffusive_builtin(name, params, path);
    }
  } else {
    const std::string type = f.str("type");
    e.label = "custom";
    if (type == "discrete") {
      e.discrete = true;
      e.d = parse_custom_discrete(f, path);
    } else if (type == "diffusive") {
      e.discrete = false;
      e.c = parse_custom_diffusive(f, path);
    } else {
      field_error(f.path("type"), "must be 'discrete' or 'diffusive' (or give 'builtin')");
    }
  }
  f.done();
  return e;
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"stationary-discrete", "stationary-diffusive", "stationary-threshold",
                                          "rate-certificate",    "coupling-harness",     "tv-decay",
                                          "mgf-lemma"};
  return k;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ExperimentConfig parse_config(json doc, const Overrides& ov) {
  if (!doc.is_object()) field_error("$", "config must be an object");
  if (ov.seed) doc["run"]["seed"] = *ov.seed;
  if (ov.replicas) doc["run"]["replicas"] = *ov.replicas;
  if (ov.out) doc["output"] = *ov.out;

  ExperimentConfig cfg;
  Fields f(doc, "$");
  cfg.kind = f.str("kind");
  bool known = false;
  for (const auto& k : experiment_kinds()) known = known || k == cfg.kind;
  if (!known) field_error("$.kind", "unknown experiment kind '" + cfg.kind + "'");

  if (f.has("spec")) cfg.env = parse_env(f.sub("spec"), "$.spec");
  else f.sub("spec");
  cfg.run = parse_run(f.sub("run"), "$.run");
  cfg.params = parse_params(cfg.kind, f.sub("params"), "$.params");
  cfg.output = f.str("output", std::string("out"));
  f.done();

  const bool needs_discrete = cfg.kind == "stationary-discrete" || cfg.kind == "tv-decay";
  const bool needs_diffusive = cfg.kind == "stationary-diffusive" || cfg.kind == "stationary-threshold";
  const bool needs_any = needs_discrete || needs_diffusive || cfg.kind == "coupling-harness";
  if (needs_any && !cfg.env) field_error("$.spec", "required for kind " + cfg.kind);
  if (!needs_any && cfg.env) field_error("$.spec", "not used by kind " + cfg.kind);
  if (needs_discrete && !cfg.env->discrete) field_error("$.spec", "kind " + cfg.kind + " needs a discrete environment");
  if (needs_diffusive && cfg.env->discrete)
    field_error("$.spec", "kind " + cfg.kind + " needs a diffusive environment");
  if (cfg.kind == "stationary-threshold" && !cfg.env->c.threshold)
    field_error("$.spec", "kind stationary-threshold needs threshold domains");
  if (cfg.kind == "stationary-diffusive" && cfg.env->c.threshold)
    field_error("$.spec", "threshold specs belong to kind stationary-threshold");
  if (cfg.kind == "coupling-harness" && !cfg.env->discrete && cfg.env->c.dim() != 1)
    field_error("$.spec", "the diffusive coupling harness supports one-dimensional domains only");

  // The output directory does not affect results, so it is left out of the hash.
  cfg.canonical = doc;
  json hashed = doc;
  hashed.erase("output");
  cfg.hash = hex16(fnv1a64(hashed.dump()));
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw SpecError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
  return parse_config(std::move(doc), ov);
}

}  // namespace envq
