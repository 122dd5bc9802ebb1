#include "envq/env_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "envq/errors.hpp"

namespace envq {

ScalarField ScalarField::constant(double value) {
  ScalarField f;
  f.kind = Kind::constant;
  f.c0 = value;
  return f;
}

ScalarField ScalarField::linear(double slope, double intercept, int coord) {
  ScalarField f;
  f.kind = Kind::linear;
  f.c0 = intercept;
  f.c1 = slope;
  f.coord = coord;
  return f;
}

ScalarField ScalarField::table(std::vector<double> knots, std::vector<double> values, int coord) {
  if (knots.empty() || knots.size() != values.size())
    throw SpecError("table field: knots and values must be non-empty and of equal length");
  for (std::size_t k = 1; k < knots.size(); ++k)
    if (!(knots[k] > knots[k - 1])) throw SpecError("table field: knots must be strictly increasing");
  ScalarField f;
  f.kind = Kind::table;
  f.knots = std::move(knots);
  f.values = std::move(values);
  f.coord = coord;
  return f;
}

ScalarField ScalarField::pole(double theta, double at, int coord) {
  ScalarField f;
  f.kind = Kind::pole;
  f.c0 = theta;
  f.c1 = at;
  f.coord = coord;
  return f;
}

double ScalarField::operator()(const Vec2& z) const {
  const double x = z[coord];
  switch (kind) {
    case Kind::constant:
      return c0;
    case Kind::linear:
      return c0 + c1 * x;
    case Kind::pole:
      return c0 / (c1 - x);
    case Kind::table: {
      const double tol = 1e-12 * std::max(1.0, std::abs(knots.back()));
      if (x < knots.front() - tol || x > knots.back() + tol)
        throw DomainViolation("table field evaluated outside its knots at z=" + std::to_string(x));
      if (knots.size() == 1) return values[0];
      auto it = std::upper_bound(knots.begin(), knots.end(), x);
      std::size_t k = static_cast<std::size_t>(it - knots.begin());
      if (k == 0) return values.front();
      if (k >= knots.size()) return values.back();
      const double w = (x - knots[k - 1]) / (knots[k] - knots[k - 1]);
      return values[k - 1] + w * (values[k] - values[k - 1]);
    }
  }
  return 0.0;
}

std::string ScalarField::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::constant:
      os << "constant(" << c0 << ")";
      break;
    case Kind::linear:
      os << "linear(slope=" << c1 << ", intercept=" << c0 << ", coord=" << coord << ")";
      break;
    case Kind::pole:
      os << "pole(theta=" << c0 << ", at=" << c1 << ", coord=" << coord << ")";
      break;
    case Kind::table:
      os << "table(" << knots.size() << " knots, coord=" << coord << ")";
      break;
  }
  return os.str();
}

Rates eval_rates(const RateField& rf, const Vec2& z) {
  const double l = rf.lambda(z);
  const double m = rf.mu(z);
  const double tol = 1e-12;
  if (!(l >= 0.0) || !std::isfinite(l))
    throw BoundViolation("arrival rate " + std::to_string(l) + " is not a nonnegative number");
  if (!(m > 0.0) || !std::isfinite(m))
    throw BoundViolation("service rate " + std::to_string(m) + " is not positive");
  if (l > rf.lambda_bar * (1.0 + tol))
    throw BoundViolation("arrival rate " + std::to_string(l) + " exceeds lambda_bar " +
                         std::to_string(rf.lambda_bar) + " at z=" + std::to_string(z[0]));
  if (m < rf.mu_bar * (1.0 - tol))
    throw BoundViolation("service rate " + std::to_string(m) + " below mu_bar " + std::to_string(rf.mu_bar) +
                         " at z=" + std::to_string(z[0]));
  return {l, m, l / m};
}

Rates eval_rates(const DiffusionEnvSpec& spec, const Vec2& z) {
  if (!spec.domain.contains(z, 1e-9))
    throw DomainViolation("point (" + std::to_string(z[0]) + ", " + std::to_string(z[1]) + ") outside " +
                          spec.domain.describe());
  return eval_rates(spec.rates, z);
}

BetaSeq BetaSeq::constant(double b) {
  BetaSeq s;
  s.kind = Kind::constant;
  s.scale = b;
  return s;
}

BetaSeq BetaSeq::geometric(double base, double scale) {
  BetaSeq s;
  s.kind = Kind::geometric;
  s.base = base;
  s.scale = scale;
  return s;
}

BetaSeq BetaSeq::table(std::vector<double> values) {
  if (values.empty()) throw SpecError("beta table must be non-empty");
  BetaSeq s;
  s.kind = Kind::table;
  s.values = std::move(values);
  return s;
}

double BetaSeq::log_at(int n) const {
  switch (kind) {
    case Kind::constant:
      return std::log(scale);
    case Kind::geometric:
      return std::log(scale) + n * std::log(base);
    case Kind::table:
      return std::log(values[std::min<std::size_t>(static_cast<std::size_t>(n), values.size() - 1)]);
  }
  return 0.0;
}

double BetaSeq::operator()(int n) const { return std::exp(log_at(n)); }

DomainSpec DomainSpec::interval(double a, double b) {
  if (!(b > a)) throw SpecError("interval domain needs a < b");
  DomainSpec d;
  d.kind = Kind::interval;
  d.lo = a;
  d.hi = b;
  d.faces = {Face{{1.0, 0.0}, a, {1.0, 0.0}}, Face{{-1.0, 0.0}, -b, {-1.0, 0.0}}};
  return d;
}

DomainSpec DomainSpec::ray(double a, double cap) {
  DomainSpec d = interval(a, cap);
  d.kind = Kind::ray;
  return d;
}

DomainSpec DomainSpec::cone(double delta, double z_min, double z_max) {
  if (!(delta > 0.0 && delta < 1.0)) throw SpecError("cone: delta must lie in (0,1)");
  if (!(z_min > 0.0 && z_max > z_min)) throw SpecError("cone: need 0 < z_min < z_max");
  DomainSpec d;
  d.kind = Kind::polygon;
  const double s = 1.0 - delta;
  const double norm = std::sqrt(s * s + 1.0);
  const Vec2 slanted{s / norm, -1.0 / norm};
  d.faces = {Face{{0.0, 1.0}, 0.0, {0.0, 1.0}}, Face{slanted, 0.0, slanted},
             Face{{1.0, 0.0}, z_min, {1.0, 0.0}}, Face{{-1.0, 0.0}, -z_max, {-1.0, 0.0}}};
  d.lo = z_min;
  d.hi = z_max;
  return d;
}

bool DomainSpec::contains(const Vec2& z, double tol) const {
  if (!std::isfinite(z[0]) || !std::isfinite(z[1])) return false;
  for (const auto& f : faces)
    if (f.normal[0] * z[0] + f.normal[1] * z[1] < f.offset - tol) return false;
  return true;
}

double DomainSpec::diameter() const {
  if (kind != Kind::polygon) return hi - lo;
  // Bounding-box diagonal of the truncated cone.
  const double s = faces[1].normal[0] / -faces[1].normal[1];
  return std::hypot(hi - lo, s * hi);
}

double DomainSpec::coord0_lo() const { return lo; }
double DomainSpec::coord0_hi() const { return hi; }

std::string DomainSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::interval:
      os << "interval[" << lo << ", " << hi << "]";
      break;
    case Kind::ray:
      os << "ray[" << lo << ", inf) capped at " << hi;
      break;
    case Kind::polygon:
      os << "cone with " << faces.size() << " faces, z1 in [" << lo << ", " << hi << "]";
      break;
  }
  return os.str();
}

std::pair<double, double> ThresholdDomains::at(int n) const {
  const Regime* cur = &regimes.front();
  for (const auto& r : regimes) {
    if (r.from_n <= n) cur = &r;
    else break;
  }
  return {cur->lo, cur->hi};
}

bool ThresholdDomains::contains(int n, double z) const {
  auto [a, b] = at(n);
  return z >= a && z <= b;
}

void TauModel::row(int n, int i, int num_states, std::vector<std::pair<int, double>>& out) const {
  const double b = beta(n);
  switch (kind) {
    case Kind::matrix:
      for (int j = 0; j < num_states; ++j)
        if (j != i && base[i][j] > 0.0) out.emplace_back(j, b * base[i][j]);
      break;
    case Kind::shift: {
      const int j = ((i + n) % num_states + num_states) % num_states;
      if (j != i) out.emplace_back(j, b);
      break;
    }
    case Kind::subsets: {
      const Regime* cur = &regimes.front();
      for (const auto& r : regimes) {
        if (r.from_n <= n) cur = &r;
        else break;
      }
      const auto& mem = cur->members;
      const int m = static_cast<int>(mem.size());
      auto pos = std::find(mem.begin(), mem.end(), i);
      if (pos == mem.end() || m < 2) break;
      const int k = static_cast<int>(pos - mem.begin());
      if (cur->mode == Mode::uniform) {
        for (int r = 0; r < m; ++r)
          if (r != k) out.emplace_back(mem[r], b / (m - 1));
      } else {
        const int up = mem[(k + 1) % m];
        const int dn = mem[(k + m - 1) % m];
        if (up == dn) {
          out.emplace_back(up, b);
        } else {
          out.emplace_back(up, 0.5 * b);
          out.emplace_back(dn, 0.5 * b);
        }
      }
      break;
    }
  }
}

double TauModel::rate(int n, int i, int j, int num_states) const {
  std::vector<std::pair<int, double>> r;
  row(n, i, num_states, r);
  double s = 0.0;
  for (auto& [k, w] : r)
    if (k == j) s += w;
  return s;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool structurally_valid(const ValidationReport& r) {
  for (const auto& c : r.checks)
    if (!c.passed && c.name != "traffic_bound") return false;
  return true;
}

ValidationReport validate_spec(const DiscreteEnvSpec& spec, const DiscreteValidationOptions& opt) {
  ValidationReport rep;
  const int m = spec.size();
  if (m == 0) {
    rep.checks.push_back({"states_nonempty", false, 0.0, "no states"});
    return rep;
  }
  if (static_cast<int>(spec.v.size()) != m) {
    rep.checks.push_back({"weights_positive", false, 0.0, "v has wrong length"});
    return rep;
  }
  double vmin = *std::min_element(spec.v.begin(), spec.v.end());
  rep.checks.push_back({"weights_positive", vmin > 0.0, vmin, ""});

  std::vector<double> rho(m, 0.0);
  bool rates_ok = true;
  std::string rate_msg;
  for (int i = 0; i < m; ++i) {
    try {
      rho[i] = spec.rates_at(i).rho;
    } catch (const Error& e) {
      rates_ok = false;
      rate_msg = e.what();
    }
  }
  rep.checks.push_back({"rate_bounds", rates_ok, 0.0, rate_msg});
  double rho_max = *std::max_element(rho.begin(), rho.end());
  rep.checks.push_back({"rho_below_one", rates_ok && rho_max < 1.0, rho_max, ""});
  const double rho_bar = spec.rates.lambda_bar / spec.rates.mu_bar;
  rep.checks.push_back({"traffic_bound", rho_bar < 1.0, rho_bar, "lambda_bar < mu_bar"});

  double worst = 0.0;
  bool nonneg = true;
  std::vector<std::pair<int, double>> row;
  for (int n = 0; n <= opt.n_check; ++n) {
    std::vector<double> out(m, 0.0), in(m, 0.0);
    for (int i = 0; i < m; ++i) {
      row.clear();
      spec.tau.row(n, i, m, row);
      for (auto& [j, w] : row) {
        if (!(w >= 0.0)) nonneg = false;
        out[i] += spec.v[i] * w;
        in[j] += spec.v[i] * w;
      }
    }
    for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(out[i] - in[i]));
  }
  rep.checks.push_back({"tau_nonnegative", nonneg, 0.0, ""});
  rep.checks.push_back({"balance", worst <= opt.balance_tol, worst,
                        "max_n,z |v(z) sum tau_n(z,.) - sum v(z') tau_n(z',z)|"});

  double xi = 0.0;
  for (int i = 0; i < m; ++i) xi += spec.v[i] / (1.0 - rho[i]);
  rep.checks.push_back({"xi_finite", rates_ok && std::isfinite(xi) && rho_max < 1.0, xi, ""});

  if (rates_ok) {
    double worst_log = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (rho[i] <= 0.0) continue;
      row.clear();
      spec.tau.row(opt.n_check, i, m, row);
      for (auto& [j, w] : row) worst_log = std::max(worst_log, std::log(w) - opt.n_check * std::log(rho[i]));
    }
    if (worst_log > std::log(std::numeric_limits<double>::max()))
      rep.warnings.push_back("environment rate beta_n rho^-n overflows double precision at n=" +
                             std::to_string(opt.n_check));
    else if (worst_log > std::log(1e15))
      rep.warnings.push_back("environment rates exceed 1e15 at n=" + std::to_string(opt.n_check) +
                             "; the truncated generator is stiff");
  }
  return rep;
}

namespace {

std::vector<Vec2> sample_grid(const DomainSpec& d, int points) {
  std::vector<Vec2> g;
  if (d.dim() == 1) {
    g.reserve(points);
    for (int k = 0; k < points; ++k) g.push_back({d.lo + (k + 0.5) / points * (d.hi - d.lo), 0.0});
    return g;
  }
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(points))));
  const double s = d.faces[1].normal[0] / -d.faces[1].normal[1];
  const double ymax = s * d.hi;
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) {
      Vec2 z{d.lo + (a + 0.5) / side * (d.hi - d.lo), (b + 0.5) / side * ymax};
      if (d.contains(z, 0.0)) g.push_back(z);
    }
  // Top up with points along the cone's slanted face interior so the grid
  // has at least the requested size.
  for (int k = 0; static_cast<int>(g.size()) < points; ++k) {
    const double x = d.lo + (k % side + 0.5) / side * (d.hi - d.lo);
    g.push_back({x, 0.5 * s * x * ((k / side) % 2 == 0 ? 0.25 : 0.75)});
  }
  return g;
}

}  // namespace

ValidationReport validate_spec(const DiffusionEnvSpec& spec, int grid_points) {
  ValidationReport rep;
  const auto& d = spec.domain;
  const auto grid = sample_grid(d, grid_points);

  double min_eig = std::numeric_limits<double>::infinity();
  bool sym = true;
  for (const auto& z : grid) {
    if (d.dim() == 1) {
      min_eig = std::min(min_eig, spec.sigma[0][0](z));
    } else {
      const double a = spec.sigma[0][0](z), b = spec.sigma[0][1](z), b2 = spec.sigma[1][0](z),
                   c = spec.sigma[1][1](z);
      if (std::abs(b - b2) > 1e-12) sym = false;
      const double tr = a + c, det = a * c - b * b;
      min_eig = std::min(min_eig, 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det))));
    }
  }
  rep.checks.push_back({"ellipticity", sym && min_eig >= spec.ellipticity, min_eig,
                        "min eigenvalue of Sigma over grid vs declared delta"});

  double min_dot = std::numeric_limits<double>::infinity();
  for (const auto& f : d.faces)
    min_dot = std::min(min_dot, f.reflection[0] * f.normal[0] + f.reflection[1] * f.normal[1]);
  rep.checks.push_back({"reflection_inward", min_dot > 0.0, min_dot, "min over faces of r . n"});

  bool rates_ok = true;
  std::string msg;
  double rho_max = 0.0;
  for (const auto& z : grid) {
    try {
      rho_max = std::max(rho_max, eval_rates(spec, z).rho);
    } catch (const Error& e) {
      rates_ok = false;
      msg = e.what();
      break;
    }
  }
  rep.checks.push_back({"rate_bounds", rates_ok, 0.0, msg});
  rep.checks.push_back({"rho_below_one", rates_ok && rho_max < 1.0, rho_max, "max rho on grid"});
  const double rho_bar = spec.rates.lambda_bar / spec.rates.mu_bar;
  rep.checks.push_back({"traffic_bound", rho_bar < 1.0, rho_bar, "lambda_bar < mu_bar"});

  bool beta_ok = true;
  for (int n = 0; n <= 64; ++n)
    if (!std::isfinite(spec.beta.log_at(n))) beta_ok = false;
  rep.checks.push_back({"beta_positive", beta_ok, 0.0, ""});

  if (spec.jump) {
    double rmin = std::numeric_limits<double>::infinity();
    for (const auto& z : grid) rmin = std::min(rmin, spec.jump->rate(z));
    rep.checks.push_back({"jump_rate_nonnegative", rmin >= 0.0, rmin, ""});
  }

  if (spec.threshold) {
    const auto& regs = spec.threshold->regimes;
    bool ok = !regs.empty() && regs.front().from_n == 0 && d.dim() == 1;
    std::string why;
    double cover_lo = d.hi, cover_hi = d.lo, min_overlap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; ok && k < regs.size(); ++k) {
      const auto& r = regs[k];
      if (!(r.hi > r.lo) || r.lo < d.lo - 1e-12 || r.hi > d.hi + 1e-12) {
        ok = false;
        why = "regime interval empty or outside D";
      }
      if (k > 0 && !(r.from_n > regs[k - 1].from_n)) {
        ok = false;
        why = "regimes not sorted by from_n";
      }
      if (k > 0)
        min_overlap = std::min(min_overlap, std::min(r.hi, regs[k - 1].hi) - std::max(r.lo, regs[k - 1].lo));
      cover_lo = std::min(cover_lo, r.lo);
      cover_hi = std::max(cover_hi, r.hi);
    }
    if (ok && regs.size() > 1 && !(min_overlap > 0.0)) {
      ok = false;
      why = "consecutive D_n do not share an open set";
    }
    if (ok && (cover_lo > d.lo + 1e-12 || cover_hi < d.hi - 1e-12)) {
      ok = false;
      why = "union of D_n does not cover D";
    }
    rep.checks.push_back({"threshold_domains", ok, regs.size() > 1 ? min_overlap : 0.0, why});
  }
  return rep;
}

}  // namespace envq
