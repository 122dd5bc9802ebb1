#include "envq/reflected_sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "envq/errors.hpp"
#include "envq/quadrature.hpp"

namespace envq {

SdeState make_state(const DiffusionEnvSpec& spec, const Vec2& z) {
  if (!spec.domain.contains(z, 1e-12)) throw DomainViolation("initial point outside " + spec.domain.describe());
  SdeState s;
  s.z = z;
  s.ell.assign(spec.domain.faces.size(), 0.0);
  return s;
}

namespace {

void reflect_1d(double& z, double lo, double hi, std::vector<double>& ell, Reflection mode) {
  const double width = hi - lo;
  if (mode == Reflection::clamp) {
    if (z > hi) {
      ell[1] += z - hi;
      z = hi;
    } else if (z < lo) {
      ell[0] += lo - z;
      z = lo;
    }
    return;
  }
  int it = 0;
  while (z < lo || z > hi) {
    if (z > hi) {
      // folding moves the point by twice the overshoot
      const double o = z - hi;
      ell[1] += 2.0 * o;
      z = hi - o;
    } else {
      const double o = lo - z;
      ell[0] += 2.0 * o;
      z = lo + o;
    }
    if (++it > 100000) throw NumericalError("fold reflection did not terminate; step far exceeds domain width " +
                                            std::to_string(width));
  }
}

void project_polygon(Vec2& z, const DomainSpec& d, std::vector<double>& ell) {
  for (int it = 0; it < 256; ++it) {
    int worst = -1;
    double viol = -1e-15;
    for (std::size_t k = 0; k < d.faces.size(); ++k) {
      const auto& f = d.faces[k];
      const double g = f.normal[0] * z[0] + f.normal[1] * z[1] - f.offset;
      if (g < viol) {
        viol = g;
        worst = static_cast<int>(k);
      }
    }
    if (worst < 0) return;
    const auto& f = d.faces[worst];
    const double rn = f.reflection[0] * f.normal[0] + f.reflection[1] * f.normal[1];
    const double s = -viol / rn;
    z[0] += s * f.reflection[0];
    z[1] += s * f.reflection[1];
    ell[worst] += s * std::hypot(f.reflection[0], f.reflection[1]);
  }
  throw NumericalError("oblique projection did not converge");
}

}  // namespace

void advance_reflected(const DiffusionEnvSpec& spec, SdeState& s, double dt, double scale, const Vec2& noise,
                       const StepOptions& opt) {
  if (!(dt > 0.0)) throw SpecError("step_reflected: dt must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale * dt))
    throw NumericalError("non-finite state: time-change scale " + std::to_string(scale) + " overflows");
  const double h = scale * dt;
  s.t += dt;
  if (spec.dim() == 1) {
    const double lo = opt.interval ? opt.interval->first : spec.domain.lo;
    const double hi = opt.interval ? opt.interval->second : spec.domain.hi;
    const double var = spec.sigma[0][0](s.z);
    double z = s.z[0] + h * spec.drift[0](s.z) + std::sqrt(h * var) * noise[0];
    if (!std::isfinite(z) || std::abs(z - s.z[0]) > 1e6 * (hi - lo))
      throw NumericalError("non-finite state after Euler step (scale " + std::to_string(scale) + ")");
    reflect_1d(z, lo, hi, s.ell, opt.mode);
    s.z = {z, 0.0};
    return;
  }
  const double a = spec.sigma[0][0](s.z), b = spec.sigma[0][1](s.z), c = spec.sigma[1][1](s.z);
  const double l00 = std::sqrt(a);
  const double l10 = b / l00;
  const double l11 = std::sqrt(std::max(0.0, c - l10 * l10));
  const double sq = std::sqrt(h);
  Vec2 z{s.z[0] + h * spec.drift[0](s.z) + sq * l00 * noise[0],
         s.z[1] + h * spec.drift[1](s.z) + sq * (l10 * noise[0] + l11 * noise[1])};
  if (!std::isfinite(z[0]) || !std::isfinite(z[1]))
    throw NumericalError("non-finite state after Euler step (scale " + std::to_string(scale) + ")");
  project_polygon(z, spec.domain, s.ell);
  s.z = z;
}

SdeState step_reflected(const DiffusionEnvSpec& spec, const SdeState& s, double dt, double scale, const Vec2& noise,
                        const StepOptions& opt) {
  SdeState out = s;
  advance_reflected(spec, out, dt, scale, noise, opt);
  return out;
}

std::optional<Vec2> sample_jump(const DiffusionEnvSpec& spec, const Vec2& z, double h, Rng& rng,
                                const std::optional<std::pair<double, double>>& interval) {
  if (!spec.jump) return std::nullopt;
  const double r = spec.jump->rate(z);
  if (!(r > 0.0)) return std::nullopt;
  const double p = -std::expm1(-r * h);
  if (!(rng.uniform() < p)) return std::nullopt;
  Vec2 land{0.0, 0.0};
  if (spec.dim() == 1) {
    const double lo = interval ? interval->first : spec.domain.lo;
    const double hi = interval ? interval->second : spec.domain.hi;
    land[0] = lo + (hi - lo) * rng.uniform();
  } else {
    const auto& d = spec.domain;
    const double s = d.faces[1].normal[0] / -d.faces[1].normal[1];
    for (int k = 0;; ++k) {
      land = {d.lo + (d.hi - d.lo) * rng.uniform(), s * d.hi * rng.uniform()};
      if (d.contains(land, 0.0)) break;
      if (k > 10000) throw NumericalError("jump landing sampler failed");
    }
  }
  if (!spec.domain.contains(land, 1e-12)) throw DomainViolation("jump landing point outside D");
  return land;
}

double StationaryDensity1D::q(double z) const {
  const double az = a(z);
  const double a2 = az * az;
  double expo = 0.0;
  const bool const_a = a.kind == ScalarField::Kind::constant;
  if (const_a && b.kind == ScalarField::Kind::constant) {
    expo = 2.0 * b.c0 * (z - z0) / a2;
  } else if (const_a && b.kind == ScalarField::Kind::linear) {
    expo = 2.0 / a2 * (b.c0 * (z - z0) + 0.5 * b.c1 * (z * z - z0 * z0));
  } else if (const_a && b.kind == ScalarField::Kind::pole) {
    expo = 2.0 * b.c0 / a2 * std::log((b.c1 - z0) / (b.c1 - z));
  } else {
    expo = integrate([this](double y) {
      const double ay = a(y);
      return 2.0 * b(y) / (ay * ay);
    }, z0, z, 1e-12);
  }
  return 2.0 / a2 * std::exp(expo);
}

double StationaryDensity1D::density(double z) const { return q(z) / normalizer; }

double StationaryDensity1D::mass(double z_lo, double z_hi) const {
  return integrate([this](double y) { return q(y); }, z_lo, z_hi, 1e-10) / normalizer;
}

StationaryDensity1D stationary_density_1d(const ScalarField& a, const ScalarField& b, double lo, double hi) {
  if (!(hi > lo)) throw SpecError("stationary_density_1d: empty domain");
  StationaryDensity1D d;
  d.a = a;
  d.b = b;
  d.lo = lo;
  d.hi = hi;
  d.z0 = lo;
  for (int k = 1; k < 64; ++k) {
    const double z = lo + (hi - lo) * k / 64.0;
    if (!(a(z) > 0.0)) throw SpecError("stationary_density_1d: a(z) must be positive in the interior");
  }
  auto drift_ratio = integrate_or_diverge([&](double y) {
    const double ay = a(y);
    return std::abs(b(y)) / (ay * ay);
  }, lo, hi);
  d.drift_condition = drift_ratio.has_value();
  auto norm = integrate_or_diverge([&d](double y) { return d.q(y); }, lo, hi);
  d.integrable = norm.has_value();
  d.normalizer = norm.value_or(std::numeric_limits<double>::infinity());
  return d;
}

StationaryDensity1D stationary_density_1d(const DiffusionEnvSpec& spec) {
  if (spec.dim() != 1) throw SpecError("stationary_density_1d needs a 1-D domain");
  ScalarField a;
  const auto& s = spec.sigma[0][0];
  if (s.kind == ScalarField::Kind::constant) a = ScalarField::constant(std::sqrt(s.c0));
  else if (s.kind == ScalarField::Kind::table) {
    std::vector<double> v = s.values;
    for (double& x : v) x = std::sqrt(x);
    a = ScalarField::table(s.knots, v, s.coord);
  } else {
    throw SpecError("stationary density needs a constant or tabulated covariance");
  }
  return stationary_density_1d(a, spec.drift[0], spec.domain.lo, spec.domain.hi);
}

Coupling1D couple_1d(const DiffusionEnvSpec& spec, double z1, double z2, double horizon, double dt,
                     std::uint64_t seed) {
  if (spec.dim() != 1) throw SpecError("couple_1d needs a 1-D domain");
  Coupling1D res;
  const double tol = 1e-6 * spec.domain.diameter();
  if (std::abs(z1 - z2) <= tol) {
    res.coupled = true;
    return res;
  }
  Rng rng(seed);
  SdeState a = make_state(spec, {z1, 0.0});
  SdeState b = make_state(spec, {z2, 0.0});
  const double sgn = z1 < z2 ? -1.0 : 1.0;
  const double scale = spec.beta(0);
  StepOptions opt;
  opt.mode = Reflection::clamp;
  while (a.t < horizon) {
    const Vec2 noise{rng.normal(), 0.0};
    advance_reflected(spec, a, dt, scale, noise, opt);
    advance_reflected(spec, b, dt, scale, noise, opt);
    const double d = a.z[0] - b.z[0];
    if (std::abs(d) <= tol) {
      res.coupled = true;
      res.tau = a.t;
      return res;
    }
    if (d * sgn < 0.0) res.order_preserved = false;
  }
  res.tau = horizon;
  return res;
}

double dkw_epsilon(std::size_t n, double confidence) {
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n)));
}

CouplingFit fit_coupling_constants(std::vector<double> samples, const FitOptions& opt) {
  if (samples.size() < 1000) throw SpecError("fit_coupling_constants needs at least 1000 samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  CouplingFit fit;
  fit.samples = n;
  fit.dkw_eps = dkw_epsilon(n, opt.confidence);
  // Survival P(tau >= t) just at each order statistic.
  auto surv_at = [&](std::size_t k) { return static_cast<double>(n - k) / static_cast<double>(n); };
  const double s_lo = std::max(0.01, 3.0 * fit.dkw_eps);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < n; ++k) {
    if (k + 1 < n && samples[k + 1] == samples[k]) continue;
    const double s = surv_at(k);
    if (s <= 0.5 && s >= s_lo) {
      xs.push_back(samples[k]);
      ys.push_back(std::log(s));
    }
  }
  if (xs.size() < 10 || xs.back() - xs.front() <= 0.0)
    throw NumericalError("non-exponential tail: survival has no spread between " + std::to_string(s_lo) + " and 0.5");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  fit.gamma = -slope;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  fit.t_lo = xs.front();
  fit.t_hi = xs.back();
  if (!(fit.gamma > 0.0) || fit.r_squared < opt.min_r_squared)
    throw NumericalError("non-exponential tail: fitted gamma " + std::to_string(fit.gamma) + ", R^2 " +
                         std::to_string(fit.r_squared));
  double alpha = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double excess = surv_at(k) - fit.dkw_eps;
    if (excess > 0.0) alpha = std::max(alpha, excess * std::exp(fit.gamma * samples[k]));
  }
  fit.alpha = alpha;
  if (alpha > opt.alpha_cap)
    throw NumericalError("non-exponential tail: alpha " + std::to_string(alpha) + " exceeds cap " +
                         std::to_string(opt.alpha_cap));
  return fit;
}

}  // namespace envq
