#include "envq/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "envq/errors.hpp"
#include "envq/quadrature.hpp"

namespace envq {

namespace {

constexpr double kSeriesTail = 1e-10;
constexpr double kXiAgreement = 1e-8;

double rho_at(const RateField& rf, double z) { return eval_rates(rf, Vec2{z, 0.0}).rho; }

// sum_{k=a}^{b-1} r^k without the cancellation of (r^a - r^b) / (1 - r).
double geometric_block(double r, int a, int b) {
  if (b <= a) return 0.0;
  if (r < 0.999) return (std::pow(r, a) - std::pow(r, b)) / (1.0 - r);
  double s = 0.0, p = std::pow(r, a);
  for (int k = a; k < b; ++k, p *= r) s += p;
  return s;
}

int series_cutoff(double rho_bar) {
  if (rho_bar <= 0.0) return 1;
  if (rho_bar >= 1.0) throw NumericalError("layer series: sup rho reaches 1");
  // rho_bar^N / (1 - rho_bar) < kSeriesTail
  const double n = std::log(kSeriesTail * (1.0 - rho_bar)) / std::log(rho_bar);
  return std::max(1, static_cast<int>(std::ceil(n)));
}

void check_xi_forms(double closed, double series) {
  if (!(std::abs(closed - series) <= kXiAgreement * std::max(1.0, std::abs(closed))))
    throw NumericalError("Xi forms disagree: " + std::to_string(closed) + " vs " + std::to_string(series));
}

}  // namespace

StationaryLaw StationaryLaw::discrete(const DiscreteEnvSpec& spec) {
  StationaryLaw law;
  law.kind_ = Kind::discrete;
  law.discrete_ = spec;
  double rb = 0.0;
  for (int i = 0; i < spec.size(); ++i) rb = std::max(rb, spec.rates_at(i).rho);
  law.rho_bar_ = rb;
  law.compute_xi();
  return law;
}

StationaryLaw StationaryLaw::diffusive(const DiffusionEnvSpec& spec) {
  if (spec.dim() != 1) throw SpecError("closed-form law needs a 1-D environment");
  if (spec.jump) throw SpecError("closed-form law is unavailable for environments with jumps");
  return diffusive(stationary_density_1d(spec), spec.rates, spec.threshold);
}

StationaryLaw StationaryLaw::diffusive(const StationaryDensity1D& nu, const RateField& rates,
                                       std::optional<ThresholdDomains> threshold) {
  if (!nu.integrable) throw NumericalError("environment density is not integrable on D");
  StationaryLaw law;
  law.kind_ = threshold ? Kind::threshold : Kind::diffusive;
  law.nu_ = nu;
  law.rates_ = rates;
  law.threshold_ = std::move(threshold);
  // sup rho over the support of the last regime (the one the series tail runs on).
  auto [lo, hi] = law.support(1 << 30);
  double rb = 0.0;
  for (int k = 0; k <= 2000; ++k) rb = std::max(rb, rho_at(rates, lo + (hi - lo) * k / 2000.0));
  law.rho_bar_ = rb;
  law.compute_xi();
  return law;
}

double StationaryLaw::rho(double z) const {
  if (kind_ == Kind::discrete) throw SpecError("rho(z) is defined for diffusive laws");
  return rho_at(rates_, z);
}

std::pair<double, double> StationaryLaw::support(int n) const {
  if (kind_ == Kind::discrete) return {0.0, static_cast<double>(discrete_->size())};
  if (threshold_) return threshold_->at(n);
  return {nu_->lo, nu_->hi};
}

void StationaryLaw::compute_xi() {
  if (kind_ == Kind::discrete) {
    const auto& s = *discrete_;
    double closed = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      const double r = s.rates_at(i).rho;
      if (!(r < 1.0)) throw NumericalError("Xi diverges: rho reaches 1 at state " + std::to_string(i));
      closed += s.v[i] / (1.0 - r);
    }
    const int N = series_cutoff(rho_bar_);
    double series = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      const double r = s.rates_at(i).rho;
      double p = 1.0;
      for (int n = 0; n < N; ++n, p *= r) series += s.v[i] * p;
      series += s.v[i] * p / (1.0 - r);
    }
    if (!std::isfinite(closed)) throw NumericalError("Xi overflow");
    check_xi_forms(closed, series);
    xi_ = closed;
    xi_series_ = series;
    return;
  }

  const auto& nu = *nu_;
  // 1/(1 - rho) form, summed regime by regime in threshold mode.
  std::vector<ThresholdDomains::Regime> regs;
  if (threshold_) regs = threshold_->regimes;
  else regs.push_back({0, nu.lo, nu.hi});
  double closed = 0.0;
  for (std::size_t r = 0; r < regs.size(); ++r) {
    const int a = regs[r].from_n;
    const double lo = std::max(regs[r].lo, nu.lo), hi = std::min(regs[r].hi, nu.hi);
    if (r + 1 < regs.size()) {
      const int b = regs[r + 1].from_n;
      closed += integrate([&](double z) { return nu.density(z) * geometric_block(rho_at(rates_, z), a, b); }, lo, hi);
    } else {
      auto v = integrate_or_diverge(
          [&](double z) {
            const double rz = rho_at(rates_, z);
            return nu.density(z) * std::pow(rz, a) / (1.0 - rz);
          },
          lo, hi);
      if (!v) throw NumericalError("Xi diverges: integral of nu/(1 - rho) is infinite on the final layer support");
      closed += *v;
    }
  }
  // Layer series truncated where rho_bar^N / (1 - rho_bar) < 1e-10, plus its tail.
  const int N = std::max(series_cutoff(rho_bar_), regs.back().from_n);
  double series = 0.0;
  for (int n = 0; n < N; ++n) series += layer_integral(n, -INFINITY, INFINITY);
  {
    auto [lo, hi] = support(N);
    series += integrate(
        [&](double z) {
          const double rz = rho_at(rates_, z);
          return nu.density(z) * std::pow(rz, N) / (1.0 - rz);
        },
        lo, hi);
  }
  check_xi_forms(closed, series);
  xi_ = closed;
  xi_series_ = series;
}

double StationaryLaw::layer_integral(int n, double lo, double hi) const {
  auto [slo, shi] = support(n);
  lo = std::max(lo, slo);
  hi = std::min(hi, shi);
  if (!(hi > lo)) return 0.0;
  const auto& nu = *nu_;
  return integrate([&](double z) { return std::pow(rho_at(rates_, z), n) * nu.density(z); }, lo, hi);
}

double StationaryLaw::layer_density(int n, double z) const {
  if (kind_ == Kind::discrete) throw SpecError("layer_density(n, z) needs a diffusive law; use layer_mass_discrete");
  auto [lo, hi] = support(n);
  if (z < lo || z > hi) return 0.0;
  return std::pow(rho_at(rates_, z), n) * nu_->density(z) / xi_;
}

double StationaryLaw::layer_mass_discrete(int n, int i) const {
  if (kind_ != Kind::discrete) throw SpecError("layer_mass_discrete needs a discrete law");
  const auto& s = *discrete_;
  return s.v[i] * std::pow(s.rates_at(i).rho, n) / xi_;
}

double StationaryLaw::layer_mass(int n, double lo, double hi) const {
  if (kind_ == Kind::discrete) {
    double m = 0.0;
    for (int i = std::max(0, static_cast<int>(std::ceil(lo))); i < std::min<double>(hi, discrete_->size()); ++i)
      m += layer_mass_discrete(n, i);
    return m;
  }
  return layer_integral(n, lo, hi) / xi_;
}

double StationaryLaw::queue_marginal(int n) const {
  if (kind_ == Kind::discrete) {
    double m = 0.0;
    for (int i = 0; i < discrete_->size(); ++i) m += layer_mass_discrete(n, i);
    return m;
  }
  return layer_integral(n, -INFINITY, INFINITY) / xi_;
}

double StationaryLaw::env_marginal(double z) const {
  if (kind_ == Kind::discrete) throw SpecError("env_marginal needs a diffusive law");
  const double rz = rho_at(rates_, z);
  const double d = nu_->density(z) / xi_;
  if (!threshold_) return d / (1.0 - rz);
  const auto& regs = threshold_->regimes;
  double s = 0.0;
  for (std::size_t r = 0; r < regs.size(); ++r) {
    if (z < regs[r].lo || z > regs[r].hi) continue;
    if (r + 1 < regs.size()) s += geometric_block(rz, regs[r].from_n, regs[r + 1].from_n);
    else s += std::pow(rz, regs[r].from_n) / (1.0 - rz);
  }
  return d * s;
}

double xi_constant(const DiscreteEnvSpec& spec) { return StationaryLaw::discrete(spec).xi(); }

double xi_constant(const DiffusionEnvSpec& spec) { return StationaryLaw::diffusive(spec).xi(); }

StationaryLaw joint_invariant(const DiscreteEnvSpec& spec) { return StationaryLaw::discrete(spec); }

StationaryLaw joint_invariant(const DiffusionEnvSpec& spec) { return StationaryLaw::diffusive(spec); }

OccupationMatrix law_grid(const StationaryLaw& law, int n_cap, int bins, double lo, double hi) {
  if (n_cap < 0 || bins < 1) throw SpecError("law_grid: invalid grid");
  OccupationMatrix m;
  m.n_cap = n_cap;
  m.bins = bins;
  m.lo = lo;
  m.hi = hi;
  m.total_time = 1.0;
  m.frac.assign(static_cast<std::size_t>((n_cap + 2) * bins), 0.0);
  m.off_support.assign(static_cast<std::size_t>(n_cap + 2), 0.0);
  if (law.kind() == StationaryLaw::Kind::discrete) {
    const int M = law.discrete_spec()->size();
    if (bins != M) throw SpecError("law_grid: discrete law needs one bin per environment state");
    for (int i = 0; i < M; ++i) {
      for (int n = 0; n <= n_cap; ++n) m.at(n, i) = law.layer_mass_discrete(n, i);
      const double r = law.discrete_spec()->rates_at(i).rho;
      m.at(n_cap + 1, i) = law.discrete_spec()->v[i] * std::pow(r, n_cap + 1) / (1.0 - r) / law.xi();
    }
    return m;
  }
  for (int b = 0; b < bins; ++b) {
    const double a = m.bin_lo(b), c = m.bin_hi(b);
    double below = 0.0;
    for (int n = 0; n <= n_cap; ++n) {
      m.at(n, b) = law.layer_mass(n, a, c);
      below += m.at(n, b);
    }
    const double total = integrate([&](double z) { return law.env_marginal(z); }, a, c);
    m.at(n_cap + 1, b) = std::max(0.0, total - below);
  }
  return m;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw SpecError("tv_distance: partitions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double ComparisonReport::max_layer_tv(int up_to_n) const {
  double m = 0.0;
  for (const auto& l : layers)
    if (l.n <= up_to_n) m = std::max(m, l.conditional_tv);
  return m;
}

ComparisonReport compare_empirical(const StationaryLaw& law, const OccupationMatrix& occ, const CompareOptions& opt) {
  const OccupationMatrix ref = law_grid(law, occ.n_cap, occ.bins, occ.lo, occ.hi);
  ComparisonReport rep;
  std::vector<double> off = occ.off_support;
  off.resize(static_cast<std::size_t>(occ.n_cap + 2), 0.0);
  rep.global_tv = tv_distance(occ.frac, ref.frac) + 0.5 * std::accumulate(off.begin(), off.end(), 0.0);

  for (int n = 0; n <= occ.n_cap; ++n) {
    LayerComparison lc{};
    lc.n = n;
    std::vector<double> e(occ.bins), l(occ.bins);
    double se = 0.0, sl = 0.0;
    for (int b = 0; b < occ.bins; ++b) {
      e[b] = occ.at(n, b);
      l[b] = ref.at(n, b);
      se += e[b];
      sl += l[b];
    }
    lc.empirical_mass = se + off[n];
    lc.law_mass = sl;
    lc.off_support_mass = off[n];
    if (se > 0.0 && sl > 0.0) {
      for (int b = 0; b < occ.bins; ++b) {
        e[b] /= se;
        l[b] /= sl;
      }
      lc.conditional_tv = tv_distance(e, l);
    } else {
      lc.conditional_tv = (se == 0.0 && sl == 0.0) ? 0.0 : 1.0;
    }
    rep.layers.push_back(lc);
  }

  if (law.kind() != StationaryLaw::Kind::discrete) {
    for (int b = 0; b < occ.bins; ++b) {
      const double zc = 0.5 * (occ.bin_lo(b) + occ.bin_hi(b));
      const double rc = law.rho(zc);
      if (!(rc > 0.0)) continue;
      std::vector<double> xs, ys;
      double visits = 0.0;
      for (int n = 0; n <= occ.n_cap; ++n) {
        auto [slo, shi] = law.support(n);
        if (occ.bin_lo(b) < slo || occ.bin_hi(b) > shi) continue;
        const double v = occ.at(n, b);
        if (v < opt.min_cell_mass) continue;
        xs.push_back(n);
        ys.push_back(std::log(v));
        visits += v;
      }
      if (static_cast<int>(xs.size()) < opt.min_layers) continue;
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
      }
      rep.slopes.push_back({b, zc, sxy / sxx, std::log(rc), visits, static_cast<int>(xs.size())});
    }
  }
  return rep;
}

BoundaryEstimate boundary_measure_estimate(const JointPath& path, double burn_in) {
  if (burn_in < 0.0 || burn_in > 0.9) throw SpecError("boundary_measure_estimate: burn-in out of range");
  BoundaryEstimate est;
  est.faces = path.faces;
  est.n_cap = path.params.n_cap;
  const std::size_t cells = static_cast<std::size_t>((est.n_cap + 2) * est.faces);
  est.raw_rate.assign(cells, 0.0);
  est.intrinsic_rate.assign(cells, 0.0);
  const int K = static_cast<int>(path.chunks.size());
  const int first = static_cast<int>(std::ceil(burn_in * K - 1e-9));
  double time = 0.0;
  for (int k = first; k < K; ++k) {
    const auto& c = path.chunks[k];
    time += c.time;
    for (std::size_t i = 0; i < cells; ++i) {
      est.raw_rate[i] += c.ell_raw[i];
      est.intrinsic_rate[i] += c.ell_scaled[i];
    }
  }
  if (!(time > 0.0)) throw SpecError("boundary_measure_estimate: no post-burn-in time");
  for (std::size_t i = 0; i < cells; ++i) {
    est.raw_rate[i] /= time;
    est.intrinsic_rate[i] /= time;
    if (est.raw_rate[i] > 0.0) est.contact = true;
  }
  return est;
}

LayerSeriesCheck layer_series_check(const StationaryDensity1D& nu, const RateField& rates,
                                    const std::optional<ThresholdDomains>& threshold) {
  LayerSeriesCheck res;
  std::vector<ThresholdDomains::Regime> regs;
  if (threshold) regs = threshold->regimes;
  else regs.push_back({0, nu.lo, nu.hi});
  double total = 0.0;
  for (std::size_t r = 0; r < regs.size(); ++r) {
    const int a = regs[r].from_n;
    const double lo = std::max(regs[r].lo, nu.lo), hi = std::min(regs[r].hi, nu.hi);
    std::optional<double> v;
    if (r + 1 < regs.size()) {
      const int b = regs[r + 1].from_n;
      v = integrate_or_diverge([&](double z) { return nu.q(z) * geometric_block(rho_at(rates, z), a, b); }, lo, hi);
    } else {
      v = integrate_or_diverge(
          [&](double z) {
            const double rz = rho_at(rates, z);
            return nu.q(z) * std::pow(rz, a) / (1.0 - rz);
          },
          lo, hi);
    }
    if (!v) {
      res.detail = "diverges on layers from n=" + std::to_string(a) + " over [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "]";
      return res;
    }
    total += *v;
  }
  res.finite = true;
  res.value = total;
  res.detail = "finite";
  return res;
}

}  // namespace envq
