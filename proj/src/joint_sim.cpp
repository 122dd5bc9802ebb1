#include "envq/joint_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "envq/errors.hpp"
#include "envq/rng.hpp"

namespace envq {

namespace {

JointPath run_joint(const DiffusionEnvSpec& spec, const JointState& x0, const JointSimParams& p, std::uint64_t seed,
                    bool threshold) {
  if (!(p.horizon > 0.0) || !(p.dt > 0.0)) throw SpecError("horizon and dt must be positive");
  if ((spec.rates.lambda_bar + spec.rates.mu_bar) * p.dt > 0.1 + 1e-12)
    throw SpecError("dt too large: (lambda_bar + mu_bar) * dt must not exceed 0.1");
  if (p.n_cap < 0 || p.z_bins < 1 || p.chunks < 1) throw SpecError("invalid occupation grid");
  if (threshold && !spec.threshold) throw SpecError("threshold simulation needs threshold_domains");
  if (x0.n < 0) throw SpecError("initial queue length must be nonnegative");

  Rng rng(seed);
  JointPath path;
  path.params = p;
  path.z_lo = spec.domain.coord0_lo();
  path.z_hi = spec.domain.coord0_hi();
  path.faces = static_cast<int>(spec.domain.faces.size());
  const int rows = p.n_cap + 2;
  path.chunks.resize(p.chunks);
  for (auto& c : path.chunks) {
    c.occ.assign(static_cast<std::size_t>(rows * p.z_bins), 0.0);
    c.ell_raw.assign(static_cast<std::size_t>(rows * path.faces), 0.0);
    c.ell_scaled.assign(static_cast<std::size_t>(rows * path.faces), 0.0);
    c.off.assign(static_cast<std::size_t>(rows), 0.0);
  }

  SdeState st = make_state(spec, x0.z);
  if (!x0.ell.empty() && x0.ell.size() == st.ell.size()) st.ell = x0.ell;
  int n = x0.n;
  double t = 0.0;
  const double chunk_len = p.horizon / p.chunks;
  const double inv_width = p.z_bins / (path.z_hi - path.z_lo);
  const double log_dt = std::log(p.dt);
  const double log_hcap = std::log(p.h_cap);
  const bool two_d = spec.dim() == 2;
  std::vector<double> ell_before(st.ell.size());
  StepOptions sopt;
  double next_snapshot = 0.0;
  if (p.log_events) path.events.push_back({0.0, n, st.z});

  while (t < p.horizon) {
    const Rates r = eval_rates(spec.rates, st.z);
    bool active = true;
    if (threshold) {
      active = spec.threshold->contains(n, st.z[0]);
      if (active) sopt.interval = spec.threshold->at(n);
    }

    double dtr = p.dt;
    double h = 0.0;
    double log_scale = 0.0;
    if (active) {
      log_scale = spec.beta.log_at(n);
      if (n > 0) log_scale -= r.rho > 0.0 ? n * std::log(r.rho) : -std::numeric_limits<double>::infinity();
      if (!std::isfinite(log_scale)) {
        if (log_scale < 0.0 || std::isnan(log_scale))
          throw NumericalError("time-change scale is not finite at n=" + std::to_string(n));
        h = p.h_cap;
        dtr = 0.0;
      } else {
        const double lh = std::min(log_dt + log_scale, log_hcap);
        h = std::exp(lh);
        dtr = std::exp(lh - log_scale);
      }
    }
    if (t + dtr > p.horizon) {
      dtr = p.horizon - t;
      if (active && std::isfinite(log_scale)) h = dtr * std::exp(log_scale);
    }

    const int row = std::min(n, p.n_cap + 1);
    const int chunk = std::min(static_cast<int>(t / chunk_len), p.chunks - 1);
    ChunkAccum& acc = path.chunks[chunk];
    int bin = static_cast<int>((st.z[0] - path.z_lo) * inv_width);
    bin = std::clamp(bin, 0, p.z_bins - 1);
    if (active) acc.occ[static_cast<std::size_t>(row * p.z_bins + bin)] += dtr;
    else acc.off[static_cast<std::size_t>(row)] += dtr;
    acc.time += dtr;

    const Vec2 before = st.z;
    if (active) {
      if (h > 0.0) {
        std::copy(st.ell.begin(), st.ell.end(), ell_before.begin());
        Vec2 noise{rng.normal(), two_d ? rng.normal() : 0.0};
        advance_reflected(spec, st, h, 1.0, noise, sopt);
        if (spec.jump) {
          auto land = sample_jump(spec, st.z, h, rng, threshold ? sopt.interval : std::nullopt);
          if (land) st.z = *land;
        }
        const double inv_scale = std::isfinite(log_scale) ? std::exp(-log_scale) : 0.0;
        for (int f = 0; f < path.faces; ++f) {
          const double d = st.ell[f] - ell_before[f];
          if (d != 0.0) {
            acc.ell_raw[static_cast<std::size_t>(row * path.faces + f)] += d;
            acc.ell_scaled[static_cast<std::size_t>(row * path.faces + f)] += d * inv_scale;
          }
        }
      }
    }
    if (!active) {
      path.frozen_displacement += std::abs(st.z[0] - before[0]) + std::abs(st.z[1] - before[1]);
      path.frozen_time += dtr;
    }

    if (dtr > 0.0) {
      const double u = rng.uniform();
      const double up = r.lambda * dtr;
      const double dn = n > 0 ? r.mu * dtr : 0.0;
      int dn_step = 0;
      if (u < up) dn_step = 1;
      else if (u < up + dn) dn_step = -1;
      if (dn_step != 0) {
        n += dn_step;
        ++path.queue_events;
        path.max_n = std::max(path.max_n, n);
        if (p.log_events && path.events.size() < p.max_logged) path.events.push_back({t + dtr, n, st.z});
      }
    }
    t += dtr;
    ++path.steps;
    if (p.snapshot_every > 0.0 && t >= next_snapshot) {
      if (path.snapshots.size() < p.max_logged) path.snapshots.push_back({t, st.z});
      next_snapshot += p.snapshot_every;
    }
  }
  path.final_state = {n, st.z, t, st.ell};
  return path;
}

}  // namespace

JointPath simulate_joint(const DiffusionEnvSpec& spec, const JointState& x0, const JointSimParams& p,
                         std::uint64_t seed) {
  return run_joint(spec, x0, p, seed, false);
}

JointPath simulate_joint_threshold(const DiffusionEnvSpec& spec, const JointState& x0, const JointSimParams& p,
                                   std::uint64_t seed) {
  if (!spec.threshold) throw SpecError("simulate_joint_threshold needs threshold_domains");
  if (!spec.threshold->contains(x0.n, x0.z[0]) && !spec.domain.contains(x0.z))
    throw DomainViolation("initial point outside D");
  return run_joint(spec, x0, p, seed, true);
}

void merge_paths(JointPath& a, const JointPath& b) {
  if (a.chunks.size() != b.chunks.size() || a.params.n_cap != b.params.n_cap || a.params.z_bins != b.params.z_bins ||
      a.faces != b.faces)
    throw SpecError("merge_paths: grids differ");
  for (std::size_t k = 0; k < a.chunks.size(); ++k) {
    auto& x = a.chunks[k];
    const auto& y = b.chunks[k];
    for (std::size_t i = 0; i < x.occ.size(); ++i) x.occ[i] += y.occ[i];
    for (std::size_t i = 0; i < x.off.size(); ++i) x.off[i] += y.off[i];
    for (std::size_t i = 0; i < x.ell_raw.size(); ++i) {
      x.ell_raw[i] += y.ell_raw[i];
      x.ell_scaled[i] += y.ell_scaled[i];
    }
    x.time += y.time;
  }
  a.steps += b.steps;
  a.queue_events += b.queue_events;
  a.max_n = std::max(a.max_n, b.max_n);
  a.frozen_displacement += b.frozen_displacement;
  a.frozen_time += b.frozen_time;
  a.replicas += b.replicas;
}

JointPath simulate_replicas(const DiffusionEnvSpec& spec, const JointState& x0, const JointSimParams& p,
                            std::uint64_t root_seed, int replicas, int threads) {
  if (replicas < 1) throw SpecError("replicas must be at least 1");
  const bool thr = spec.threshold.has_value();
  std::vector<JointPath> out(replicas);
  std::vector<std::exception_ptr> errs(replicas);
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int T = std::max(1, std::min(replicas, threads > 0 ? threads : static_cast<int>(hw)));
  auto work = [&](int w) {
    for (int i = w; i < replicas; i += T) {
      try {
        out[i] = run_joint(spec, x0, p, split_seed(root_seed, static_cast<std::uint64_t>(i)), thr);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  if (T == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < T; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  JointPath merged = std::move(out[0]);
  for (int i = 1; i < replicas; ++i) merge_paths(merged, out[i]);
  return merged;
}

double OccupationMatrix::layer_mass(int n) const {
  double s = 0.0;
  for (int b = 0; b < bins; ++b) s += at(n, b);
  return s;
}

namespace {

OccupationMatrix summarize_range(const JointPath& path, int first, int last, int n_cap, int z_bins) {
  const int pb = path.params.z_bins;
  const int pn = path.params.n_cap;
  if (n_cap < 0) n_cap = pn;
  if (z_bins < 0) z_bins = pb;
  if (n_cap > pn) throw SpecError("occupation_summary: n_cap exceeds the path's");
  if (z_bins < 1 || pb % z_bins != 0) throw SpecError("occupation_summary: bin count must divide the path's");
  const int merge = pb / z_bins;
  OccupationMatrix m;
  m.n_cap = n_cap;
  m.bins = z_bins;
  m.lo = path.z_lo;
  m.hi = path.z_hi;
  m.frac.assign(static_cast<std::size_t>((n_cap + 2) * z_bins), 0.0);
  m.off_support.assign(static_cast<std::size_t>(n_cap + 2), 0.0);
  for (int k = first; k < last; ++k) {
    const auto& c = path.chunks[k];
    m.total_time += c.time;
    for (int r = 0; r < pn + 2; ++r) {
      const int row = std::min(r, n_cap + 1);
      m.off_support[row] += c.off[r];
      for (int b = 0; b < pb; ++b) m.at(row, b / merge) += c.occ[static_cast<std::size_t>(r * pb + b)];
    }
  }
  if (!(m.total_time > 0.0)) throw SpecError("occupation_summary: insufficient post-burn-in mass");
  for (double& f : m.frac) f /= m.total_time;
  for (double& f : m.off_support) f /= m.total_time;
  return m;
}

}  // namespace

OccupationMatrix occupation_summary(const JointPath& path, const SummaryOptions& opt) {
  const int K = static_cast<int>(path.chunks.size());
  int first = opt.first_chunk, last = opt.last_chunk;
  if (first < 0) {
    if (opt.burn_in < 0.0 || opt.burn_in > 0.9)
      throw SpecError("occupation_summary: burn-in removes more than 90% of the path");
    first = static_cast<int>(std::ceil(opt.burn_in * K - 1e-9));
    last = K;
  }
  if (last < 0) last = K;
  if (first >= last || last > K) throw SpecError("occupation_summary: empty chunk range");
  return summarize_range(path, first, last, opt.n_cap, opt.z_bins);
}

std::pair<OccupationMatrix, OccupationMatrix> occupation_halves(const JointPath& path, double burn_in) {
  const int K = static_cast<int>(path.chunks.size());
  if (burn_in < 0.0 || burn_in > 0.9) throw SpecError("occupation_halves: burn-in removes more than 90% of the path");
  const int first = static_cast<int>(std::ceil(burn_in * K - 1e-9));
  const int mid = first + (K - first) / 2;
  if (mid == first || mid == K) throw SpecError("occupation_halves: too few chunks after burn-in");
  return {summarize_range(path, first, mid, -1, -1), summarize_range(path, mid, K, -1, -1)};
}

}  // namespace envq
