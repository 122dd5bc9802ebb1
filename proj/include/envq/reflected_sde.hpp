#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "envq/env_core.hpp"
#include "envq/rng.hpp"

namespace envq {

struct SdeState {
  Vec2 z{0.0, 0.0};
  std::vector<double> ell;  // one entry per face
  double t = 0.0;
};

SdeState make_state(const DiffusionEnvSpec& spec, const Vec2& z);

enum class Reflection { fold, clamp };

struct StepOptions {
  Reflection mode = Reflection::fold;
  // Active sub-interval (threshold mode); faces 0/1 are its ends.
  std::optional<std::pair<double, double>> interval;
};

// One Euler step of the time-changed reflected diffusion. The clock t advances
// by dt; scale multiplies drift and covariance.
SdeState step_reflected(const DiffusionEnvSpec& spec, const SdeState& s, double dt, double scale, const Vec2& noise,
                        const StepOptions& opt = {});
// In-place form used by the hot loops.
void advance_reflected(const DiffusionEnvSpec& spec, SdeState& s, double dt, double scale, const Vec2& noise,
                       const StepOptions& opt = {});

// Thinned jump over a step of (already time-changed) length h; the landing
// point is uniform on the active domain.
std::optional<Vec2> sample_jump(const DiffusionEnvSpec& spec, const Vec2& z, double h, Rng& rng,
                                const std::optional<std::pair<double, double>>& interval = std::nullopt);

struct StationaryDensity1D {
  ScalarField a;  // standard deviation a(z); a^2 is the 1-D covariance
  ScalarField b;  // drift
  double lo = 0.0;
  double hi = 1.0;
  double z0 = 0.0;  // lower limit of the exponent integral
  double normalizer = 0.0;
  bool integrable = false;
  bool drift_condition = false;  // integral of |b| / a^2 over D is finite

  // Unnormalized q(z) = 2/a^2 exp(int_{z0}^z 2b/a^2).
  double q(double z) const;
  // q / normalizer.
  double density(double z) const;
  double mass(double z_lo, double z_hi) const;
};

StationaryDensity1D stationary_density_1d(const ScalarField& a, const ScalarField& b, double lo, double hi);
// Density of the environment at level 0 from the spec's drift and covariance.
StationaryDensity1D stationary_density_1d(const DiffusionEnvSpec& spec);

struct Coupling1D {
  bool coupled = false;
  double tau = 0.0;
  bool order_preserved = true;
};

// Synchronous coupling with clamped reflection at level 0 (scale beta_0).
Coupling1D couple_1d(const DiffusionEnvSpec& spec, double z1, double z2, double horizon, double dt, std::uint64_t seed);

struct CouplingFit {
  double alpha = 1.0;
  double gamma = 0.0;
  double r_squared = 0.0;
  double dkw_eps = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
};

struct FitOptions {
  double alpha_cap = 10.0;
  double confidence = 0.95;
  double min_r_squared = 0.9;
};

// gamma: least-squares slope of log survival on its tail (survival between
// max(0.01, 3 eps_DKW) and 0.5); alpha: smallest value >= 1 with
// S(t) <= alpha e^{-gamma t} + eps_DKW on the sample range. Throws
// NumericalError when no exponential with alpha <= alpha_cap fits.
CouplingFit fit_coupling_constants(std::vector<double> samples, const FitOptions& opt = {});

double dkw_epsilon(std::size_t n, double confidence = 0.95);

}  // namespace envq
