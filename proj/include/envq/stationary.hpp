#pragma once

#include <optional>
#include <string>
#include <vector>

#include "envq/discrete_chain.hpp"
#include "envq/env_core.hpp"
#include "envq/joint_sim.hpp"
#include "envq/reflected_sde.hpp"

namespace envq {

// Closed-form invariant law pi({n}, dz) = rho^n(z) nu(dz) / Xi. For a
// threshold spec, layer n lives on D_n and Xi sums over those layers.
class StationaryLaw {
 public:
  enum class Kind { discrete, diffusive, threshold };

  static StationaryLaw discrete(const DiscreteEnvSpec& spec);
  // nu is the level-0 environment law (normalized density on D).
  static StationaryLaw diffusive(const DiffusionEnvSpec& spec);
  static StationaryLaw diffusive(const StationaryDensity1D& nu, const RateField& rates,
                                 std::optional<ThresholdDomains> threshold = std::nullopt);

  Kind kind() const { return kind_; }
  double xi() const { return xi_; }
  // Xi from the truncated layer series plus its geometric tail.
  double xi_series() const { return xi_series_; }
  double rho_bar() const { return rho_bar_; }

  // Discrete: mass pi(n, i). Diffusive: density in z.
  double layer_density(int n, double z) const;
  double layer_mass_discrete(int n, int i) const;
  // pi({n} x [lo, hi]) (intersected with D_n in threshold mode).
  double layer_mass(int n, double lo, double hi) const;
  double queue_marginal(int n) const;
  // Sum over n of the layer densities (diffusive only).
  double env_marginal(double z) const;
  // Support of layer n.
  std::pair<double, double> support(int n) const;
  double rho(double z) const;

  const DiscreteEnvSpec* discrete_spec() const { return discrete_ ? &*discrete_ : nullptr; }
  const StationaryDensity1D* nu() const { return nu_ ? &*nu_ : nullptr; }

 private:
  Kind kind_ = Kind::discrete;
  double xi_ = 0.0;
  double xi_series_ = 0.0;
  double rho_bar_ = 0.0;
  std::optional<DiscreteEnvSpec> discrete_;
  std::optional<StationaryDensity1D> nu_;
  RateField rates_;
  std::optional<ThresholdDomains> threshold_;

  double layer_integral(int n, double lo, double hi) const;
  void compute_xi();
};

// Xi with both forms cross-checked to 1e-8; throws NumericalError on
// divergence or disagreement.
double xi_constant(const DiscreteEnvSpec& spec);
double xi_constant(const DiffusionEnvSpec& spec);

StationaryLaw joint_invariant(const DiscreteEnvSpec& spec);
StationaryLaw joint_invariant(const DiffusionEnvSpec& spec);

// Law masses on the occupation grid (n <= n_cap plus overflow row).
OccupationMatrix law_grid(const StationaryLaw& law, int n_cap, int bins, double lo, double hi);

// Half L1 distance; throws SpecError on mismatched sizes.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

struct LayerComparison {
  int n;
  double empirical_mass;
  double law_mass;
  double conditional_tv;     // z-law within the layer (on D_n in threshold mode)
  double off_support_mass;   // empirical time with z outside D_n
};

struct SlopeFit {
  int bin;
  double z_center;
  double fitted_slope;   // of log occupation(n, bin) over n
  double expected_slope; // log rho(z_center)
  double visits;         // occupation mass in the bin over fitted layers
  int layers;
};

struct ComparisonReport {
  double global_tv = 0.0;  // including the overflow row and off-support mass
  std::vector<LayerComparison> layers;
  std::vector<SlopeFit> slopes;
  double max_layer_tv(int up_to_n) const;
};

struct CompareOptions {
  // Slope fits use layers with at least this much occupation per bin.
  double min_cell_mass = 1e-5;
  int min_layers = 3;
};

ComparisonReport compare_empirical(const StationaryLaw& law, const OccupationMatrix& occ,
                                   const CompareOptions& opt = {});

struct BoundaryEstimate {
  int faces = 0;
  int n_cap = 0;
  // [(n) * faces + f]: ell increments per unit time, split by current n.
  std::vector<double> raw_rate;
  // Same with increments divided by the time-change scale.
  std::vector<double> intrinsic_rate;
  bool contact = false;

  double raw(int n, int f) const { return raw_rate[static_cast<std::size_t>(n * faces + f)]; }
  double intrinsic(int n, int f) const { return intrinsic_rate[static_cast<std::size_t>(n * faces + f)]; }
};

// Uses chunks after the burn-in fraction. contact is false (flagged) when no
// local time accumulated at all.
BoundaryEstimate boundary_measure_estimate(const JointPath& path, double burn_in = 0.2);

// Sum over n of the integral of rho^n q over D_n, layer by layer, for the
// 1-D threshold model. Returns nullopt when the series diverges.
struct LayerSeriesCheck {
  bool finite = false;
  double value = 0.0;
  std::string detail;
};
LayerSeriesCheck layer_series_check(const StationaryDensity1D& nu, const RateField& rates,
                                    const std::optional<ThresholdDomains>& threshold);

}  // namespace envq
