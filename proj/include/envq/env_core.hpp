#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace envq {

using Vec2 = std::array<double, 2>;

// Named scalar function of an environment point; serializable by design.
struct ScalarField {
  enum class Kind { constant, linear, table, pole };

  Kind kind = Kind::constant;
  double c0 = 0.0;  // constant value | intercept | pole strength theta
  double c1 = 0.0;  // slope | pole location
  int coord = 0;
  std::vector<double> knots;
  std::vector<double> values;

  static ScalarField constant(double value);
  static ScalarField linear(double slope, double intercept, int coord = 0);
  // Piecewise-linear interpolation through (knots, values); outside the knot
  // range is an error.
  static ScalarField table(std::vector<double> knots, std::vector<double> values, int coord = 0);
  // theta / (at - z[coord]).
  static ScalarField pole(double theta, double at, int coord = 0);

  double operator()(const Vec2& z) const;
  double operator()(double z) const { return (*this)(Vec2{z, 0.0}); }
  std::string describe() const;
};

struct RateField {
  ScalarField lambda;
  ScalarField mu;
  double lambda_bar = 1.0;
  double mu_bar = 1.0;
};

struct Rates {
  double lambda;
  double mu;
  double rho;
};

// Throws BoundViolation if lambda(z) > lambda_bar, mu(z) < mu_bar, lambda < 0
// or mu <= 0.
Rates eval_rates(const RateField& rf, const Vec2& z);

// Variability coefficients beta_n.
struct BetaSeq {
  enum class Kind { constant, geometric, table };

  Kind kind = Kind::constant;
  double scale = 1.0;
  double base = 1.0;
  std::vector<double> values;  // table; the last value repeats

  static BetaSeq constant(double b = 1.0);
  // scale * base^n
  static BetaSeq geometric(double base, double scale = 1.0);
  static BetaSeq table(std::vector<double> values);

  double log_at(int n) const;
  double operator()(int n) const;
};

// Face {z : normal . z >= offset} with reflection direction r.
struct Face {
  Vec2 normal;
  double offset;
  Vec2 reflection;
};

struct DomainSpec {
  enum class Kind { interval, ray, polygon };

  Kind kind = Kind::interval;
  double lo = 0.0;  // interval/ray lower end
  double hi = 1.0;  // interval upper end or ray cap
  std::vector<Face> faces;

  static DomainSpec interval(double a, double b);
  // [a, inf) simulated on [a, cap] with a reflecting cap.
  static DomainSpec ray(double a, double cap);
  // {z2 >= 0, z2 <= (1 - delta) z1, z_min <= z1 <= z_max}, normal reflection.
  static DomainSpec cone(double delta, double z_min, double z_max);

  int dim() const { return kind == Kind::polygon ? 2 : 1; }
  bool contains(const Vec2& z, double tol = 1e-12) const;
  double diameter() const;
  // Range of coordinate 0, used for binning.
  double coord0_lo() const;
  double coord0_hi() const;
  std::string describe() const;
};

// Piecewise-constant-in-n family of sub-intervals D_n (1-D only).
struct ThresholdDomains {
  struct Regime {
    int from_n;
    double lo;
    double hi;
  };
  std::vector<Regime> regimes;  // sorted by from_n; the first starts at 0

  std::pair<double, double> at(int n) const;
  bool contains(int n, double z) const;
};

struct JumpSpec {
  ScalarField rate;  // total jump intensity
  // Landing law: uniform on the currently active domain.
};

struct DiffusionEnvSpec {
  std::string name;
  DomainSpec domain;
  std::array<ScalarField, 2> drift{ScalarField::constant(0.0), ScalarField::constant(0.0)};
  // Covariance entries Sigma(z)[i][j].
  std::array<std::array<ScalarField, 2>, 2> sigma{
      {{ScalarField::constant(1.0), ScalarField::constant(0.0)},
       {ScalarField::constant(0.0), ScalarField::constant(1.0)}}};
  double ellipticity = 1e-6;  // declared delta
  std::optional<JumpSpec> jump;
  BetaSeq beta;
  RateField rates;
  std::optional<ThresholdDomains> threshold;

  int dim() const { return domain.dim(); }
};

Rates eval_rates(const DiffusionEnvSpec& spec, const Vec2& z);

// Nominal environment intensities tau_n(z_i, z_j) for a finite state list.
struct TauModel {
  enum class Kind { matrix, subsets, shift };
  enum class Mode { cyclic, uniform };

  struct Regime {
    int from_n;
    std::vector<int> members;  // ordered points of D_n
    Mode mode;
  };

  Kind kind = Kind::matrix;
  std::vector<std::vector<double>> base;  // matrix: tau_n = beta_n * base
  std::vector<Regime> regimes;            // subsets: sorted by from_n
  BetaSeq beta;

  // Appends (j, tau_n(i, j)) for j != i with positive rate.
  void row(int n, int i, int num_states, std::vector<std::pair<int, double>>& out) const;
  double rate(int n, int i, int j, int num_states) const;
};

struct DiscreteEnvSpec {
  std::string name;
  std::vector<double> states;  // coordinate value of each state
  std::vector<double> v;       // invariant weights
  RateField rates;
  TauModel tau;

  int size() const { return static_cast<int>(states.size()); }
  Rates rates_at(int i) const { return eval_rates(rates, Vec2{states[i], 0.0}); }
};

struct Check {
  std::string name;
  bool passed;
  double residual;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;
  std::vector<std::string> warnings;

  bool ok() const;
  const Check* find(const std::string& name) const;
};

struct DiscreteValidationOptions {
  int n_check = 40;  // levels n = 0..n_check are checked for balance
  double balance_tol = 1e-10;
};

ValidationReport validate_spec(const DiscreteEnvSpec& spec, const DiscreteValidationOptions& opt = {});
ValidationReport validate_spec(const DiffusionEnvSpec& spec, int grid_points = 10000);

// Checks that gate simulation (structure, not the uniform traffic bound).
bool structurally_valid(const ValidationReport& r);

}  // namespace envq
