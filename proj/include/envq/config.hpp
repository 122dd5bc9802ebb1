#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "envq/env_core.hpp"

namespace envq {

using json = nlohmann::json;

// Typed access to a JSON object with field paths in error messages. Every
// key must be consumed before done(), which rejects the leftovers.
class Fields {
 public:
  Fields(const json& j, std::string path);

  bool has(const std::string& key) const;
  double num(const std::string& key, std::optional<double> def = std::nullopt);
  // Closed range [lo, hi] unless open_lo / open_hi.
  double num_in(const std::string& key, std::optional<double> def, double lo, double hi, bool open_lo = false,
                bool open_hi = false);
  long long integer(const std::string& key, std::optional<long long> def, long long lo, long long hi);
  std::uint64_t seed(const std::string& key, std::uint64_t def);
  bool flag(const std::string& key, bool def);
  std::string str(const std::string& key, std::optional<std::string> def = std::nullopt);
  std::vector<double> nums(const std::string& key, std::optional<std::vector<double>> def = std::nullopt);
  std::vector<int> ints(const std::string& key, std::optional<std::vector<int>> def = std::nullopt);
  std::vector<std::vector<double>> matrix(const std::string& key);
  // Raw sub-document; marks the key consumed.
  const json& sub(const std::string& key);
  json sub_or_empty(const std::string& key);
  std::string path(const std::string& key) const { return path_ + "." + key; }
  void done() const;

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
  const json& get(const std::string& key);
  const json& get_or_missing(const std::string& key);
};

[[noreturn]] void field_error(const std::string& path, const std::string& msg);

ScalarField parse_field(const json& j, const std::string& path);
BetaSeq parse_beta(const json& j, const std::string& path);

struct EnvSection {
  bool discrete = true;
  std::string label;  // builtin name or "custom"
  DiscreteEnvSpec d;
  DiffusionEnvSpec c;
};

EnvSection parse_env(const json& j, const std::string& path);

struct RunSection {
  int n_max = 40;
  double horizon = 1e4;
  double dt = 1e-3;
  double h_cap = 1e-2;
  std::uint64_t seed = 1;
  int replicas = 8;
  int threads = 0;
  int n_cap = 12;
  int bins = 30;
  double burn_in = 0.2;
  int chunks = 50;
};

struct StationaryDiscreteParams {
  double balance_tol = 1e-10;
};

struct StationaryDiffusiveParams {
  std::vector<double> z0{};  // start point; default: lower end of the domain
  int n0 = 0;
  double tv_tol = 0.05;
  double slope_tol = 0.05;
  bool check_slopes = false;
  double boundary_band = 0.25;
  bool check_boundary = false;
};

struct StationaryThresholdParams {
  std::optional<double> z0;  // default: lower end of D_{n0}
  int n0 = 0;
  double layer_tv_tol = 0.05;
  int max_layer = 10;
};

struct RateCertificateParams {
  double alpha = 2.0;
  double gamma = 1.0;
  double lambda_bar = 1.0;
  double mu_bar = 4.0;
  std::optional<double> c;
  std::optional<double> epsilon;
};

struct CouplingHarnessParams {
  int n1 = 3, n2 = 0;
  double z1 = 0.0, z2 = 0.0;  // state index (discrete) or coordinate (diffusive)
  double c = 1.2;
  int samples = 10000;
  int k_max = 10;
  double alpha = 1.0001;                // environment coupling constants
  std::optional<double> gamma;          // discrete default: (1 - q) Lambda
};

struct TvDecayParams {
  double alpha = 1.0001;
  std::vector<int> n0{0, 3, 6};
  int z0 = 0;
  std::vector<double> t_grid{0.5, 1, 2, 4, 8};
};

struct MgfLemmaParams {
  double alpha = 1.5, beta = 1.0, gamma = 1.0, a = 0.5;
  int samples = 100000;
  std::string eta_kind = "exponential";  // exponential | constant
  double eta_value = 1.0;                // rate or constant value
};

using KindParams = std::variant<StationaryDiscreteParams, StationaryDiffusiveParams, StationaryThresholdParams,
                                RateCertificateParams, CouplingHarnessParams, TvDecayParams, MgfLemmaParams>;

struct ExperimentConfig {
  std::string kind;
  std::optional<EnvSection> env;
  RunSection run;
  KindParams params;
  std::string output = "out";
  json canonical;       // parsed document after CLI overrides
  std::string hash;     // FNV-1a 64 of canonical.dump(), 16 hex digits
};

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
};

const std::vector<std::string>& experiment_kinds();

// Throws SpecError with the offending field path.
ExperimentConfig parse_config(json doc, const Overrides& ov = {});
ExperimentConfig load_config(const std::string& path, const Overrides& ov = {});

std::uint64_t fnv1a64(const std::string& s);
std::string hex16(std::uint64_t v);

}  // namespace envq
