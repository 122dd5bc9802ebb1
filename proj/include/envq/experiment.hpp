#pragma once

#include <string>
#include <vector>

#include "envq/config.hpp"

namespace envq {

struct Assertion {
  std::string name;
  bool passed;
  double value;
  double bound;
  std::string detail;
};

struct ExperimentResult {
  std::vector<Assertion> assertions;
  std::vector<std::string> files;  // written artifacts
  json report;

  bool passed() const;
  // 0 when every assertion passed, 1 otherwise.
  int exit_code() const { return passed() ? 0 : 1; }
};

// Runs the experiment and writes <output>/<kind>-<hash>.csv and .json.
// Throws SpecError for configs that cannot run and envq::Error subclasses
// for runtime failures.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Fixed-precision number formatting used by every CSV artifact.
std::string fmt_num(double x);

}  // namespace envq
