#pragma once

#include <string>
#include <vector>

#include "envq/config.hpp"
#include "envq/env_core.hpp"

namespace envq {

struct BuiltinInfo {
  std::string name;
  bool discrete;
  std::string summary;
  json defaults;  // accepted params and their default values
};

const std::vector<BuiltinInfo>& builtin_catalog();
const BuiltinInfo* find_builtin(const std::string& name);

// params may override any default; unknown keys are rejected.
DiscreteEnvSpec make_discrete_builtin(const std::string& name, const json& params, const std::string& path);
DiffusionEnvSpec make_diffusive_builtin(const std::string& name, const json& params, const std::string& path);

// Human-readable catalog, one entry per builtin.
std::string format_catalog();

}  // namespace envq
