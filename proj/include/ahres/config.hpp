#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ahres/extension.hpp"
#include "ahres/solver.hpp"

namespace ahres {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  EvenMetricModel model;
  Real mu_match = 0.5L;
  Real plateau_a = 1.5L, plateau_b = 3.5L;
  AbsorptionConfig absorption;
  ResonanceRun run;  // grid, modes and solver sections
  Real s = 3;        // Sobolev order of the resonance window
  SweepConfig sweep;
  std::uint64_t seed = 1;
  nlohmann::json resolved;  // input with every default filled in
};

// Strict parse: unknown keys and type errors raise validation errors naming
// the JSON pointer; window thresholds are checked at load.
RunConfig parse_config(const std::string& text);

// FNV-1a 64 of the canonical dump of the resolved config, as 16 hex digits.
std::string config_hash(const nlohmann::json& resolved);

}  // namespace ahres
