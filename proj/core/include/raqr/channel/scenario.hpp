// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "raqr/error.hpp"

namespace raqr::channel {

enum class PilotDesign { random_phase, dft };

std::string to_string(PilotDesign d);
PilotDesign pilot_design_from_string(const std::string& s);

// Everything that defines one simulated scenario. A ScenarioConfig plus its
// seed reproduces channels, pilots, LO and noise bit-for-bit.
struct ScenarioConfig {
  std::size_t num_antennas = 32;           // M
  std::size_t num_users = 4;               // K
  std::size_t num_pilots = 20;             // P
  std::size_t num_clusters = 4;            // L
  std::size_t rays_per_cluster = 10;       // C_l
  double spacing_over_wavelength = 0.5;    // d / lambda
  double snr_db = 10.0;
  double rsr_db = 10.0;                    // LO power over signal power
  std::uint64_t seed = 0;
  PilotDesign pilot_design = PilotDesign::random_phase;

  std::size_t total_rays() const { return num_clusters * rays_per_cluster; }

  // Throws ConfigError on violated invariants (all counts >= 1, P >= K,
  // positive spacing).
  void validate() const;
};

// JSON object text round-trip, used by dataset/checkpoint manifests and the
// CLI config file.
std::string scenario_to_json_string(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json_string(const std::string& text);

}  // namespace raqr::channel
