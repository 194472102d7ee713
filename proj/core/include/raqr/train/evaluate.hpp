// SPDX-License-Identifier: Apache-2.0
//
// Paired Monte-Carlo evaluation: every method at a sweep point consumes the
// identical measurement sets (same derived per-trial seeds), so method
// comparisons are paired rather than confounded by draw noise.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raqr/channel/model.hpp"
#include "raqr/urformer/checkpoint.hpp"

namespace raqr::train {

enum class Method { gs, emgs, urformer, truth };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

enum class SweepKind { snr, pilot, single };

struct SweepSpec {
  SweepKind kind = SweepKind::single;
  // SNR values in dB, or pilot counts; ignored for single (scenario as-is).
  std::vector<double> values;
};

struct EvalConfig {
  std::vector<Method> methods;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t classic_iters = 100;
  bool timing = false;  // measure per-trial wall time (off keeps runs
                        // byte-identical)
};

struct TrialResult {
  Method method;
  std::string sweep_param;  // "snr_db" | "num_pilots" | "none"
  double sweep_value = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;  // derived per-trial seed, shared across methods
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  double objective = 0.0;
  std::size_t iters = 0;
  double wallclock_ms = 0.0;
};

// Runs every (method, sweep value, trial) cell. A urformer method requires a
// checkpoint whose (M, K, P) and pilots match the sweep point; the check runs
// up front, before any computation. Classic methods at a point with a
// checkpoint reuse the checkpoint's pilots, keeping all methods paired.
std::vector<TrialResult> run_sweep(const channel::ScenarioConfig& base,
                                   const SweepSpec& sweep, const EvalConfig& cfg,
                                   const std::vector<urformer::Checkpoint>& checkpoints);

struct SweepSummary {
  Method method;
  double sweep_value = 0.0;
  double mean_nmse_db = 0.0;  // 10 log10 of the mean linear NMSE
  double mean_objective = 0.0;
  std::size_t trials = 0;
};

std::vector<SweepSummary> summarize(const std::vector<TrialResult>& rows);

}  // namespace raqr::train
