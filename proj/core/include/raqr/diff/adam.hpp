// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "raqr/error.hpp"

namespace raqr::diff {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment accumulators for one parameter tensor.
struct AdamState {
  std::vector<double> m, v;
  std::int64_t step = 0;
};

// Standard Adam update with bias correction, in place on `params`.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const AdamConfig& cfg);

// Scale all gradients so the global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_global_norm(std::vector<std::vector<double>*> grads, double max_norm);

}  // namespace raqr::diff
