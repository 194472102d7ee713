// SPDX-License-Identifier: Apache-2.0
//
// The unrolled estimator. Each of the T_UR layers refines the channel
// estimate with three stages:
//
//   1. gated filtering   — the GS magnitude projection blended with a
//      learned-filter variant: Y_filtered = Y_direct .* FilterNet(kappa),
//      Y_rec = alpha * Y_filtered + (1 - alpha) * Y_direct, alpha = sigmoid(g).
//      FilterNet is a small per-entry MLP on log1p(kappa) that plays the role
//      of the fixed Bessel-ratio filter of EM-GS.
//   2. linear estimation — H_linear = (Y_rec - B) (S^T)^+, pseudo-inverse
//      precomputed once per scenario.
//   3. residual correction — H_hat = H_linear + Former(H_linear), a
//      pre-norm transformer encoder over K user tokens of dimension 2M
//      (real parts stacked on imaginary parts).
//
// Inference entry points mirror this decomposition; training uses
// build_urformer() to assemble the differentiable graph on a caller tape.
#pragma once

#include <cstdint>
#include <optional>

#include "raqr/channel/model.hpp"
#include "raqr/urformer/params.hpp"

namespace raqr::urformer {

// Test and ablation hooks. Defaults reproduce the standard network.
struct ForwardOptions {
  // Replace FilterNet with the exact Bessel ratio R(kappa).
  bool use_exact_bessel = false;
  // Override every layer's gate logit (alpha = sigmoid of this).
  std::optional<double> force_gate_logit;
  // Skip the Former residual (identity correction).
  bool zero_former = false;
  // Incremented once per gated-filter evaluation when set.
  std::size_t* gated_filter_evals = nullptr;
};

// FilterNet weights as tape leaves for one layer.
struct FilterNetVars {
  diff::Var w1, b1, w2, b2, w3, b3;
};

// Entrywise filter MLP: sigmoid(MLP(log1p(kappa))), shape preserving,
// outputs in (0,1).
diff::Var filternet_forward(diff::Tape& tape, const FilterNetVars& psi,
                            const diff::Var& kappa);

// Graph-building core: consumes measurement constants and parameter leaves,
// returns the final estimate H_hat (M x K). st_pinv is (S^T)^+ computed once.
diff::CVar build_urformer(diff::Tape& tape, const channel::MeasurementSet& meas,
                          const ParamLeaves& leaves, const URformerParams& params,
                          const ComplexMatrix& st_pinv,
                          const ForwardOptions& opts = {});

// ---- inference-level operations (scratch tape inside, no gradients) ----

// FilterNet applied to a kappa matrix with the given layer's weights.
RealMatrix filternet_eval(const RealMatrix& kappa, const URformerParams& params,
                          std::size_t layer);

// One gated filtering stage from the previous estimate.
ComplexMatrix gated_filter_step(const ComplexMatrix& h_prev,
                                const channel::MeasurementSet& meas,
                                const URformerParams& params, std::size_t layer,
                                const ForwardOptions& opts = {});

// H_linear = (Y_rec - B) (S^T)^+. Throws ConfigError if S^T is rank-deficient.
ComplexMatrix linear_estimate(const ComplexMatrix& y_rec, const ComplexMatrix& B,
                              const ComplexMatrix& S);

// The Former residual for a given linear estimate.
ComplexMatrix former_forward(const ComplexMatrix& h_linear,
                             const URformerParams& params, std::size_t layer);

// Full T_UR-layer forward pass from H_hat^(0) = 0.
ComplexMatrix urformer_forward(const channel::MeasurementSet& meas,
                               const URformerParams& params,
                               const ForwardOptions& opts = {});

// Fit FilterNet weights to the exact Bessel ratio on kappa in [0, grid_max]
// (supervised pre-fit, also usable as a warm start). Returns the achieved
// max absolute deviation on the training grid.
double fit_filternet_to_bessel(URformerParams& params, std::size_t layer,
                               std::uint64_t seed, std::size_t iters = 4000,
                               double grid_max = 100.0);

}  // namespace raqr::urformer
