// SPDX-License-Identifier: Apache-2.0
//
// Baseline iterative estimators for the biased phase retrieval problem.
//
// Both solvers alternate between re-synthesizing the complex field from the
// current channel estimate and projecting it onto the measured magnitudes:
//
//   Y     = H_hat S^T + B
//   Y_rec = Z .* exp(i angle(Y))            (GS)
//   Y_rec = Z .* exp(i angle(Y)) .* R(kappa) with kappa = 2 Z .* |Y| / sigma2
//                                            (EM-GS; R = I1/I0 soft filter)
//   H_hat = (Y_rec - B) (S^T)^+
//
// The Bessel-ratio filter shrinks entries whose local SNR proxy kappa is
// small, which suppresses noise amplification at low SNR.
#pragma once

#include <functional>
#include <vector>

#include "raqr/channel/model.hpp"
#include "raqr/linops/matrix.hpp"

namespace raqr::classic {

enum class InitPolicy { zeros, random_gaussian, provided };

struct SolverConfig {
  std::size_t max_iters = 100;
  InitPolicy init_policy = InitPolicy::zeros;
  double init_scale = 1.0;          // random_gaussian only
  std::uint64_t init_seed = 0;      // random_gaussian only
  ComplexMatrix init_value;         // provided only, M x K
  bool record_trajectory = false;
  // Optional relative-change early stop; <= 0 disables (default: run all
  // max_iters for comparability with the fixed-iteration baseline protocol).
  double stop_rel_change = 0.0;
};

struct SolveResult {
  ComplexMatrix H_hat;                  // M x K
  std::vector<double> objective_trace;  // per-iteration residual, if recorded
  std::size_t iters_run = 0;
};

// Called after every iteration with (iteration index, current estimate).
using IterObserver = std::function<void(std::size_t, const ComplexMatrix&)>;

// Gerchberg-Saxton: magnitude projection with no filtering.
SolveResult gs_solve(const channel::MeasurementSet& meas, const SolverConfig& cfg,
                     const IterObserver& observer = {});

// EM variant: magnitude projection weighted by R(kappa). Requires sigma2 > 0
// (kappa divides by sigma2); with sigma2 == 0 use gs_solve, which is the
// R -> 1 limit.
SolveResult emgs_solve(const channel::MeasurementSet& meas, const SolverConfig& cfg,
                       const IterObserver& observer = {});

// Mean squared magnitude misfit: (1/MP) sum_p || z_p - |H_hat s_p + b| ||^2.
double objective(const ComplexMatrix& H_hat, const channel::MeasurementSet& meas);

// kappa = 2 Z .* |Y| / sigma2, the per-entry local-SNR proxy.
RealMatrix kappa_matrix(const RealMatrix& Z, const RealMatrix& Y_abs, double sigma2);

// ||H - H_hat||_F^2 / ||H||_F^2. Throws DomainError when H_true is zero.
double nmse(const ComplexMatrix& H_true, const ComplexMatrix& H_hat);

// 10 log10(nmse), floored at -100 dB so exact recovery stays finite.
double nmse_db(const ComplexMatrix& H_true, const ComplexMatrix& H_hat);
double to_db_floored(double nmse_linear);

namespace detail {
// Shared iteration core. `filter` maps kappa entrywise to a weight in [0,1];
// pass nullptr to skip filtering entirely (plain GS). Exposed so tests can
// substitute e.g. a constant-1 filter.
SolveResult iterate(const channel::MeasurementSet& meas, const SolverConfig& cfg,
                    double (*filter)(double), const IterObserver& observer);
}  // namespace detail

}  // namespace raqr::classic
