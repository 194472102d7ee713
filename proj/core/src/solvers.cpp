// SPDX-License-Identifier: Apache-2.0
#include "raqr/classic/solvers.hpp"

#include <cmath>
#include <limits>

#include "raqr/linops/bessel.hpp"
#include "raqr/linops/pinv.hpp"
#include "raqr/rng.hpp"

namespace raqr::classic {

double objective(const ComplexMatrix& H_hat, const channel::MeasurementSet& meas) {
  const ComplexMatrix y =
      linops::add(linops::matmul(H_hat, linops::transpose(meas.S)), meas.B);
  const RealMatrix resid = linops::subtract(meas.Z, linops::magnitude(y));
  return linops::frob_norm_sq(resid) / static_cast<double>(meas.Z.size());
}

RealMatrix kappa_matrix(const RealMatrix& Z, const RealMatrix& Y_abs, double sigma2) {
  if (!Z.same_shape(Y_abs))
    throw ShapeError("kappa_matrix: Z " + shape_str(Z.rows(), Z.cols()) + " vs |Y| " +
                     shape_str(Y_abs.rows(), Y_abs.cols()));
  if (!(sigma2 > 0.0)) throw DomainError("kappa_matrix: sigma2 must be > 0");
  RealMatrix k(Z.rows(), Z.cols());
  for (std::size_t i = 0; i < k.size(); ++i)
    k.data()[i] = 2.0 * Z.data()[i] * Y_abs.data()[i] / sigma2;
  return k;
}

double nmse(const ComplexMatrix& H_true, const ComplexMatrix& H_hat) {
  if (!H_true.same_shape(H_hat))
    throw ShapeError("nmse: " + shape_str(H_true.rows(), H_true.cols()) + " vs " +
                     shape_str(H_hat.rows(), H_hat.cols()));
  const double denom = linops::frob_norm_sq(H_true);
  if (denom <= 0.0) throw DomainError("nmse: reference channel is zero");
  return linops::frob_norm_sq(linops::subtract(H_true, H_hat)) / denom;
}

double to_db_floored(double nmse_linear) {
  constexpr double kFloorDb = -100.0;
  if (nmse_linear <= 1e-10) return kFloorDb;
  return 10.0 * std::log10(nmse_linear);
}

double nmse_db(const ComplexMatrix& H_true, const ComplexMatrix& H_hat) {
  return to_db_floored(nmse(H_true, H_hat));
}

namespace detail {

SolveResult iterate(const channel::MeasurementSet& meas, const SolverConfig& cfg,
                    double (*filter)(double), const IterObserver& observer) {
  if (cfg.max_iters < 1) throw ConfigError("solver: max_iters must be >= 1");
  const std::size_t m = meas.num_antennas(), p = meas.num_pilots(),
                    k = meas.num_users();
  if (p < k)
    throw ConfigError("solver: P=" + std::to_string(p) + " < K=" + std::to_string(k));

  const ComplexMatrix st = linops::transpose(meas.S);
  if (linops::numerical_rank(st) < k)
    throw ConfigError("solver: pilot matrix S^T is rank-deficient");
  const ComplexMatrix st_pinv = linops::pseudo_inverse(st);

  ComplexMatrix h(m, k);
  switch (cfg.init_policy) {
    case InitPolicy::zeros:
      break;
    case InitPolicy::random_gaussian: {
      Rng rng = substream(cfg.init_seed, StreamId::param_init);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j)
          h.set(i, j, rng.normal_complex(cfg.init_scale * cfg.init_scale));
      break;
    }
    case InitPolicy::provided:
      if (cfg.init_value.rows() != m || cfg.init_value.cols() != k)
        throw ShapeError("solver: provided init is " +
                         shape_str(cfg.init_value.rows(), cfg.init_value.cols()) +
                         ", expected " + shape_str(m, k));
      h = cfg.init_value;
      break;
  }

  SolveResult res;
  if (cfg.record_trajectory) res.objective_trace.reserve(cfg.max_iters);

  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    const ComplexMatrix y = linops::add(linops::matmul(h, st), meas.B);
    ComplexMatrix y_rec = linops::phase_project(meas.Z, y);
    if (filter != nullptr) {
      const RealMatrix kap = kappa_matrix(meas.Z, linops::magnitude(y), meas.sigma2);
      RealMatrix r(kap.rows(), kap.cols());
      for (std::size_t i = 0; i < kap.size(); ++i) r.data()[i] = filter(kap.data()[i]);
      y_rec = linops::hadamard(y_rec, r);
    }
    const ComplexMatrix h_next =
        linops::matmul(linops::subtract(y_rec, meas.B), st_pinv);
    if (!linops::all_finite(h_next))
      throw DivergenceError(
          "solver: non-finite estimate at iteration " + std::to_string(t + 1),
          static_cast<long>(t + 1));

    double rel_change = std::numeric_limits<double>::infinity();
    if (cfg.stop_rel_change > 0.0) {
      const double denom = linops::frob_norm_sq(h);
      if (denom > 0.0)
        rel_change =
            std::sqrt(linops::frob_norm_sq(linops::subtract(h_next, h)) / denom);
    }
    h = h_next;
    res.iters_run = t + 1;
    if (cfg.record_trajectory) res.objective_trace.push_back(objective(h, meas));
    if (observer) observer(t + 1, h);
    if (cfg.stop_rel_change > 0.0 && rel_change < cfg.stop_rel_change) break;
  }
  res.H_hat = std::move(h);
  return res;
}

}  // namespace detail

SolveResult gs_solve(const channel::MeasurementSet& meas, const SolverConfig& cfg,
                     const IterObserver& observer) {
  return detail::iterate(meas, cfg, nullptr, observer);
}

SolveResult emgs_solve(const channel::MeasurementSet& meas, const SolverConfig& cfg,
                       const IterObserver& observer) {
  if (!(meas.sigma2 > 0.0))
    throw ConfigError(
        "emgs_solve: sigma2 must be > 0 (kappa divides by sigma2); "
        "for the noiseless R -> 1 limit use gs_solve");
  return detail::iterate(meas, cfg, &linops::bessel_ratio, observer);
}

}  // namespace raqr::classic
