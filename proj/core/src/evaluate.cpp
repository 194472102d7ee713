// SPDX-License-Identifier: Apache-2.0
#include "raqr/train/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "raqr/classic/solvers.hpp"
#include "raqr/urformer/network.hpp"

namespace raqr::train {

std::string to_string(Method m) {
  switch (m) {
    case Method::gs: return "gs";
    case Method::emgs: return "emgs";
    case Method::urformer: return "urformer";
    case Method::truth: return "truth";
  }
  throw ConfigError("unknown method");
}

Method method_from_string(const std::string& s) {
  if (s == "gs") return Method::gs;
  if (s == "emgs") return Method::emgs;
  if (s == "urformer") return Method::urformer;
  if (s == "truth") return Method::truth;
  throw ConfigError("unknown method '" + s + "' (gs|emgs|urformer)");
}

namespace {

struct Point {
  channel::ScenarioConfig scen;
  std::string sweep_param;
  double sweep_value;
  const urformer::Checkpoint* ckpt = nullptr;  // paired pilots if present
  ComplexMatrix S;
};

std::vector<Point> build_points(const channel::ScenarioConfig& base,
                                const SweepSpec& sweep, const EvalConfig& cfg,
                                const std::vector<urformer::Checkpoint>& ckpts,
                                bool need_ckpt) {
  std::vector<Point> points;
  if (sweep.kind == SweepKind::single) {
    points.push_back({base, "none", 0.0, nullptr, {}});
  } else if (sweep.kind == SweepKind::snr) {
    for (double v : sweep.values) {
      Point p{base, "snr_db", v, nullptr, {}};
      p.scen.snr_db = v;
      points.push_back(std::move(p));
    }
  } else {
    for (double v : sweep.values) {
      if (v < 1.0 || v != std::floor(v))
        throw ConfigError("pilot sweep values must be positive integers");
      Point p{base, "num_pilots", v, nullptr, {}};
      p.scen.num_pilots = static_cast<std::size_t>(v);
      points.push_back(std::move(p));
    }
  }
  if (sweep.values.empty() && sweep.kind != SweepKind::single)
    throw ConfigError("sweep has no points");

  for (auto& p : points) {
    p.scen.validate();
    // Match a checkpoint by (M, K, P).
    for (const auto& c : ckpts) {
      if (c.params.num_antennas() == p.scen.num_antennas &&
          c.params.num_users() == p.scen.num_users &&
          c.pilots.rows() == p.scen.num_pilots) {
        p.ckpt = &c;
        break;
      }
    }
    if (need_ckpt && p.ckpt == nullptr)
      throw ConfigError("no compatible checkpoint for sweep point " + p.sweep_param +
                        "=" + std::to_string(p.sweep_value) + " (need M=" +
                        std::to_string(p.scen.num_antennas) + ", K=" +
                        std::to_string(p.scen.num_users) + ", P=" +
                        std::to_string(p.scen.num_pilots) + ")");
    if (p.ckpt != nullptr) {
      p.S = p.ckpt->pilots;
    } else {
      Rng rng = substream(cfg.seed, StreamId::pilots, p.scen.num_pilots);
      p.S = generate_pilots(p.scen, rng);
    }
  }
  return points;
}

}  // namespace

std::vector<TrialResult> run_sweep(const channel::ScenarioConfig& base,
                                   const SweepSpec& sweep, const EvalConfig& cfg,
                                   const std::vector<urformer::Checkpoint>& ckpts) {
  if (cfg.methods.empty()) throw ConfigError("run_sweep: no methods selected");
  if (cfg.trials < 1) throw ConfigError("run_sweep: trials must be >= 1");
  const bool wants_urformer =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::urformer) !=
      cfg.methods.end();
  // All checkpoint compatibility is established here, before any computation.
  const std::vector<Point> points =
      build_points(base, sweep, cfg, ckpts, wants_urformer);

  std::vector<TrialResult> rows;
  rows.reserve(cfg.methods.size() * points.size() * cfg.trials);

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const Method method = cfg.methods[mi];
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const Point& pt = points[pi];
      for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        // Shared across methods: the same derived seed reproduces the same
        // measurement set, pairing every comparison.
        const std::uint64_t trial_seed =
            derive_seed(derive_seed(cfg.seed, StreamId::trial, pi), StreamId::trial,
                        trial);
        const channel::Realization r =
            channel::realize_with_pilots(pt.scen, pt.S, trial_seed);

        const auto t0 = std::chrono::steady_clock::now();
        ComplexMatrix h_hat;
        std::size_t iters = 0;
        switch (method) {
          case Method::gs: {
            classic::SolverConfig sc;
            sc.max_iters = cfg.classic_iters;
            auto res = classic::gs_solve(r.meas, sc);
            h_hat = std::move(res.H_hat);
            iters = res.iters_run;
            break;
          }
          case Method::emgs: {
            classic::SolverConfig sc;
            sc.max_iters = cfg.classic_iters;
            auto res = classic::emgs_solve(r.meas, sc);
            h_hat = std::move(res.H_hat);
            iters = res.iters_run;
            break;
          }
          case Method::urformer: {
            h_hat = urformer::urformer_forward(r.meas, pt.ckpt->params);
            iters = pt.ckpt->params.config().num_layers;
            break;
          }
          case Method::truth:
            h_hat = r.chan.H;
            iters = 0;
            break;
        }
        const auto t1 = std::chrono::steady_clock::now();

        TrialResult row;
        row.method = method;
        row.sweep_param = pt.sweep_param;
        row.sweep_value = pt.sweep_value;
        row.trial = trial;
        row.seed = trial_seed;
        row.nmse_linear = classic::nmse(r.chan.H, h_hat);
        row.nmse_db = classic::to_db_floored(row.nmse_linear);
        row.objective = classic::objective(h_hat, r.meas);
        row.iters = iters;
        row.wallclock_ms =
            cfg.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                       : 0.0;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<SweepSummary> summarize(const std::vector<TrialResult>& rows) {
  std::vector<SweepSummary> out;
  auto find = [&](Method m, double v) -> SweepSummary* {
    for (auto& s : out)
      if (s.method == m && s.sweep_value == v) return &s;
    return nullptr;
  };
  std::vector<double> linear_sums;
  for (const auto& r : rows) {
    SweepSummary* s = find(r.method, r.sweep_value);
    if (s == nullptr) {
      out.push_back({r.method, r.sweep_value, 0.0, 0.0, 0});
      linear_sums.push_back(0.0);
      s = &out.back();
    }
    const std::size_t i = static_cast<std::size_t>(s - out.data());
    linear_sums[i] += r.nmse_linear;
    s->mean_objective += r.objective;
    s->trials += 1;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].mean_nmse_db =
        classic::to_db_floored(linear_sums[i] / static_cast<double>(out[i].trials));
    out[i].mean_objective /= static_cast<double>(out[i].trials);
  }
  return out;
}

}  // namespace raqr::train
