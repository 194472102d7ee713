// SPDX-License-Identifier: Apache-2.0
#include "raqr/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "raqr/classic/solvers.hpp"
#include "raqr/diff/adam.hpp"
#include "raqr/linops/pinv.hpp"

namespace raqr::train {

using urformer::ParamLeaves;
using urformer::URformerParams;

void TrainConfig::validate(std::size_t dataset_size) const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ConfigError("train: validation_fraction must lie in (0,1)");
  if (!(snr_lo_db <= snr_hi_db)) throw ConfigError("train: empty SNR interval");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (!(grad_clip_norm > 0.0)) throw ConfigError("train: grad_clip_norm must be > 0");
  const auto train_n = static_cast<std::size_t>(
      std::floor(static_cast<double>(dataset_size) * (1.0 - validation_fraction)));
  if (dataset_size > 0 && batch_size > train_n)
    throw ConfigError("train: batch_size " + std::to_string(batch_size) +
                      " exceeds training split " + std::to_string(train_n));
}

channel::Dataset build_dataset(const channel::ScenarioConfig& scen,
                               const TrainConfig& cfg) {
  scen.validate();
  channel::Dataset ds;
  ds.scenario = scen;
  ds.scenario.rsr_db = cfg.rsr_db;
  ds.scenario.snr_db = 0.5 * (cfg.snr_lo_db + cfg.snr_hi_db);
  ds.scenario.seed = cfg.seed;
  ds.seed = cfg.seed;
  ds.snr_lo_db = cfg.snr_lo_db;
  ds.snr_hi_db = cfg.snr_hi_db;

  Rng pilot_rng = substream(cfg.seed, StreamId::pilots);
  ds.S = generate_pilots(ds.scenario, pilot_rng);

  Rng snr_rng = substream(cfg.seed, StreamId::dataset);
  ds.H.reserve(cfg.num_samples);
  ds.B.reserve(cfg.num_samples);
  ds.Z.reserve(cfg.num_samples);
  for (std::size_t i = 0; i < cfg.num_samples; ++i) {
    channel::ScenarioConfig si = ds.scenario;
    si.snr_db = snr_rng.uniform(cfg.snr_lo_db, cfg.snr_hi_db);
    const std::uint64_t sample_seed = derive_seed(cfg.seed, StreamId::dataset, i + 1);
    channel::Realization r = channel::realize_with_pilots(si, ds.S, sample_seed);
    ds.H.push_back(std::move(r.chan.H));
    ds.B.push_back(std::move(r.meas.B));
    ds.Z.push_back(std::move(r.meas.Z));
    ds.sigma2.push_back(r.meas.sigma2);
    ds.snr_db_targets.push_back(si.snr_db);
  }
  return ds;
}

void build_dataset_file(const std::string& path, const channel::ScenarioConfig& scen,
                        const TrainConfig& cfg) {
  write_dataset(path, build_dataset(scen, cfg));
}

namespace {

// Per-sample loss node: ||H - H_hat||_F^2 / ||H||_F^2 (linear NMSE).
diff::Var nmse_loss(diff::Tape& tape, const diff::CVar& h_hat,
                    const ComplexMatrix& h_true) {
  const diff::CVar ht = diff::constant_cmatrix(tape, h_true);
  const diff::CVar d = diff::csub(h_hat, ht);
  const diff::Var num =
      diff::add(diff::sum(diff::square(d.re)), diff::sum(diff::square(d.im)));
  const double denom = linops::frob_norm_sq(h_true);
  if (denom <= 0.0) throw DomainError("nmse loss: reference channel is zero");
  return diff::scale_const(num, 1.0 / denom);
}

ComplexMatrix checked_pinv_of_st(const ComplexMatrix& S) {
  const ComplexMatrix st = linops::transpose(S);
  if (linops::numerical_rank(st) < st.rows())
    throw ConfigError("train: pilot matrix S^T is rank-deficient");
  return linops::pseudo_inverse(st);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed,
                                          std::uint64_t round) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng = substream(seed, StreamId::shuffle, round);
  // Fisher-Yates
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

double dataset_nmse_db(const channel::Dataset& ds, const std::vector<std::size_t>& idx,
                       const URformerParams& params) {
  const ComplexMatrix st_pinv = checked_pinv_of_st(ds.S);
  double linear_sum = 0.0;
  for (std::size_t i : idx) {
    diff::Tape tape;
    ParamLeaves leaves(tape, params, false);
    const channel::MeasurementSet meas = ds.measurement(i);
    const diff::CVar h_hat =
        urformer::build_urformer(tape, meas, leaves, params, st_pinv);
    linear_sum += nmse_loss(tape, h_hat, ds.H[i]).value()[0];
  }
  return classic::to_db_floored(linear_sum / static_cast<double>(idx.size()));
}

TrainOutput train(const channel::Dataset& ds, const urformer::URformerConfig& net,
                  const TrainConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  net.validate();
  cfg.validate(ds.size());
  if (ds.size() < 2) throw ConfigError("train: dataset needs at least 2 samples");
  const std::size_t m = ds.H[0].rows(), k = ds.H[0].cols();

  URformerParams params = URformerParams::init(net, m, k, cfg.seed);
  if (cfg.warm_start_filternet) {
    const std::size_t blocks = net.share_layer_params ? 1 : net.num_layers;
    for (std::size_t t = 0; t < blocks; ++t)
      urformer::fit_filternet_to_bessel(params, t,
                                        derive_seed(cfg.seed, StreamId::filternet_fit, t),
                                        cfg.warm_start_iters);
  }

  // Deterministic split: one shuffle, tail becomes validation.
  const std::vector<std::size_t> perm = shuffled_indices(ds.size(), cfg.seed, 0);
  std::size_t val_n = static_cast<std::size_t>(
      std::llround(static_cast<double>(ds.size()) * cfg.validation_fraction));
  val_n = std::clamp<std::size_t>(val_n, 1, ds.size() - 1);
  std::vector<std::size_t> train_idx(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(val_n));
  std::vector<std::size_t> val_idx(perm.end() - static_cast<std::ptrdiff_t>(val_n), perm.end());

  const ComplexMatrix st_pinv = checked_pinv_of_st(ds.S);

  TrainReport report;
  report.seed = cfg.seed;
  report.parameter_count = params.total_parameter_count();
  report.init_val_nmse_db = dataset_nmse_db(ds, val_idx, params);
  report.best_val_nmse_db = report.init_val_nmse_db;
  report.best_epoch = 0;

  URformerParams best = params;

  const std::size_t tensors = params.tensor_count();
  std::vector<std::vector<double>> grad_acc(tensors);
  std::vector<diff::AdamState> adam_states(tensors);
  const std::size_t batches_per_epoch =
      (train_idx.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = std::max<std::size_t>(1, cfg.epochs * batches_per_epoch);
  std::size_t step = 0;
  double lr_scale = 1.0;  // halved once on a non-finite loss

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_idx);
    {
      // reshuffle within the training split each epoch
      const std::vector<std::size_t> p2 =
          shuffled_indices(order.size(), cfg.seed, epoch);
      std::vector<std::size_t> shuffled(order.size());
      for (std::size_t i = 0; i < order.size(); ++i) shuffled[i] = order[p2[i]];
      order.swap(shuffled);
    }

    double epoch_linear_sum = 0.0;
    std::size_t epoch_samples = 0;

    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, order.size());
      if (lo >= hi) break;

      bool retried = false;
      while (true) {
        for (auto& g : grad_acc) g.clear();
        for (std::size_t t = 0; t < tensors; ++t)
          grad_acc[t].assign(params.values(t).size(), 0.0);

        double batch_linear_sum = 0.0;
        bool finite = true;
        for (std::size_t s = lo; s < hi && finite; ++s) {
          const std::size_t i = order[s];
          diff::Tape tape;
          ParamLeaves leaves(tape, params, true);
          const channel::MeasurementSet meas = ds.measurement(i);
          const diff::CVar h_hat =
              urformer::build_urformer(tape, meas, leaves, params, st_pinv);
          const diff::Var loss = nmse_loss(tape, h_hat, ds.H[i]);
          const double lv = loss.value()[0];
          if (!std::isfinite(lv)) {
            finite = false;
            break;
          }
          batch_linear_sum += lv;
          tape.backward(loss);
          for (std::size_t t = 0; t < tensors; ++t) {
            const auto& g = leaves.at(t).grad();
            for (std::size_t j = 0; j < g.size(); ++j) grad_acc[t][j] += g[j];
          }
        }

        if (finite) {
          const double inv_bs = 1.0 / static_cast<double>(hi - lo);
          std::vector<std::vector<double>*> gptrs;
          gptrs.reserve(tensors);
          for (auto& g : grad_acc) {
            for (double& v : g) v *= inv_bs;
            gptrs.push_back(&g);
          }
          diff::clip_global_norm(gptrs, cfg.grad_clip_norm);

          const double progress =
              static_cast<double>(step) / static_cast<double>(total_steps);
          diff::AdamConfig adam;
          adam.lr = lr_scale * (cfg.lr_min + 0.5 * (cfg.learning_rate - cfg.lr_min) *
                                                 (1.0 + std::cos(std::numbers::pi * progress)));
          for (std::size_t t = 0; t < tensors; ++t)
            diff::adam_step(params.values(t), grad_acc[t], adam_states[t], adam);
          ++step;
          epoch_linear_sum += batch_linear_sum;
          epoch_samples += hi - lo;
          break;
        }
        if (retried)
          throw DivergenceError("train: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(b + 1) + " (after LR halving)",
                                static_cast<long>(epoch));
        retried = true;
        lr_scale *= 0.5;
        std::cerr << "train: non-finite loss at epoch " << epoch << ", batch "
                  << (b + 1) << "; halving learning rate and retrying\n";
      }
    }

    report.train_nmse_db.push_back(
        classic::to_db_floored(epoch_linear_sum / static_cast<double>(epoch_samples)));
    report.val_nmse_db.push_back(dataset_nmse_db(ds, val_idx, params));
    if (report.val_nmse_db.back() < report.best_val_nmse_db) {
      report.best_val_nmse_db = report.val_nmse_db.back();
      report.best_epoch = epoch;
      best = params;
    }
  }

  report.wallclock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return TrainOutput{std::move(best), std::move(report)};
}

std::string TrainReport::to_json_string() const {
  nlohmann::json j{{"train_nmse_db", train_nmse_db},
                   {"val_nmse_db", val_nmse_db},
                   {"init_val_nmse_db", init_val_nmse_db},
                   {"best_epoch", best_epoch},
                   {"best_val_nmse_db", best_val_nmse_db},
                   {"wallclock_sec", wallclock_sec},
                   {"checkpoint_path", checkpoint_path},
                   {"seed", seed},
                   {"parameter_count", parameter_count}};
  return j.dump(2);
}

}  // namespace raqr::train
