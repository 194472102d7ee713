// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raqr/channel/dataset.hpp"
#include "raqr/urformer/checkpoint.hpp"
#include "raqr/urformer/network.hpp"

namespace raqr::train {

struct TrainConfig {
  std::size_t num_samples = 20000;     // dataset generation
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;         // cosine-decayed to lr_min
  double lr_min = 1e-5;
  double snr_lo_db = -5.0, snr_hi_db = 15.0;  // per-sample training SNR draw
  double rsr_db = 10.0;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  double grad_clip_norm = 1.0;
  // Pre-fit every layer's FilterNet to the exact Bessel ratio before
  // training, so the network starts from EM-GS-like behavior.
  bool warm_start_filternet = true;
  std::size_t warm_start_iters = 1500;

  void validate(std::size_t dataset_size) const;
};

struct TrainReport {
  std::vector<double> train_nmse_db;  // per completed epoch
  std::vector<double> val_nmse_db;
  double init_val_nmse_db = 0.0;
  std::size_t best_epoch = 0;         // 0 = initialization
  double best_val_nmse_db = 0.0;
  double wallclock_sec = 0.0;
  std::string checkpoint_path;
  std::uint64_t seed = 0;
  std::size_t parameter_count = 0;

  std::string to_json_string() const;
};

struct TrainOutput {
  urformer::URformerParams params;  // best-validation parameters
  TrainReport report;
};

// Generate a dataset: num_samples independent realizations with per-sample
// SNR uniform over [snr_lo_db, snr_hi_db], pilots drawn once and shared.
channel::Dataset build_dataset(const channel::ScenarioConfig& scen,
                               const TrainConfig& cfg);

// Convenience: build and write in the dataset container format.
void build_dataset_file(const std::string& path, const channel::ScenarioConfig& scen,
                        const TrainConfig& cfg);

// End-to-end training with the normalized-MSE loss, Adam, cosine LR decay
// and global-norm gradient clipping. Deterministic for a fixed config.
// On a non-finite loss the learning rate is halved once and the batch
// retried; a second failure aborts with a DivergenceError naming the
// epoch and batch.
TrainOutput train(const channel::Dataset& dataset, const urformer::URformerConfig& net,
                  const TrainConfig& cfg);

// Mean NMSE (dB of the mean linear ratio) of a parameter set over a slice of
// dataset samples.
double dataset_nmse_db(const channel::Dataset& ds, const std::vector<std::size_t>& idx,
                       const urformer::URformerParams& params);

}  // namespace raqr::train
