// SPDX-License-Identifier: Apache-2.0
//
// On-disk dataset of scenario realizations: one tensor container holding the
// scenario config, the shared pilot matrix and packed per-sample tensors
//   H.re/H.im  [N, M, K]   true channels
//   B.re/B.im  [N, M, P]   LO matrices
//   Z          [N, M, P]   magnitude observations
//   sigma2     [N]         noise variances
//   snr_db     [N]         per-sample SNR targets
// Pilots are fixed across the dataset; the manifest records config and seed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raqr/channel/model.hpp"

namespace raqr::channel {

struct Dataset {
  ScenarioConfig scenario;   // snr_db holds the sweep midpoint; per-sample
                             // targets live in snr_db_targets
  std::uint64_t seed = 0;
  double snr_lo_db = 0.0, snr_hi_db = 0.0;
  ComplexMatrix S;           // P x K, shared
  std::vector<ComplexMatrix> H;   // N of M x K
  std::vector<ComplexMatrix> B;   // N of M x P
  std::vector<RealMatrix> Z;      // N of M x P
  std::vector<double> sigma2;
  std::vector<double> snr_db_targets;

  std::size_t size() const { return H.size(); }

  MeasurementSet measurement(std::size_t i) const {
    return MeasurementSet{S, B[i], sigma2[i], Z[i]};
  }
};

void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(const std::string& path);

}  // namespace raqr::channel
