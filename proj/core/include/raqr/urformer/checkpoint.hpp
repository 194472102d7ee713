// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container: the parameter tensors, the URformerConfig, the
// scenario they were trained for, the exact pilot matrix (the linear stage
// adapts to a specific (S^T)^+, so evaluation must reuse it) and training
// metadata. Loading validates every tensor name and shape against the
// config-implied parameter census.
#pragma once

#include <cstdint>
#include <string>

#include "raqr/channel/scenario.hpp"
#include "raqr/linops/matrix.hpp"
#include "raqr/urformer/params.hpp"

namespace raqr::urformer {

struct CheckpointMeta {
  std::size_t epoch = 0;
  std::uint64_t seed = 0;
  double val_nmse_db = 0.0;
};

struct Checkpoint {
  URformerParams params;
  channel::ScenarioConfig scenario;
  ComplexMatrix pilots;  // P x K
  CheckpointMeta meta;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace raqr::urformer
