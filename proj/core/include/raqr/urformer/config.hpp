// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include "raqr/error.hpp"

namespace raqr::urformer {

struct URformerConfig {
  std::size_t num_layers = 10;       // unrolled layers T_UR
  std::size_t d_model = 64;          // token embedding width
  std::size_t num_encoders = 3;      // transformer encoder blocks per layer
  std::size_t num_heads = 4;
  std::size_t ffn_hidden = 0;        // 0 -> 4 * d_model
  std::size_t filternet_hidden = 16;
  bool share_layer_params = false;

  std::size_t ffn_width() const { return ffn_hidden ? ffn_hidden : 4 * d_model; }

  void validate() const {
    if (num_layers < 1 || d_model < 1 || num_encoders < 1 || num_heads < 1 ||
        filternet_hidden < 1)
      throw ConfigError("urformer: all sizes must be >= 1");
    if (d_model % num_heads != 0)
      throw ConfigError("urformer: d_model=" + std::to_string(d_model) +
                        " not divisible by num_heads=" + std::to_string(num_heads));
  }
};

}  // namespace raqr::urformer
