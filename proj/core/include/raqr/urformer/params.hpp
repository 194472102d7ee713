// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "raqr/diff/tape.hpp"
#include "raqr/urformer/config.hpp"

namespace raqr::urformer {

struct ParamInfo {
  std::string name;
  diff::Shape shape;
};

// Canonical parameter census for a given config and problem size: names,
// shapes and order. Init, checkpoint validation, the optimizer and
// `inspect-checkpoint` all derive from this single list.
std::vector<ParamInfo> parameter_spec(const URformerConfig& cfg,
                                      std::size_t num_antennas,
                                      std::size_t num_users);

// All trainable parameters, stored flat per named tensor in spec order.
class URformerParams {
 public:
  URformerParams() = default;
  URformerParams(URformerConfig cfg, std::size_t num_antennas, std::size_t num_users);

  // Variance-scaled random init. The residual output projection of every
  // Former block starts at zero, so an untrained layer reduces to its gated
  // filtering + linear estimation path.
  static URformerParams init(const URformerConfig& cfg, std::size_t num_antennas,
                             std::size_t num_users, std::uint64_t seed);

  const URformerConfig& config() const { return cfg_; }
  std::size_t num_antennas() const { return num_antennas_; }
  std::size_t num_users() const { return num_users_; }

  const std::vector<ParamInfo>& spec() const { return spec_; }
  std::size_t tensor_count() const { return spec_.size(); }

  std::vector<double>& values(std::size_t index) { return values_[index]; }
  const std::vector<double>& values(std::size_t index) const { return values_[index]; }
  std::vector<double>& values(const std::string& name) { return values_[index_of(name)]; }
  const std::vector<double>& values(const std::string& name) const {
    return values_[index_of(name)];
  }
  std::size_t index_of(const std::string& name) const;

  // Name prefix of layer t's tensors ("layer3." or "shared." when tied).
  std::string layer_prefix(std::size_t t) const;

  std::size_t total_parameter_count() const;

 private:
  URformerConfig cfg_;
  std::size_t num_antennas_ = 0, num_users_ = 0;
  std::vector<ParamInfo> spec_;
  std::vector<std::vector<double>> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Parameters materialized as tape leaves, in spec order.
class ParamLeaves {
 public:
  ParamLeaves(diff::Tape& tape, const URformerParams& params, bool requires_grad);
  const diff::Var& at(const std::string& name) const;
  const diff::Var& at(std::size_t index) const { return vars_[index]; }
  std::size_t size() const { return vars_.size(); }

 private:
  const URformerParams* params_;
  std::vector<diff::Var> vars_;
};

}  // namespace raqr::urformer
