// SPDX-License-Identifier: Apache-2.0
#include "raqr/urformer/params.hpp"

#include <cmath>

#include "raqr/rng.hpp"

namespace raqr::urformer {

std::vector<ParamInfo> parameter_spec(const URformerConfig& cfg,
                                      std::size_t num_antennas,
                                      std::size_t num_users) {
  cfg.validate();
  const std::size_t d = cfg.d_model, f = cfg.ffn_width(), h = cfg.filternet_hidden;
  const std::size_t token_dim = 2 * num_antennas;
  std::vector<ParamInfo> spec;
  const std::size_t blocks = cfg.share_layer_params ? 1 : cfg.num_layers;
  for (std::size_t t = 0; t < blocks; ++t) {
    const std::string p =
        cfg.share_layer_params ? std::string("shared.") : "layer" + std::to_string(t) + ".";
    spec.push_back({p + "filternet.w1", {1, h}});
    spec.push_back({p + "filternet.b1", {1, h}});
    spec.push_back({p + "filternet.w2", {h, h}});
    spec.push_back({p + "filternet.b2", {1, h}});
    spec.push_back({p + "filternet.w3", {h, 1}});
    spec.push_back({p + "filternet.b3", {1, 1}});
    spec.push_back({p + "gate_logit", {1, 1}});
    spec.push_back({p + "former.w_proj", {token_dim, d}});
    spec.push_back({p + "former.p_pos", {num_users, d}});
    for (std::size_t l = 0; l < cfg.num_encoders; ++l) {
      const std::string e = p + "former.enc" + std::to_string(l) + ".";
      spec.push_back({e + "ln1.gain", {1, d}});
      spec.push_back({e + "ln1.bias", {1, d}});
      spec.push_back({e + "attn.wq", {d, d}});
      spec.push_back({e + "attn.bq", {1, d}});
      spec.push_back({e + "attn.wk", {d, d}});
      spec.push_back({e + "attn.bk", {1, d}});
      spec.push_back({e + "attn.wv", {d, d}});
      spec.push_back({e + "attn.bv", {1, d}});
      spec.push_back({e + "attn.wo", {d, d}});
      spec.push_back({e + "attn.bo", {1, d}});
      spec.push_back({e + "ln2.gain", {1, d}});
      spec.push_back({e + "ln2.bias", {1, d}});
      spec.push_back({e + "ffn.w1", {d, f}});
      spec.push_back({e + "ffn.b1", {1, f}});
      spec.push_back({e + "ffn.w2", {f, d}});
      spec.push_back({e + "ffn.b2", {1, d}});
    }
    spec.push_back({p + "former.out.w", {d, token_dim}});
    spec.push_back({p + "former.out.b", {1, token_dim}});
  }
  return spec;
}

URformerParams::URformerParams(URformerConfig cfg, std::size_t num_antennas,
                               std::size_t num_users)
    : cfg_(cfg), num_antennas_(num_antennas), num_users_(num_users) {
  spec_ = parameter_spec(cfg_, num_antennas_, num_users_);
  values_.resize(spec_.size());
  for (std::size_t i = 0; i < spec_.size(); ++i) {
    values_[i].assign(spec_[i].shape.count(), 0.0);
    index_.emplace(spec_[i].name, i);
  }
}

std::size_t URformerParams::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter tensor '" + name + "'");
  return it->second;
}

std::string URformerParams::layer_prefix(std::size_t t) const {
  if (t >= cfg_.num_layers)
    throw ConfigError("layer index " + std::to_string(t) + " out of range (T_UR=" +
                      std::to_string(cfg_.num_layers) + ")");
  return cfg_.share_layer_params ? std::string("shared.")
                                 : "layer" + std::to_string(t) + ".";
}

std::size_t URformerParams::total_parameter_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool contains(const std::string& s, const std::string& sub) {
  return s.find(sub) != std::string::npos;
}

}  // namespace

URformerParams URformerParams::init(const URformerConfig& cfg,
                                    std::size_t num_antennas, std::size_t num_users,
                                    std::uint64_t seed) {
  URformerParams p(cfg, num_antennas, num_users);
  Rng rng = substream(seed, StreamId::param_init);
  for (std::size_t i = 0; i < p.spec_.size(); ++i) {
    const auto& info = p.spec_[i];
    auto& v = p.values_[i];
    if (ends_with(info.name, "gate_logit")) {
      v[0] = 0.0;  // alpha = 0.5, unbiased blend
    } else if (contains(info.name, "ln1.gain") || contains(info.name, "ln2.gain")) {
      std::fill(v.begin(), v.end(), 1.0);
    } else if (contains(info.name, "former.out.")) {
      // zero residual at init: a fresh layer is pure gated filtering +
      // linear estimation
      std::fill(v.begin(), v.end(), 0.0);
    } else if (contains(info.name, "p_pos")) {
      for (auto& x : v) x = 0.02 * rng.normal();
    } else if (ends_with(info.name, ".b1") || ends_with(info.name, ".b2") ||
               ends_with(info.name, ".b3") || ends_with(info.name, ".bq") ||
               ends_with(info.name, ".bk") || ends_with(info.name, ".bv") ||
               ends_with(info.name, ".bo") || contains(info.name, "ln1.bias") ||
               contains(info.name, "ln2.bias")) {
      std::fill(v.begin(), v.end(), 0.0);
    } else {
      // weight matrices: zero-mean normal, variance 2/(fan_in + fan_out)
      const double std_dev =
          std::sqrt(2.0 / static_cast<double>(info.shape.rows + info.shape.cols));
      for (auto& x : v) x = std_dev * rng.normal();
    }
  }
  return p;
}

ParamLeaves::ParamLeaves(diff::Tape& tape, const URformerParams& params,
                         bool requires_grad)
    : params_(&params) {
  vars_.reserve(params.tensor_count());
  for (std::size_t i = 0; i < params.tensor_count(); ++i)
    vars_.push_back(tape.leaf(params.spec()[i].shape, params.values(i), requires_grad));
}

const diff::Var& ParamLeaves::at(const std::string& name) const {
  return vars_[params_->index_of(name)];
}

}  // namespace raqr::urformer
