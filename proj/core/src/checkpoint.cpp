// SPDX-License-Identifier: Apache-2.0
#include "raqr/urformer/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "raqr/io/tensor_file.hpp"

namespace raqr::urformer {

using nlohmann::json;

namespace {

json config_to_json(const URformerConfig& c) {
  return json{{"num_layers", c.num_layers},
              {"d_model", c.d_model},
              {"num_encoders", c.num_encoders},
              {"num_heads", c.num_heads},
              {"ffn_hidden", c.ffn_width()},
              {"filternet_hidden", c.filternet_hidden},
              {"share_layer_params", c.share_layer_params}};
}

URformerConfig config_from_json(const json& j) {
  URformerConfig c;
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.d_model = j.at("d_model").get<std::size_t>();
  c.num_encoders = j.at("num_encoders").get<std::size_t>();
  c.num_heads = j.at("num_heads").get<std::size_t>();
  c.ffn_hidden = j.at("ffn_hidden").get<std::size_t>();
  c.filternet_hidden = j.at("filternet_hidden").get<std::size_t>();
  c.share_layer_params = j.at("share_layer_params").get<bool>();
  c.validate();
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json meta{{"schema_version", 1},
            {"kind", "checkpoint"},
            {"urformer", config_to_json(ckpt.params.config())},
            {"scenario", json::parse(channel::scenario_to_json_string(ckpt.scenario))},
            {"num_antennas", ckpt.params.num_antennas()},
            {"num_users", ckpt.params.num_users()},
            {"training", {{"epoch", ckpt.meta.epoch},
                          {"seed", ckpt.meta.seed},
                          {"val_nmse_db", ckpt.meta.val_nmse_db}}}};
  io::TensorFile f;
  f.meta_json = meta.dump();

  io::Tensor s_re, s_im;
  s_re.shape = s_im.shape = {ckpt.pilots.rows(), ckpt.pilots.cols()};
  s_re.values.assign(ckpt.pilots.real_part().begin(), ckpt.pilots.real_part().end());
  s_im.values.assign(ckpt.pilots.imag_part().begin(), ckpt.pilots.imag_part().end());
  f.add("pilots.re", std::move(s_re));
  f.add("pilots.im", std::move(s_im));

  for (std::size_t i = 0; i < ckpt.params.tensor_count(); ++i) {
    const auto& info = ckpt.params.spec()[i];
    io::Tensor t;
    t.shape = {info.shape.rows, info.shape.cols};
    t.values = ckpt.params.values(i);
    f.add(info.name, std::move(t));
  }
  io::write_tensor_file(path, f);
}

Checkpoint load_checkpoint(const std::string& path) {
  io::TensorFile f = io::read_tensor_file(path);
  json meta = json::parse(f.meta_json);
  if (meta.value("kind", "") != "checkpoint")
    throw IoError("'" + path + "' is not a checkpoint container");

  Checkpoint ckpt;
  const URformerConfig cfg = config_from_json(meta.at("urformer"));
  ckpt.scenario = channel::scenario_from_json_string(meta.at("scenario").dump());
  const auto m = meta.at("num_antennas").get<std::size_t>();
  const auto k = meta.at("num_users").get<std::size_t>();
  ckpt.params = URformerParams(cfg, m, k);
  ckpt.meta.epoch = meta.at("training").at("epoch").get<std::size_t>();
  ckpt.meta.seed = meta.at("training").at("seed").get<std::uint64_t>();
  ckpt.meta.val_nmse_db = meta.at("training").at("val_nmse_db").get<double>();

  const auto& s_re = f.get("pilots.re");
  const auto& s_im = f.get("pilots.im");
  ckpt.pilots = ComplexMatrix(s_re.shape[0], s_re.shape[1], s_re.values, s_im.values);

  // Validate the tensor census: exactly the spec-implied tensors, each with
  // its expected shape.
  for (std::size_t i = 0; i < ckpt.params.tensor_count(); ++i) {
    const auto& info = ckpt.params.spec()[i];
    if (!f.has(info.name))
      throw ConfigError("checkpoint '" + path + "' is missing tensor '" +
                        info.name + "'");
    const auto& t = f.get(info.name);
    if (t.shape.size() != 2 || t.shape[0] != info.shape.rows ||
        t.shape[1] != info.shape.cols)
      throw ConfigError("checkpoint tensor '" + info.name + "' has wrong shape");
    ckpt.params.values(i) = t.values;
  }
  const std::size_t expected = ckpt.params.tensor_count() + 2;  // + pilots
  if (f.tensors.size() != expected)
    throw ConfigError("checkpoint '" + path + "' holds " +
                      std::to_string(f.tensors.size()) + " tensors, expected " +
                      std::to_string(expected));
  return ckpt;
}

}  // namespace raqr::urformer
