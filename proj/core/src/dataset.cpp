// SPDX-License-Identifier: Apache-2.0
#include "raqr/channel/dataset.hpp"

#include <nlohmann/json.hpp>

#include "raqr/io/tensor_file.hpp"

namespace raqr::channel {

using nlohmann::json;

namespace {

// Pack a list of equally shaped matrices into one [N, rows, cols] tensor.
template <typename Part>
io::Tensor pack(const std::vector<ComplexMatrix>& ms, Part part) {
  io::Tensor t;
  const std::size_t n = ms.size();
  const std::size_t r = n ? ms[0].rows() : 0, c = n ? ms[0].cols() : 0;
  t.shape = {n, r, c};
  t.values.reserve(n * r * c);
  for (const auto& m : ms) {
    auto span = part(m);
    t.values.insert(t.values.end(), span.begin(), span.end());
  }
  return t;
}

io::Tensor pack(const std::vector<RealMatrix>& ms) {
  io::Tensor t;
  const std::size_t n = ms.size();
  const std::size_t r = n ? ms[0].rows() : 0, c = n ? ms[0].cols() : 0;
  t.shape = {n, r, c};
  t.values.reserve(n * r * c);
  for (const auto& m : ms)
    t.values.insert(t.values.end(), m.data().begin(), m.data().end());
  return t;
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& ds) {
  json meta{{"schema_version", 1},
            {"kind", "dataset"},
            {"scenario", json::parse(scenario_to_json_string(ds.scenario))},
            {"seed", ds.seed},
            {"snr_lo_db", ds.snr_lo_db},
            {"snr_hi_db", ds.snr_hi_db},
            {"num_samples", ds.size()}};

  io::TensorFile f;
  f.meta_json = meta.dump();

  auto re_of = [](const ComplexMatrix& m) { return m.real_part(); };
  auto im_of = [](const ComplexMatrix& m) { return m.imag_part(); };

  io::Tensor s_re, s_im;
  s_re.shape = s_im.shape = {ds.S.rows(), ds.S.cols()};
  s_re.values.assign(ds.S.real_part().begin(), ds.S.real_part().end());
  s_im.values.assign(ds.S.imag_part().begin(), ds.S.imag_part().end());
  f.add("S.re", std::move(s_re));
  f.add("S.im", std::move(s_im));

  f.add("H.re", pack(ds.H, re_of));
  f.add("H.im", pack(ds.H, im_of));
  f.add("B.re", pack(ds.B, re_of));
  f.add("B.im", pack(ds.B, im_of));
  f.add("Z", pack(ds.Z));

  io::Tensor sig, snr;
  sig.shape = {ds.sigma2.size()};
  sig.values = ds.sigma2;
  snr.shape = {ds.snr_db_targets.size()};
  snr.values = ds.snr_db_targets;
  f.add("sigma2", std::move(sig));
  f.add("snr_db", std::move(snr));

  io::write_tensor_file(path, f);
}

namespace {

std::vector<ComplexMatrix> unpack_complex(const io::Tensor& re, const io::Tensor& im) {
  if (re.shape.size() != 3 || re.shape != im.shape)
    throw IoError("dataset: packed complex tensor must be rank 3 with matching parts");
  const std::size_t n = re.shape[0], r = re.shape[1], c = re.shape[2];
  std::vector<ComplexMatrix> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> vr(re.values.begin() + static_cast<std::ptrdiff_t>(i * r * c),
                           re.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * r * c));
    std::vector<double> vi(im.values.begin() + static_cast<std::ptrdiff_t>(i * r * c),
                           im.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * r * c));
    out.emplace_back(r, c, std::move(vr), std::move(vi));
  }
  return out;
}

std::vector<RealMatrix> unpack_real(const io::Tensor& t) {
  if (t.shape.size() != 3) throw IoError("dataset: packed real tensor must be rank 3");
  const std::size_t n = t.shape[0], r = t.shape[1], c = t.shape[2];
  std::vector<RealMatrix> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(t.values.begin() + static_cast<std::ptrdiff_t>(i * r * c),
                          t.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * r * c));
    out.emplace_back(r, c, std::move(v));
  }
  return out;
}

}  // namespace

Dataset read_dataset(const std::string& path) {
  io::TensorFile f = io::read_tensor_file(path);
  json meta = json::parse(f.meta_json);
  if (meta.value("kind", "") != "dataset")
    throw IoError("'" + path + "' is not a dataset container");

  Dataset ds;
  ds.scenario = scenario_from_json_string(meta.at("scenario").dump());
  ds.seed = meta.at("seed").get<std::uint64_t>();
  ds.snr_lo_db = meta.at("snr_lo_db").get<double>();
  ds.snr_hi_db = meta.at("snr_hi_db").get<double>();

  const auto& s_re = f.get("S.re");
  const auto& s_im = f.get("S.im");
  ds.S = ComplexMatrix(s_re.shape[0], s_re.shape[1], s_re.values, s_im.values);
  ds.H = unpack_complex(f.get("H.re"), f.get("H.im"));
  ds.B = unpack_complex(f.get("B.re"), f.get("B.im"));
  ds.Z = unpack_real(f.get("Z"));
  ds.sigma2 = f.get("sigma2").values;
  ds.snr_db_targets = f.get("snr_db").values;

  const std::size_t n = meta.at("num_samples").get<std::size_t>();
  if (ds.H.size() != n || ds.B.size() != n || ds.Z.size() != n ||
      ds.sigma2.size() != n || ds.snr_db_targets.size() != n)
    throw IoError("dataset '" + path + "': sample count mismatch with manifest");
  return ds;
}

}  // namespace raqr::channel
