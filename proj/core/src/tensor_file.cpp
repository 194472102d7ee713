// SPDX-License-Identifier: Apache-2.0
#include "raqr/io/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "tensor container assumes a little-endian host");

namespace raqr::io {

using nlohmann::json;

namespace {
constexpr char kMagic[8] = {'R', 'A', 'Q', 'R', 'T', 'N', 'S', '1'};
}

std::string to_string(DType d) { return d == DType::f64 ? "f64" : "f32"; }

DType dtype_from_string(const std::string& s) {
  if (s == "f64") return DType::f64;
  if (s == "f32") return DType::f32;
  throw IoError("unknown dtype '" + s + "'");
}

const Tensor& TensorFile::get(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw IoError("tensor '" + name + "' not present in container");
}

bool TensorFile::has(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

void TensorFile::add(std::string name, Tensor t) {
  if (has(name)) throw IoError("duplicate tensor name '" + name + "'");
  if (t.values.size() != t.element_count())
    throw ShapeError("tensor '" + name + "': " + std::to_string(t.values.size()) +
                     " values for " + std::to_string(t.element_count()) +
                     " elements");
  tensors.emplace_back(std::move(name), std::move(t));
}

void write_tensor_file(const std::string& path, const TensorFile& f) {
  json manifest = json::parse(f.meta_json);
  if (!manifest.is_object()) throw IoError("meta_json must be a JSON object");

  json dir = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : f.tensors) {
    const std::uint64_t elem = t.element_count();
    const std::uint64_t bytes = elem * (t.dtype == DType::f64 ? 8 : 4);
    dir.push_back({{"name", name},
                   {"dtype", to_string(t.dtype)},
                   {"shape", t.shape},
                   {"offset", offset},
                   {"byte_length", bytes}});
    offset += bytes;
  }
  manifest["tensors"] = dir;
  const std::string mtext = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, 8);
  const std::uint64_t mlen = mtext.size();
  out.write(reinterpret_cast<const char*>(&mlen), 8);
  out.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
  for (const auto& [name, t] : f.tensors) {
    if (t.dtype == DType::f64) {
      out.write(reinterpret_cast<const char*>(t.values.data()),
                static_cast<std::streamsize>(t.values.size() * 8));
    } else {
      std::vector<float> narrow(t.values.begin(), t.values.end());
      out.write(reinterpret_cast<const char*>(narrow.data()),
                static_cast<std::streamsize>(narrow.size() * 4));
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

json parse_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("'" + path + "' is not a tensor container (bad magic)");
  std::uint64_t mlen = 0;
  in.read(reinterpret_cast<char*>(&mlen), 8);
  std::string mtext(mlen, '\0');
  in.read(mtext.data(), static_cast<std::streamsize>(mlen));
  if (!in) throw IoError("truncated manifest in '" + path + "'");
  return json::parse(mtext);
}

}  // namespace

TensorFile read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  json manifest = parse_header(in, path);
  const std::streampos payload_start = in.tellg();

  TensorFile f;
  json dir = manifest.at("tensors");
  manifest.erase("tensors");
  f.meta_json = manifest.dump();

  for (const auto& e : dir) {
    Tensor t;
    t.dtype = dtype_from_string(e.at("dtype").get<std::string>());
    t.shape = e.at("shape").get<std::vector<std::size_t>>();
    const std::uint64_t offset = e.at("offset").get<std::uint64_t>();
    const std::uint64_t bytes = e.at("byte_length").get<std::uint64_t>();
    const std::size_t elem = t.element_count();
    const std::size_t width = t.dtype == DType::f64 ? 8 : 4;
    if (bytes != elem * width)
      throw IoError("tensor '" + e.at("name").get<std::string>() +
                    "' byte length inconsistent with shape in '" + path + "'");
    in.seekg(payload_start + static_cast<std::streamoff>(offset));
    if (t.dtype == DType::f64) {
      t.values.resize(elem);
      in.read(reinterpret_cast<char*>(t.values.data()),
              static_cast<std::streamsize>(bytes));
    } else {
      std::vector<float> narrow(elem);
      in.read(reinterpret_cast<char*>(narrow.data()),
              static_cast<std::streamsize>(bytes));
      t.values.assign(narrow.begin(), narrow.end());
    }
    if (!in) throw IoError("truncated payload in '" + path + "'");
    f.tensors.emplace_back(e.at("name").get<std::string>(), std::move(t));
  }
  return f;
}

std::string read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_header(in, path).dump(2);
}

}  // namespace raqr::io
