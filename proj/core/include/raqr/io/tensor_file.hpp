// SPDX-License-Identifier: Apache-2.0
//
// Single-file tensor container: an 8-byte magic, a length-prefixed JSON
// manifest, then raw little-endian tensor payloads. Both the dataset and the
// checkpoint formats are instances of this container; they differ only in
// manifest fields. Round-trips are bit-exact.
//
//   bytes 0..7   : "RAQRTNS1"
//   bytes 8..15  : u64 LE, manifest byte length
//   manifest     : UTF-8 JSON (keys sorted); contains a "tensors" directory
//                  [{name, dtype: "f64"|"f32", shape, offset, byte_length}]
//                  with offsets relative to the payload start
//   payload      : concatenated raw tensor bytes
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "raqr/error.hpp"

namespace raqr::io {

enum class DType { f64, f32 };

std::string to_string(DType d);
DType dtype_from_string(const std::string& s);

struct Tensor {
  std::vector<std::size_t> shape;
  DType dtype = DType::f64;
  std::vector<double> values;  // f32 payloads are widened on read

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

struct TensorFile {
  // Manifest fields other than the tensor directory, as a JSON object text.
  // Kept as serialized JSON so callers can use arbitrary nested structure
  // without this header depending on a JSON library.
  std::string meta_json = "{}";
  // Insertion order is preserved in the file; names must be unique.
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
  void add(std::string name, Tensor t);
};

void write_tensor_file(const std::string& path, const TensorFile& f);
TensorFile read_tensor_file(const std::string& path);

// Manifest JSON text (meta fields plus tensor directory) without payloads;
// used by `raqrcli inspect-checkpoint`.
std::string read_manifest(const std::string& path);

}  // namespace raqr::io
