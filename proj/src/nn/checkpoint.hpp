#pragma once

#include <string>

#include <json.hpp>

#include "nn/params.hpp"

namespace bg::nn {

//! On-disk policy container: JSON descriptor (format version, architecture,
//! normalization references) plus named little-endian float32 arrays with a
//! trailing CRC-32. Save/load round-trips byte-for-byte.
struct Checkpoint {
  nlohmann::json meta;          // descriptor; only ints/strings/bools inside
  ParamStore<float> params;     // named arrays, including norm stats

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  //! Serializes to bytes (used by save and by the training-session snapshot).
  std::vector<uint8_t> to_bytes() const;
  static Checkpoint from_bytes(const std::vector<uint8_t>& bytes);
};

}  // namespace bg::nn
