#include "nn/checkpoint.hpp"

#include <cstring>

#include "core/binio.hpp"

namespace bg::nn {

namespace {
constexpr uint32_t kMagic = 0x4B434742;  // "BGCK"
constexpr uint32_t kVersion = 1;
}  // namespace

std::vector<uint8_t> Checkpoint::to_bytes() const {
  BinWriter w;
  w.put_u32(kMagic);
  w.put_u32(kVersion);
  w.put_string(meta.dump());
  const auto names = params.names();
  w.put_u32(static_cast<uint32_t>(names.size()));
  for (const auto& name : names) {
    const auto& t = params.value(name);
    w.put_string(name);
    w.put_u32(static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) w.put_u32(static_cast<uint32_t>(d));
    w.put_f32_array(t.ptr(), t.data.size());
  }
  auto bytes = w.bytes();
  const uint32_t crc = crc32(bytes.data(), bytes.size());
  BinWriter tail;
  tail.put_u32(crc);
  bytes.insert(bytes.end(), tail.bytes().begin(), tail.bytes().end());
  return bytes;
}

Checkpoint Checkpoint::from_bytes(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 12) throw std::runtime_error("checkpoint: file too short");
  uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  const uint32_t actual = crc32(bytes.data(), bytes.size() - 4);
  if (stored_crc != actual) throw std::runtime_error("checkpoint: CRC mismatch");

  BinReader r(bytes.data(), bytes.size() - 4);
  if (r.get_u32() != kMagic) throw std::runtime_error("checkpoint: bad magic");
  const uint32_t version = r.get_u32();
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.meta = nlohmann::json::parse(r.get_string());
  const uint32_t n = r.get_u32();
  for (uint32_t i = 0; i < n; ++i) {
    const std::string name = r.get_string();
    const uint32_t ndims = r.get_u32();
    std::vector<int> shape(ndims);
    for (auto& d : shape) d = static_cast<int>(r.get_u32());
    auto values = r.get_f32_array();
    ck.params.create(name, shape);
    auto& t = ck.params.value(name);
    if (values.size() != t.data.size()) throw std::runtime_error("checkpoint: array size mismatch");
    t.data = std::move(values);
  }
  if (r.remaining() != 0) throw std::runtime_error("checkpoint: trailing bytes");
  return ck;
}

void Checkpoint::save(const std::string& path) const { write_file(path, to_bytes()); }

Checkpoint Checkpoint::load(const std::string& path) { return from_bytes(read_file(path)); }

}  // namespace bg::nn
