#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bg {

//! CRC-32 (IEEE 802.3, reflected) over a byte range.
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

//! Little-endian binary writer over a growable byte buffer.
class BinWriter {
 public:
  void put_u8(uint8_t v) { buf_.push_back(v); }
  void put_u32(uint32_t v) { put_raw(&v, 4); }
  void put_u64(uint64_t v) { put_raw(&v, 8); }
  void put_i64(int64_t v) { put_raw(&v, 8); }
  void put_f32(float v) { put_raw(&v, 4); }
  void put_f64(double v) { put_raw(&v, 8); }

  void put_bytes(const void* p, size_t n) { put_raw(p, n); }

  void put_string(const std::string& s) {
    put_u32(static_cast<uint32_t>(s.size()));
    put_raw(s.data(), s.size());
  }

  void put_f32_array(const float* p, size_t n) {
    put_u64(n);
    put_raw(p, n * 4);
  }

  void put_f64_array(const double* p, size_t n) {
    put_u64(n);
    put_raw(p, n * 8);
  }

  void put_u64_array(const uint64_t* p, size_t n) {
    put_u64(n);
    put_raw(p, n * 8);
  }

  const std::vector<uint8_t>& bytes() const { return buf_; }
  size_t size() const { return buf_.size(); }

 private:
  void put_raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }

  std::vector<uint8_t> buf_;
};

//! Bounds-checked little-endian reader; throws std::runtime_error on under-run.
class BinReader {
 public:
  BinReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}
  explicit BinReader(const std::vector<uint8_t>& buf) : data_(buf.data()), len_(buf.size()) {}

  uint8_t get_u8() { return take<uint8_t>(); }
  uint32_t get_u32() { return take<uint32_t>(); }
  uint64_t get_u64() { return take<uint64_t>(); }
  int64_t get_i64() { return take<int64_t>(); }
  float get_f32() { return take<float>(); }
  double get_f64() { return take<double>(); }

  std::string get_string() {
    const uint32_t n = get_u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

  std::vector<float> get_f32_array() {
    const uint64_t n = get_u64();
    need(n * 4);
    std::vector<float> v(n);
    std::memcpy(v.data(), data_ + pos_, n * 4);
    pos_ += n * 4;
    return v;
  }

  std::vector<double> get_f64_array() {
    const uint64_t n = get_u64();
    need(n * 8);
    std::vector<double> v(n);
    std::memcpy(v.data(), data_ + pos_, n * 8);
    pos_ += n * 8;
    return v;
  }

  std::vector<uint64_t> get_u64_array() {
    const uint64_t n = get_u64();
    need(n * 8);
    std::vector<uint64_t> v(n);
    std::memcpy(v.data(), data_ + pos_, n * 8);
    pos_ += n * 8;
    return v;
  }

  void get_bytes(void* out, size_t n) {
    need(n);
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
  }

  size_t pos() const { return pos_; }
  size_t remaining() const { return len_ - pos_; }
  const uint8_t* cursor() const { return data_ + pos_; }
  void skip(size_t n) { need(n); pos_ += n; }

 private:
  template <typename T>
  T take() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void need(size_t n) const {
    if (pos_ + n > len_) throw std::runtime_error("binary input truncated");
  }

  const uint8_t* data_;
  size_t len_;
  size_t pos_ = 0;
};

//! Writes the buffer atomically-ish (tmp file + rename); throws on I/O failure.
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);

//! Reads a whole file; throws std::runtime_error when missing/unreadable.
std::vector<uint8_t> read_file(const std::string& path);

}  // namespace bg
