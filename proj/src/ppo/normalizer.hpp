#pragma once

#include <cstdint>
#include <vector>

#include "core/binio.hpp"

namespace bg::ppo {

//! Running per-channel mean/std (Welford). Accumulates in double regardless
//! of what precision consumers use; freeze for evaluation.
class RunningNormalizer {
 public:
  explicit RunningNormalizer(int dim = 0) { reset(dim); }

  void reset(int dim) {
    dim_ = dim;
    count_ = 0.0;
    mean_.assign(dim, 0.0);
    m2_.assign(dim, 0.0);
  }

  int dim() const { return dim_; }
  bool frozen() const { return frozen_; }
  void freeze(bool on) { frozen_ = on; }
  double count() const { return count_; }

  //! Batched Welford update over rows (ignored when frozen).
  void update(const double* rows, int64_t n_rows) {
    if (frozen_ || n_rows == 0) return;
    for (int64_t r = 0; r < n_rows; ++r) {
      count_ += 1.0;
      const double* x = rows + r * dim_;
      for (int i = 0; i < dim_; ++i) {
        const double delta = x[i] - mean_[i];
        mean_[i] += delta / count_;
        m2_[i] += delta * (x[i] - mean_[i]);
      }
    }
  }

  double mean(int i) const { return mean_[i]; }
  double stddev(int i) const {
    if (count_ < 2) return 1.0;
    const double var = m2_[i] / count_;
    return var > 1e-12 ? std::sqrt(var) : 1e-6;
  }

  //! (x - mean) / std, clipped to +-10 standard deviations.
  void normalize(const double* in, float* out, int64_t n_rows) const {
    for (int64_t r = 0; r < n_rows; ++r) {
      for (int i = 0; i < dim_; ++i) {
        double v = (in[r * dim_ + i] - mean_[i]) / stddev(i);
        if (v > 10.0) v = 10.0;
        if (v < -10.0) v = -10.0;
        out[r * dim_ + i] = static_cast<float>(v);
      }
    }
  }

  std::vector<float> mean_f32() const {
    std::vector<float> v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = static_cast<float>(mean_[i]);
    return v;
  }
  std::vector<float> std_f32() const {
    std::vector<float> v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = static_cast<float>(stddev(i));
    return v;
  }

  void serialize(BinWriter& w) const {
    w.put_u32(static_cast<uint32_t>(dim_));
    w.put_f64(count_);
    w.put_f64_array(mean_.data(), mean_.size());
    w.put_f64_array(m2_.data(), m2_.size());
    w.put_u8(frozen_ ? 1 : 0);
  }

  static RunningNormalizer deserialize(BinReader& r) {
    RunningNormalizer n(static_cast<int>(r.get_u32()));
    n.count_ = r.get_f64();
    n.mean_ = r.get_f64_array();
    n.m2_ = r.get_f64_array();
    n.frozen_ = r.get_u8() != 0;
    return n;
  }

 private:
  int dim_ = 0;
  double count_ = 0.0;
  std::vector<double> mean_;
  std::vector<double> m2_;
  bool frozen_ = false;
};

}  // namespace bg::ppo
