#pragma once

#include <cmath>
#include <map>

#include "nn/params.hpp"

namespace bg::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (AdamW) when > 0
};

//! First/second moment accumulators per parameter plus the shared step count.
template <typename T>
class AdamState {
 public:
  explicit AdamState(const ParamStore<T>& store) {
    for (const auto& [name, e] : store) {
      moments_[name] = {Tensor<T>::zeros(e.value.shape), Tensor<T>::zeros(e.value.shape)};
    }
  }

  int64_t step_count() const { return step_; }

  //! One Adam/AdamW step over every parameter in the store.
  void step(ParamStore<T>& store, const AdamConfig& cfg) {
    step_ += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
    for (auto& [name, e] : store) {
      auto& m = moments_.at(name);
      T* w = e.value.ptr();
      const T* g = e.grad.ptr();
      T* m1 = m.first.ptr();
      T* m2 = m.second.ptr();
      const int64_t n = e.value.numel();
      for (int64_t i = 0; i < n; ++i) {
        if (cfg.weight_decay > 0.0) {
          w[i] -= static_cast<T>(cfg.lr * cfg.weight_decay) * w[i];
        }
        m1[i] = static_cast<T>(cfg.beta1) * m1[i] + static_cast<T>(1.0 - cfg.beta1) * g[i];
        m2[i] = static_cast<T>(cfg.beta2) * m2[i] + static_cast<T>(1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = static_cast<double>(m1[i]) / bc1;
        const double vhat = static_cast<double>(m2[i]) / bc2;
        w[i] -= static_cast<T>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
      }
    }
  }

  //! Serialization access for training-session snapshots.
  std::map<std::string, std::pair<Tensor<T>, Tensor<T>>>& moments() { return moments_; }
  void set_step_count(int64_t s) { step_ = s; }

 private:
  std::map<std::string, std::pair<Tensor<T>, Tensor<T>>> moments_;
  int64_t step_ = 0;
};

//! Scales all gradients so their joint L2 norm is at most max_norm.
//! Returns the pre-clip norm.
template <typename T>
double clip_global_grad_norm(ParamStore<T>& store, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, e] : store) {
    for (T g : e.grad.data) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double total = std::sqrt(sq);
  if (total > max_norm && total > 0.0) {
    const T s = static_cast<T>(max_norm / total);
    for (auto& [name, e] : store) {
      for (T& g : e.grad.data) g *= s;
    }
  }
  return total;
}

}  // namespace bg::nn
