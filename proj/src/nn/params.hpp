#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "nn/tensor.hpp"

namespace bg::nn {

//! Named parameter tensors with gradient buffers. std::map keeps iteration
//! order deterministic for optimizers and serialization.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    Tensor<T> value;
    Tensor<T> grad;
  };

  Tensor<T>& create(const std::string& name, std::vector<int> shape) {
    auto [it, inserted] = entries_.try_emplace(name);
    if (!inserted) throw std::invalid_argument("duplicate parameter: " + name);
    it->second.value = Tensor<T>::zeros(std::move(shape));
    it->second.grad = Tensor<T>::zeros(it->second.value.shape);
    return it->second.value;
  }

  //! U(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  Tensor<T>& create_fan_in(const std::string& name, std::vector<int> shape, int fan_in,
                           RngStream& rng) {
    Tensor<T>& t = create(name, std::move(shape));
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-bound, bound));
    return t;
  }

  Tensor<T>& create_normal(const std::string& name, std::vector<int> shape, double sigma,
                           RngStream& rng) {
    Tensor<T>& t = create(name, std::move(shape));
    for (auto& v : t.data) v = static_cast<T>(rng.normal(0.0, sigma));
    return t;
  }

  Tensor<T>& create_const(const std::string& name, std::vector<int> shape, T fill) {
    Tensor<T>& t = create(name, std::move(shape));
    for (auto& v : t.data) v = fill;
    return t;
  }

  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  Tensor<T>& value(const std::string& name) { return at(name).value; }
  const Tensor<T>& value(const std::string& name) const { return at(name).value; }
  Tensor<T>& grad(const std::string& name) { return at(name).grad; }
  const Tensor<T>& grad(const std::string& name) const { return at(name).grad; }

  void zero_grad() {
    for (auto& [name, e] : entries_) {
      std::fill(e.grad.data.begin(), e.grad.data.end(), T(0));
    }
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    n.reserve(entries_.size());
    for (const auto& [name, e] : entries_) n.push_back(name);
    return n;
  }

  int64_t total_params() const {
    int64_t n = 0;
    for (const auto& [name, e] : entries_) n += e.value.numel();
    return n;
  }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  //! Element-wise copy from another store (shapes must match); used to load
  //! checkpoints and to convert between precisions.
  template <typename U>
  void copy_values_from(const ParamStore<U>& other) {
    for (auto& [name, e] : entries_) {
      const auto& src = other.value(name);
      if (static_cast<size_t>(src.numel()) != e.value.data.size()) {
        throw std::invalid_argument("parameter shape mismatch: " + name);
      }
      for (size_t i = 0; i < e.value.data.size(); ++i) {
        e.value.data[i] = static_cast<T>(src.data[i]);
      }
    }
  }

 private:
  Entry& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::invalid_argument("unknown parameter: " + name);
    return it->second;
  }
  const Entry& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::invalid_argument("unknown parameter: " + name);
    return it->second;
  }

  std::map<std::string, Entry> entries_;
};

}  // namespace bg::nn
