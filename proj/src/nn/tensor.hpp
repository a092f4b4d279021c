#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bg::nn {

//! Dense row-major tensor. T is float for training, double for grad checks.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;

  static Tensor zeros(std::vector<int> shape) {
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(t.count_from_shape(), T(0));
    return t;
  }

  static Tensor scalar(T v) {
    Tensor t;
    t.shape = {1};
    t.data = {v};
    return t;
  }

  static Tensor from(std::vector<int> shape, std::vector<T> values) {
    Tensor t;
    t.shape = std::move(shape);
    t.data = std::move(values);
    if (static_cast<int64_t>(t.data.size()) != t.count_from_shape()) {
      throw std::invalid_argument("tensor value count does not match shape");
    }
    return t;
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }

  int64_t count_from_shape() const {
    int64_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
      n *= d;
    }
    return n;
  }

  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[i]; }

  //! Rows when viewed as a 2-D matrix with the last dim as columns.
  int64_t rows2d() const { return numel() / shape.back(); }
  int cols2d() const { return shape.back(); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  bool all_finite() const {
    for (T v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

using Tensor32 = Tensor<float>;
using Tensor64 = Tensor<double>;

}  // namespace bg::nn
