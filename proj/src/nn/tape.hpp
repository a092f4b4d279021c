#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "nn/matmul.hpp"
#include "nn/params.hpp"
#include "nn/tensor.hpp"

namespace bg::nn {

//! Reverse-mode autodiff tape over dense tensors. Build a graph with the op
//! methods, call backward(loss) once; parameter gradients accumulate into the
//! bound ParamStore. Ids are indices into the node list; the list order is a
//! valid topological order.
template <typename T>
class Tape {
 public:
  using Id = int;

  explicit Tape(bool check_finite = false) : check_finite_(check_finite) {}

  //! Constant leaf (no gradient).
  Id constant(Tensor<T> value, std::string label = "const") {
    return add_node(std::move(value), false, std::move(label));
  }

  //! Differentiable leaf whose gradient stays on the tape (grad check inputs).
  Id input(Tensor<T> value, std::string label = "input") {
    return add_node(std::move(value), true, std::move(label));
  }

  //! Parameter leaf; after backward() its gradient is added to store.grad(name).
  Id param(ParamStore<T>& store, const std::string& name) {
    Id id = add_node(store.value(name), true, name);
    nodes_[id].external_grad = &store.grad(name);
    return id;
  }

  const Tensor<T>& val(Id id) const { return nodes_[id].value; }
  const Tensor<T>& grad(Id id) const { return nodes_[id].grad; }

  // ---- linear algebra ----

  //! y = x W + b, x viewed as [R, I]; b may be -1 for no bias.
  Id linear(Id x, Id w, Id b) {
    const auto& xv = val(x);
    const auto& wv = val(w);
    const int in = wv.dim(0), out = wv.dim(1);
    require(xv.cols2d() == in, "linear", x, w);
    const int64_t rows = xv.rows2d();
    auto shape = xv.shape;
    shape.back() = out;
    Tensor<T> y = Tensor<T>::zeros(shape);
    mm_nn(xv.ptr(), wv.ptr(), y.ptr(), rows, in, out, false);
    if (b >= 0) {
      const auto& bv = val(b);
      require(bv.numel() == out, "linear bias", b, w);
      for (int64_t r = 0; r < rows; ++r) {
        T* yr = y.ptr() + r * out;
        for (int j = 0; j < out; ++j) yr[j] += bv.data[j];
      }
    }
    Id id = add_node(std::move(y), needs_grad(x) || needs_grad(w) || (b >= 0 && needs_grad(b)), "linear");
    nodes_[id].backfn = [this, x, w, b, rows, in, out](Id self) {
      const Tensor<T>& dy = nodes_[self].grad;
      if (needs_grad(x)) {
        mm_nt(dy.ptr(), val(w).ptr(), grad_buf(x).ptr(), rows, out, in, true);
      }
      if (needs_grad(w)) {
        mm_tn(val(x).ptr(), dy.ptr(), grad_buf(w).ptr(), in, rows, out, true);
      }
      if (b >= 0 && needs_grad(b)) {
        T* db = grad_buf(b).ptr();
        for (int64_t r = 0; r < rows; ++r) {
          const T* dyr = dy.ptr() + r * out;
          for (int j = 0; j < out; ++j) db[j] += dyr[j];
        }
      }
    };
    return id;
  }

  // ---- elementwise ----

  Id elu(Id x) {
    Tensor<T> y = val(x);
    for (auto& v : y.data) v = v > T(0) ? v : std::expm1(v);
    Id id = add_node(std::move(y), needs_grad(x), "elu");
    nodes_[id].backfn = [this, x](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      const auto& xv = val(x);
      const auto& yv = val(self);
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < xv.numel(); ++i) {
        dx[i] += dy.data[i] * (xv.data[i] > T(0) ? T(1) : yv.data[i] + T(1));
      }
    };
    return id;
  }

  Id gelu(Id x) {
    Tensor<T> y = val(x);
    for (auto& v : y.data) {
      const double xd = static_cast<double>(v);
      v = static_cast<T>(0.5 * xd * (1.0 + std::erf(xd * 0.7071067811865475)));
    }
    Id id = add_node(std::move(y), needs_grad(x), "gelu");
    nodes_[id].backfn = [this, x](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      const auto& xv = val(x);
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < xv.numel(); ++i) {
        const double xd = static_cast<double>(xv.data[i]);
        const double cdf = 0.5 * (1.0 + std::erf(xd * 0.7071067811865475));
        const double pdf = std::exp(-0.5 * xd * xd) * 0.3989422804014327;
        dx[i] += dy.data[i] * static_cast<T>(cdf + xd * pdf);
      }
    };
    return id;
  }

  Id exp(Id x) {
    Tensor<T> y = val(x);
    for (auto& v : y.data) v = std::exp(v);
    Id id = add_node(std::move(y), needs_grad(x), "exp");
    nodes_[id].backfn = [this, x](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      const auto& yv = val(self);
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < yv.numel(); ++i) dx[i] += dy.data[i] * yv.data[i];
    };
    return id;
  }

  Id log(Id x) {
    Tensor<T> y = val(x);
    for (auto& v : y.data) v = std::log(v);
    Id id = add_node(std::move(y), needs_grad(x), "log");
    nodes_[id].backfn = [this, x](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      const auto& xv = val(x);
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < xv.numel(); ++i) dx[i] += dy.data[i] / xv.data[i];
    };
    return id;
  }

  Id square(Id x) {
    Tensor<T> y = val(x);
    for (auto& v : y.data) v = v * v;
    Id id = add_node(std::move(y), needs_grad(x), "square");
    nodes_[id].backfn = [this, x](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      const auto& xv = val(x);
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < xv.numel(); ++i) dx[i] += dy.data[i] * T(2) * xv.data[i];
    };
    return id;
  }

  Id neg(Id x) { return scale(x, T(-1)); }

  Id scale(Id x, T c) {
    Tensor<T> y = val(x);
    for (auto& v : y.data) v *= c;
    Id id = add_node(std::move(y), needs_grad(x), "scale");
    nodes_[id].backfn = [this, x, c](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < dy.numel(); ++i) dx[i] += dy.data[i] * c;
    };
    return id;
  }

  Id add_const(Id x, T c) {
    Tensor<T> y = val(x);
    for (auto& v : y.data) v += c;
    Id id = add_node(std::move(y), needs_grad(x), "add_const");
    nodes_[id].backfn = [this, x](Id self) {
      if (!needs_grad(x)) return;
      pass_grad(self, x);
    };
    return id;
  }

  //! Clamp with zero gradient outside [lo, hi].
  Id clamp(Id x, T lo, T hi) {
    Tensor<T> y = val(x);
    for (auto& v : y.data) v = v < lo ? lo : (v > hi ? hi : v);
    Id id = add_node(std::move(y), needs_grad(x), "clamp");
    nodes_[id].backfn = [this, x, lo, hi](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      const auto& xv = val(x);
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < xv.numel(); ++i) {
        if (xv.data[i] > lo && xv.data[i] < hi) dx[i] += dy.data[i];
      }
    };
    return id;
  }

  Id add(Id a, Id b) { return binary(a, b, "add", [](T x, T y) { return x + y; },
                                     [](T, T, T) { return T(1); }, [](T, T, T) { return T(1); }); }

  Id sub(Id a, Id b) { return binary(a, b, "sub", [](T x, T y) { return x - y; },
                                     [](T, T, T) { return T(1); }, [](T, T, T) { return T(-1); }); }

  Id mul(Id a, Id b) {
    return binary(a, b, "mul", [](T x, T y) { return x * y; },
                  [](T, T y, T) { return y; }, [](T x, T, T) { return x; });
  }

  //! Elementwise min; ties route the gradient to a.
  Id min2(Id a, Id b) {
    return binary(a, b, "min2", [](T x, T y) { return x <= y ? x : y; },
                  [](T x, T y, T) { return x <= y ? T(1) : T(0); },
                  [](T x, T y, T) { return x <= y ? T(0) : T(1); });
  }

  //! y[r,:] = x[r,:] * row (row is a 1-D tensor of the last-dim width).
  Id mul_row(Id x, Id row) {
    const auto& xv = val(x);
    const auto& rv = val(row);
    const int cols = xv.cols2d();
    require(rv.numel() == cols, "mul_row", x, row);
    Tensor<T> y = xv;
    const int64_t rows = xv.rows2d();
    for (int64_t r = 0; r < rows; ++r) {
      T* yr = y.ptr() + r * cols;
      for (int j = 0; j < cols; ++j) yr[j] *= rv.data[j];
    }
    Id id = add_node(std::move(y), needs_grad(x) || needs_grad(row), "mul_row");
    nodes_[id].backfn = [this, x, row, rows, cols](Id self) {
      const auto& dy = nodes_[self].grad;
      if (needs_grad(x)) {
        const auto& rv = val(row);
        T* dx = grad_buf(x).ptr();
        for (int64_t r = 0; r < rows; ++r) {
          const T* dyr = dy.ptr() + r * cols;
          T* dxr = dx + r * cols;
          for (int j = 0; j < cols; ++j) dxr[j] += dyr[j] * rv.data[j];
        }
      }
      if (needs_grad(row)) {
        const auto& xv = val(x);
        T* dr = grad_buf(row).ptr();
        for (int64_t r = 0; r < rows; ++r) {
          const T* dyr = dy.ptr() + r * cols;
          const T* xr = xv.ptr() + r * cols;
          for (int j = 0; j < cols; ++j) dr[j] += dyr[j] * xr[j];
        }
      }
    };
    return id;
  }

  //! [R, C] -> [R]: sum over the last dim.
  Id sum_rows(Id x) {
    const auto& xv = val(x);
    const int cols = xv.cols2d();
    const int64_t rows = xv.rows2d();
    Tensor<T> y = Tensor<T>::zeros({static_cast<int>(rows)});
    for (int64_t r = 0; r < rows; ++r) {
      T acc = T(0);
      const T* xr = xv.ptr() + r * cols;
      for (int j = 0; j < cols; ++j) acc += xr[j];
      y.data[r] = acc;
    }
    Id id = add_node(std::move(y), needs_grad(x), "sum_rows");
    nodes_[id].backfn = [this, x, rows, cols](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      T* dx = grad_buf(x).ptr();
      for (int64_t r = 0; r < rows; ++r) {
        const T g = dy.data[r];
        T* dxr = dx + r * cols;
        for (int j = 0; j < cols; ++j) dxr[j] += g;
      }
    };
    return id;
  }

  //! Adds a scalar tensor (shape [1]) to every element.
  Id add_scalar_t(Id x, Id s) {
    require(val(s).numel() == 1, "add_scalar_t", x, s);
    Tensor<T> y = val(x);
    const T sv = val(s).data[0];
    for (auto& v : y.data) v += sv;
    Id id = add_node(std::move(y), needs_grad(x) || needs_grad(s), "add_scalar_t");
    nodes_[id].backfn = [this, x, s](Id self) {
      const auto& dy = nodes_[self].grad;
      if (needs_grad(x)) pass_grad(self, x);
      if (needs_grad(s)) {
        T acc = T(0);
        for (int64_t i = 0; i < dy.numel(); ++i) acc += dy.data[i];
        grad_buf(s).data[0] += acc;
      }
    };
    return id;
  }

  Id mean_all(Id x) {
    const auto& xv = val(x);
    T acc = T(0);
    for (T v : xv.data) acc += v;
    const T inv = T(1) / static_cast<T>(xv.numel());
    Id id = add_node(Tensor<T>::scalar(acc * inv), needs_grad(x), "mean_all");
    nodes_[id].backfn = [this, x, inv](Id self) {
      if (!needs_grad(x)) return;
      const T g = nodes_[self].grad.data[0] * inv;
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < val(x).numel(); ++i) dx[i] += g;
    };
    return id;
  }

  Id sum_all(Id x) {
    const auto& xv = val(x);
    T acc = T(0);
    for (T v : xv.data) acc += v;
    Id id = add_node(Tensor<T>::scalar(acc), needs_grad(x), "sum_all");
    nodes_[id].backfn = [this, x](Id self) {
      if (!needs_grad(x)) return;
      const T g = nodes_[self].grad.data[0];
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < val(x).numel(); ++i) dx[i] += g;
    };
    return id;
  }

  // ---- shape ops ----

  //! [B, T, E] -> [B, E]: picks the final sequence position.
  Id select_last(Id x) {
    const auto& xv = val(x);
    require(xv.ndim() == 3, "select_last", x, x);
    const int b = xv.dim(0), t = xv.dim(1), e = xv.dim(2);
    Tensor<T> y = Tensor<T>::zeros({b, e});
    for (int i = 0; i < b; ++i) {
      const T* src = xv.ptr() + (static_cast<int64_t>(i) * t + (t - 1)) * e;
      std::copy(src, src + e, y.ptr() + static_cast<int64_t>(i) * e);
    }
    Id id = add_node(std::move(y), needs_grad(x), "select_last");
    nodes_[id].backfn = [this, x, b, t, e](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      T* dx = grad_buf(x).ptr();
      for (int i = 0; i < b; ++i) {
        T* dst = dx + (static_cast<int64_t>(i) * t + (t - 1)) * e;
        const T* src = dy.ptr() + static_cast<int64_t>(i) * e;
        for (int j = 0; j < e; ++j) dst[j] += src[j];
      }
    };
    return id;
  }

  //! x[B,T,E] + pos[T,E] broadcast over the batch.
  Id add_pos(Id x, Id pos) {
    const auto& xv = val(x);
    const auto& pv = val(pos);
    require(xv.ndim() == 3 && pv.ndim() == 2 && xv.dim(1) == pv.dim(0) && xv.dim(2) == pv.dim(1),
            "add_pos", x, pos);
    const int b = xv.dim(0);
    const int64_t te = static_cast<int64_t>(xv.dim(1)) * xv.dim(2);
    Tensor<T> y = xv;
    for (int i = 0; i < b; ++i) {
      T* yr = y.ptr() + i * te;
      for (int64_t j = 0; j < te; ++j) yr[j] += pv.data[j];
    }
    Id id = add_node(std::move(y), needs_grad(x) || needs_grad(pos), "add_pos");
    nodes_[id].backfn = [this, x, pos, b, te](Id self) {
      const auto& dy = nodes_[self].grad;
      if (needs_grad(x)) pass_grad(self, x);
      if (needs_grad(pos)) {
        T* dp = grad_buf(pos).ptr();
        for (int i = 0; i < b; ++i) {
          const T* dyr = dy.ptr() + i * te;
          for (int64_t j = 0; j < te; ++j) dp[j] += dyr[j];
        }
      }
    };
    return id;
  }

  // ---- normalization / attention / regularization ----

  Id layer_norm(Id x, Id gamma, Id beta, T eps = T(1e-5)) {
    const auto& xv = val(x);
    const int cols = xv.cols2d();
    const int64_t rows = xv.rows2d();
    require(val(gamma).numel() == cols && val(beta).numel() == cols, "layer_norm", x, gamma);
    Tensor<T> y = Tensor<T>::zeros(xv.shape);
    Tensor<T> xhat = Tensor<T>::zeros(xv.shape);
    Tensor<T> inv_std = Tensor<T>::zeros({static_cast<int>(rows)});
    const auto& gv = val(gamma);
    const auto& bv = val(beta);
    for (int64_t r = 0; r < rows; ++r) {
      const T* xr = xv.ptr() + r * cols;
      T mean = T(0);
      for (int j = 0; j < cols; ++j) mean += xr[j];
      mean /= static_cast<T>(cols);
      T var = T(0);
      for (int j = 0; j < cols; ++j) var += (xr[j] - mean) * (xr[j] - mean);
      var /= static_cast<T>(cols);
      const T is = T(1) / std::sqrt(var + eps);
      inv_std.data[r] = is;
      T* hr = xhat.ptr() + r * cols;
      T* yr = y.ptr() + r * cols;
      for (int j = 0; j < cols; ++j) {
        hr[j] = (xr[j] - mean) * is;
        yr[j] = gv.data[j] * hr[j] + bv.data[j];
      }
    }
    Id id = add_node(std::move(y), needs_grad(x) || needs_grad(gamma) || needs_grad(beta), "layer_norm");
    nodes_[id].aux.push_back(std::move(xhat));
    nodes_[id].aux.push_back(std::move(inv_std));
    nodes_[id].backfn = [this, x, gamma, beta, rows, cols](Id self) {
      const auto& dy = nodes_[self].grad;
      const auto& xhat = nodes_[self].aux[0];
      const auto& inv_std = nodes_[self].aux[1];
      const auto& gv = val(gamma);
      if (needs_grad(gamma)) {
        T* dg = grad_buf(gamma).ptr();
        for (int64_t r = 0; r < rows; ++r) {
          const T* dyr = dy.ptr() + r * cols;
          const T* hr = xhat.ptr() + r * cols;
          for (int j = 0; j < cols; ++j) dg[j] += dyr[j] * hr[j];
        }
      }
      if (needs_grad(beta)) {
        T* db = grad_buf(beta).ptr();
        for (int64_t r = 0; r < rows; ++r) {
          const T* dyr = dy.ptr() + r * cols;
          for (int j = 0; j < cols; ++j) db[j] += dyr[j];
        }
      }
      if (needs_grad(x)) {
        T* dx = grad_buf(x).ptr();
        const T invc = T(1) / static_cast<T>(cols);
        for (int64_t r = 0; r < rows; ++r) {
          const T* dyr = dy.ptr() + r * cols;
          const T* hr = xhat.ptr() + r * cols;
          const T is = inv_std.data[r];
          T sum_dh = T(0), sum_dh_h = T(0);
          for (int j = 0; j < cols; ++j) {
            const T dh = dyr[j] * gv.data[j];
            sum_dh += dh;
            sum_dh_h += dh * hr[j];
          }
          T* dxr = dx + r * cols;
          for (int j = 0; j < cols; ++j) {
            const T dh = dyr[j] * gv.data[j];
            dxr[j] += is * (dh - invc * sum_dh - hr[j] * invc * sum_dh_h);
          }
        }
      }
    };
    return id;
  }

  //! Causal multi-head self-attention block (QKV proj, masked softmax,
  //! optional attention dropout, output proj). x is [B, T, E].
  Id causal_attention(Id x, Id wqkv, Id bqkv, Id wo, Id bo, int heads, T dropout_p, bool train,
                      RngStream* rng) {
    const auto& xv = val(x);
    require(xv.ndim() == 3, "causal_attention input", x, x);
    const int B = xv.dim(0), S = xv.dim(1), E = xv.dim(2);
    require(E % heads == 0, "causal_attention heads", x, wqkv);
    require(val(wqkv).dim(0) == E && val(wqkv).dim(1) == 3 * E, "causal_attention wqkv", x, wqkv);
    const int D = E / heads;
    const int64_t rows = static_cast<int64_t>(B) * S;

    // QKV projection.
    Tensor<T> qkv = Tensor<T>::zeros({B, S, 3 * E});
    mm_nn(xv.ptr(), val(wqkv).ptr(), qkv.ptr(), rows, E, 3 * E, false);
    {
      const auto& bv = val(bqkv);
      for (int64_t r = 0; r < rows; ++r) {
        T* qr = qkv.ptr() + r * 3 * E;
        for (int j = 0; j < 3 * E; ++j) qr[j] += bv.data[j];
      }
    }

    const T scale = T(1) / std::sqrt(static_cast<T>(D));
    const bool use_dropout = train && dropout_p > T(0);
    Tensor<T> probs = Tensor<T>::zeros({B, heads, S, S});        // pre-dropout softmax
    Tensor<T> mask;                                              // dropout keep-scale
    if (use_dropout) mask = Tensor<T>::zeros({B, heads, S, S});
    Tensor<T> attn_out = Tensor<T>::zeros({B, S, E});            // concatenated heads

    std::vector<T> scores(static_cast<size_t>(S));
    for (int b = 0; b < B; ++b) {
      for (int h = 0; h < heads; ++h) {
        const int64_t head_base = ((static_cast<int64_t>(b) * heads + h) * S) * S;
        for (int i = 0; i < S; ++i) {
          const T* qi = qkv.ptr() + (static_cast<int64_t>(b) * S + i) * 3 * E + h * D;
          T maxv = -std::numeric_limits<T>::infinity();
          for (int j = 0; j <= i; ++j) {
            const T* kj = qkv.ptr() + (static_cast<int64_t>(b) * S + j) * 3 * E + E + h * D;
            T acc = T(0);
            for (int d = 0; d < D; ++d) acc += qi[d] * kj[d];
            acc *= scale;
            scores[j] = acc;
            if (acc > maxv) maxv = acc;
          }
          T denom = T(0);
          for (int j = 0; j <= i; ++j) {
            scores[j] = std::exp(scores[j] - maxv);
            denom += scores[j];
          }
          T* prow = probs.ptr() + head_base + static_cast<int64_t>(i) * S;
          for (int j = 0; j <= i; ++j) prow[j] = scores[j] / denom;

          const T* mrow = nullptr;
          if (use_dropout) {
            T* mr = mask.ptr() + head_base + static_cast<int64_t>(i) * S;
            const T keep_scale = T(1) / (T(1) - dropout_p);
            for (int j = 0; j <= i; ++j) {
              mr[j] = (static_cast<T>(rng->uniform01()) >= dropout_p) ? keep_scale : T(0);
            }
            mrow = mr;
          }
          T* orow = attn_out.ptr() + (static_cast<int64_t>(b) * S + i) * E + h * D;
          for (int j = 0; j <= i; ++j) {
            const T p = mrow ? prow[j] * mrow[j] : prow[j];
            const T* vj = qkv.ptr() + (static_cast<int64_t>(b) * S + j) * 3 * E + 2 * E + h * D;
            for (int d = 0; d < D; ++d) orow[d] += p * vj[d];
          }
        }
      }
    }

    // Output projection.
    Tensor<T> y = Tensor<T>::zeros({B, S, E});
    mm_nn(attn_out.ptr(), val(wo).ptr(), y.ptr(), rows, E, E, false);
    {
      const auto& bv = val(bo);
      for (int64_t r = 0; r < rows; ++r) {
        T* yr = y.ptr() + r * E;
        for (int j = 0; j < E; ++j) yr[j] += bv.data[j];
      }
    }

    const bool need =
        needs_grad(x) || needs_grad(wqkv) || needs_grad(bqkv) || needs_grad(wo) || needs_grad(bo);
    Id id = add_node(std::move(y), need, "causal_attention");
    nodes_[id].aux.push_back(std::move(qkv));
    nodes_[id].aux.push_back(std::move(probs));
    nodes_[id].aux.push_back(std::move(attn_out));
    if (use_dropout) nodes_[id].aux.push_back(std::move(mask));

    nodes_[id].backfn = [this, x, wqkv, bqkv, wo, bo, B, S, E, heads, D, scale, rows,
                         use_dropout](Id self) {
      const auto& dy = nodes_[self].grad;
      const auto& qkv = nodes_[self].aux[0];
      const auto& probs = nodes_[self].aux[1];
      const auto& attn_out = nodes_[self].aux[2];
      const Tensor<T>* mask = use_dropout ? &nodes_[self].aux[3] : nullptr;

      // Output projection backward.
      Tensor<T> d_attn = Tensor<T>::zeros({B, S, E});
      mm_nt(dy.ptr(), val(wo).ptr(), d_attn.ptr(), rows, E, E, false);
      if (needs_grad(wo)) mm_tn(attn_out.ptr(), dy.ptr(), grad_buf(wo).ptr(), E, rows, E, true);
      if (needs_grad(bo)) {
        T* db = grad_buf(bo).ptr();
        for (int64_t r = 0; r < rows; ++r) {
          const T* dyr = dy.ptr() + r * E;
          for (int j = 0; j < E; ++j) db[j] += dyr[j];
        }
      }

      Tensor<T> d_qkv = Tensor<T>::zeros({B, S, 3 * E});
      std::vector<T> dp(static_cast<size_t>(S));
      for (int b = 0; b < B; ++b) {
        for (int h = 0; h < heads; ++h) {
          const int64_t head_base = ((static_cast<int64_t>(b) * heads + h) * S) * S;
          for (int i = 0; i < S; ++i) {
            const T* doi = d_attn.ptr() + (static_cast<int64_t>(b) * S + i) * E + h * D;
            const T* prow = probs.ptr() + head_base + static_cast<int64_t>(i) * S;
            const T* mrow = mask ? mask->ptr() + head_base + static_cast<int64_t>(i) * S : nullptr;

            // dP (post-dropout) then through dropout and softmax.
            T dot_pp = T(0);
            for (int j = 0; j <= i; ++j) {
              const T* vj = qkv.ptr() + (static_cast<int64_t>(b) * S + j) * 3 * E + 2 * E + h * D;
              T acc = T(0);
              for (int d = 0; d < D; ++d) acc += doi[d] * vj[d];
              if (mrow) acc *= mrow[j];
              dp[j] = acc;  // now dP_pre
              dot_pp += acc * prow[j];
            }
            // dV accumulation and dS -> dQ, dK.
            const T* qi = qkv.ptr() + (static_cast<int64_t>(b) * S + i) * 3 * E + h * D;
            T* dqi = d_qkv.ptr() + (static_cast<int64_t>(b) * S + i) * 3 * E + h * D;
            for (int j = 0; j <= i; ++j) {
              const T p_post = mrow ? prow[j] * mrow[j] : prow[j];
              T* dvj = d_qkv.ptr() + (static_cast<int64_t>(b) * S + j) * 3 * E + 2 * E + h * D;
              for (int d = 0; d < D; ++d) dvj[d] += p_post * doi[d];

              const T ds = prow[j] * (dp[j] - dot_pp) * scale;
              const T* kj = qkv.ptr() + (static_cast<int64_t>(b) * S + j) * 3 * E + E + h * D;
              T* dkj = d_qkv.ptr() + (static_cast<int64_t>(b) * S + j) * 3 * E + E + h * D;
              for (int d = 0; d < D; ++d) {
                dqi[d] += ds * kj[d];
                dkj[d] += ds * qi[d];
              }
            }
          }
        }
      }

      // QKV projection backward.
      if (needs_grad(x)) mm_nt(d_qkv.ptr(), val(wqkv).ptr(), grad_buf(x).ptr(), rows, 3 * E, E, true);
      if (needs_grad(wqkv)) mm_tn(val(x).ptr(), d_qkv.ptr(), grad_buf(wqkv).ptr(), E, rows, 3 * E, true);
      if (needs_grad(bqkv)) {
        T* db = grad_buf(bqkv).ptr();
        for (int64_t r = 0; r < rows; ++r) {
          const T* dr = d_qkv.ptr() + r * 3 * E;
          for (int j = 0; j < 3 * E; ++j) db[j] += dr[j];
        }
      }
    };
    return id;
  }

  //! Inverted-scaling dropout; identity when !train or p == 0.
  Id dropout(Id x, T p, bool train, RngStream* rng) {
    if (!train || p <= T(0)) return x;
    const auto& xv = val(x);
    Tensor<T> mask = Tensor<T>::zeros(xv.shape);
    const T keep_scale = T(1) / (T(1) - p);
    for (auto& m : mask.data) m = (static_cast<T>(rng->uniform01()) >= p) ? keep_scale : T(0);
    Tensor<T> y = xv;
    for (int64_t i = 0; i < y.numel(); ++i) y.data[i] *= mask.data[i];
    Id id = add_node(std::move(y), needs_grad(x), "dropout");
    nodes_[id].aux.push_back(std::move(mask));
    nodes_[id].backfn = [this, x](Id self) {
      if (!needs_grad(x)) return;
      const auto& dy = nodes_[self].grad;
      const auto& mask = nodes_[self].aux[0];
      T* dx = grad_buf(x).ptr();
      for (int64_t i = 0; i < dy.numel(); ++i) dx[i] += dy.data[i] * mask.data[i];
    };
    return id;
  }

  //! Runs reverse accumulation from a scalar loss node, then flushes
  //! parameter gradients into their stores. Throws when loss is not scalar.
  void backward(Id loss) {
    if (val(loss).numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
    grad_buf(loss).data[0] = T(1);
    for (Id id = loss; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.requires_grad || n.grad.data.empty()) continue;
      if (n.backfn) n.backfn(id);
    }
    for (auto& n : nodes_) {
      if (n.external_grad && !n.grad.data.empty()) {
        for (size_t i = 0; i < n.grad.data.size(); ++i) {
          n.external_grad->data[i] += n.grad.data[i];
        }
      }
    }
  }

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::string label;
    std::function<void(Id)> backfn;
    Tensor<T>* external_grad = nullptr;
    std::vector<Tensor<T>> aux;  // forward-pass intermediates for backward
  };

  bool needs_grad(Id id) const { return nodes_[id].requires_grad; }

  Tensor<T>& grad_buf(Id id) {
    Node& n = nodes_[id];
    if (n.grad.data.empty()) n.grad = Tensor<T>::zeros(n.value.shape);
    return n.grad;
  }

  void pass_grad(Id from, Id to) {
    const auto& dy = nodes_[from].grad;
    T* dx = grad_buf(to).ptr();
    for (int64_t i = 0; i < dy.numel(); ++i) dx[i] += dy.data[i];
  }

  Id add_node(Tensor<T> value, bool requires_grad, std::string label) {
    if (check_finite_ && !value.all_finite()) {
      throw std::runtime_error("non-finite values after op: " + label);
    }
    nodes_.push_back(Node{std::move(value), {}, requires_grad, std::move(label), nullptr, nullptr, {}});
    return static_cast<Id>(nodes_.size()) - 1;
  }

  template <typename FY, typename FA, typename FB>
  Id binary(Id a, Id b, const char* name, FY fy, FA fa, FB fb) {
    const auto& av = val(a);
    const auto& bv = val(b);
    require(av.same_shape(bv), name, a, b);
    Tensor<T> y = av;
    for (int64_t i = 0; i < y.numel(); ++i) y.data[i] = fy(av.data[i], bv.data[i]);
    Id id = add_node(std::move(y), needs_grad(a) || needs_grad(b), name);
    nodes_[id].backfn = [this, a, b, fa, fb](Id self) {
      const auto& dy = nodes_[self].grad;
      const auto& av = val(a);
      const auto& bv = val(b);
      const auto& yv = val(self);
      if (needs_grad(a)) {
        T* da = grad_buf(a).ptr();
        for (int64_t i = 0; i < dy.numel(); ++i) {
          da[i] += dy.data[i] * fa(av.data[i], bv.data[i], yv.data[i]);
        }
      }
      if (needs_grad(b)) {
        T* db = grad_buf(b).ptr();
        for (int64_t i = 0; i < dy.numel(); ++i) {
          db[i] += dy.data[i] * fb(av.data[i], bv.data[i], yv.data[i]);
        }
      }
    };
    return id;
  }

  void require(bool cond, const char* op, Id a, Id b) const {
    if (!cond) {
      throw std::invalid_argument(std::string(op) + ": shape mismatch between '" +
                                  nodes_[a].label + "' " + nodes_[a].value.shape_str() + " and '" +
                                  nodes_[b].label + "' " + nodes_[b].value.shape_str());
    }
  }

  bool check_finite_;
  std::vector<Node> nodes_;
};

using Tape32 = Tape<float>;
using Tape64 = Tape<double>;

}  // namespace bg::nn
