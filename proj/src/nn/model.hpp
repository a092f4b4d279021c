#pragma once

#include <string>
#include <vector>

#include "nn/tape.hpp"

namespace bg::nn {

enum class Activation { Elu, Gelu };

//! Dense network: input -> hidden widths -> output, one activation kind.
struct MLPSpec {
  int input_dim = 1;
  std::vector<int> hidden{128, 64, 32};
  int output_dim = 1;
  Activation activation = Activation::Elu;

  void validate() const {
    if (hidden.empty()) throw std::invalid_argument("MLP needs at least one hidden layer");
    if (input_dim <= 0 || output_dim <= 0) throw std::invalid_argument("bad MLP dims");
  }
};

//! Decoder-only transformer acting on a context window of observations and
//! predicting the action at the final position through an MLP head.
struct TransformerSpec {
  int obs_dim = 12;
  int act_dim = 9;
  int layers = 6;
  int embed = 512;
  int heads = 8;
  int context = 30;
  double dropout = 0.1;
  int ff_mult = 4;
  std::vector<int> head_hidden{1024, 1024};

  void validate() const {
    if (embed % heads != 0) throw std::invalid_argument("embed must be divisible by heads");
    if (layers < 1 || context < 1) throw std::invalid_argument("bad transformer dims");
    if (dropout < 0 || dropout >= 1) throw std::invalid_argument("bad dropout rate");
  }
};

template <typename T>
void init_mlp(ParamStore<T>& store, const std::string& prefix, const MLPSpec& spec,
              RngStream& rng) {
  spec.validate();
  int in = spec.input_dim;
  std::vector<int> dims = spec.hidden;
  dims.push_back(spec.output_dim);
  for (size_t l = 0; l < dims.size(); ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    store.create_fan_in(base + ".w", {in, dims[l]}, in, rng);
    store.create_fan_in(base + ".b", {dims[l]}, in, rng);
    in = dims[l];
  }
}

template <typename T>
typename Tape<T>::Id tape_activation(Tape<T>& tape, typename Tape<T>::Id x, Activation act) {
  return act == Activation::Elu ? tape.elu(x) : tape.gelu(x);
}

//! Forward through store-backed MLP params; x is [..., input_dim].
template <typename T>
typename Tape<T>::Id mlp_forward(Tape<T>& tape, ParamStore<T>& store, const std::string& prefix,
                                 const MLPSpec& spec, typename Tape<T>::Id x) {
  const size_t n_layers = spec.hidden.size() + 1;
  auto h = x;
  for (size_t l = 0; l < n_layers; ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    h = tape.linear(h, tape.param(store, base + ".w"), tape.param(store, base + ".b"));
    if (l + 1 < n_layers) h = tape_activation(tape, h, spec.activation);
  }
  return h;
}

//! Plain fast-path MLP evaluation: y[rows, output_dim] from x[rows, input_dim].
template <typename T>
void mlp_eval(const ParamStore<T>& store, const std::string& prefix, const MLPSpec& spec,
              const T* x, int64_t rows, T* y) {
  const size_t n_layers = spec.hidden.size() + 1;
  std::vector<T> cur(x, x + rows * spec.input_dim);
  std::vector<T> next;
  for (size_t l = 0; l < n_layers; ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    const auto& w = store.value(base + ".w");
    const auto& b = store.value(base + ".b");
    const int in = w.dim(0), out = w.dim(1);
    next.assign(rows * out, T(0));
    mm_nn(cur.data(), w.ptr(), next.data(), rows, in, out, false);
    for (int64_t r = 0; r < rows; ++r) {
      T* nr = next.data() + r * out;
      for (int j = 0; j < out; ++j) nr[j] += b.data[j];
    }
    if (l + 1 < n_layers) {
      if (spec.activation == Activation::Elu) {
        for (auto& v : next) v = v > T(0) ? v : std::expm1(v);
      } else {
        for (auto& v : next) {
          const double xd = static_cast<double>(v);
          v = static_cast<T>(0.5 * xd * (1.0 + std::erf(xd * 0.7071067811865475)));
        }
      }
    }
    cur.swap(next);
  }
  std::copy(cur.begin(), cur.end(), y);
}

template <typename T>
void init_transformer(ParamStore<T>& store, const std::string& prefix, const TransformerSpec& spec,
                      RngStream& rng) {
  spec.validate();
  const int e = spec.embed;
  store.create_fan_in(prefix + ".in.w", {spec.obs_dim, e}, spec.obs_dim, rng);
  store.create_fan_in(prefix + ".in.b", {e}, spec.obs_dim, rng);
  store.create_normal(prefix + ".pos", {spec.context, e}, 0.02, rng);
  for (int l = 0; l < spec.layers; ++l) {
    const std::string base = prefix + ".blk" + std::to_string(l);
    store.create_const(base + ".ln1.g", {e}, T(1));
    store.create_const(base + ".ln1.b", {e}, T(0));
    store.create_fan_in(base + ".attn.wqkv", {e, 3 * e}, e, rng);
    store.create_fan_in(base + ".attn.bqkv", {3 * e}, e, rng);
    store.create_fan_in(base + ".attn.wo", {e, e}, e, rng);
    store.create_fan_in(base + ".attn.bo", {e}, e, rng);
    store.create_const(base + ".ln2.g", {e}, T(1));
    store.create_const(base + ".ln2.b", {e}, T(0));
    const int ff = spec.ff_mult * e;
    store.create_fan_in(base + ".ff.w1", {e, ff}, e, rng);
    store.create_fan_in(base + ".ff.b1", {ff}, e, rng);
    store.create_fan_in(base + ".ff.w2", {ff, e}, ff, rng);
    store.create_fan_in(base + ".ff.b2", {e}, ff, rng);
  }
  store.create_const(prefix + ".lnf.g", {e}, T(1));
  store.create_const(prefix + ".lnf.b", {e}, T(0));
  MLPSpec head;
  head.input_dim = e;
  head.hidden = spec.head_hidden;
  head.output_dim = spec.act_dim;
  head.activation = Activation::Gelu;
  init_mlp(store, prefix + ".head", head, rng);
}

//! Forward pass; x is [B, context, obs_dim]; returns the prediction at the
//! final position, [B, act_dim]. train_mode enables dropout (rng required).
template <typename T>
typename Tape<T>::Id transformer_forward(Tape<T>& tape, ParamStore<T>& store,
                                         const std::string& prefix, const TransformerSpec& spec,
                                         typename Tape<T>::Id x, bool train_mode,
                                         RngStream* dropout_rng) {
  const T p = static_cast<T>(spec.dropout);
  auto h = tape.linear(x, tape.param(store, prefix + ".in.w"), tape.param(store, prefix + ".in.b"));
  h = tape.add_pos(h, tape.param(store, prefix + ".pos"));
  h = tape.dropout(h, p, train_mode, dropout_rng);
  for (int l = 0; l < spec.layers; ++l) {
    const std::string base = prefix + ".blk" + std::to_string(l);
    auto norm1 = tape.layer_norm(h, tape.param(store, base + ".ln1.g"),
                                 tape.param(store, base + ".ln1.b"));
    auto attn = tape.causal_attention(norm1, tape.param(store, base + ".attn.wqkv"),
                                      tape.param(store, base + ".attn.bqkv"),
                                      tape.param(store, base + ".attn.wo"),
                                      tape.param(store, base + ".attn.bo"), spec.heads, p,
                                      train_mode, dropout_rng);
    attn = tape.dropout(attn, p, train_mode, dropout_rng);
    h = tape.add(h, attn);
    auto norm2 = tape.layer_norm(h, tape.param(store, base + ".ln2.g"),
                                 tape.param(store, base + ".ln2.b"));
    auto ff = tape.linear(norm2, tape.param(store, base + ".ff.w1"),
                          tape.param(store, base + ".ff.b1"));
    ff = tape.gelu(ff);
    ff = tape.linear(ff, tape.param(store, base + ".ff.w2"), tape.param(store, base + ".ff.b2"));
    ff = tape.dropout(ff, p, train_mode, dropout_rng);
    h = tape.add(h, ff);
  }
  h = tape.layer_norm(h, tape.param(store, prefix + ".lnf.g"), tape.param(store, prefix + ".lnf.b"));
  h = tape.select_last(h);
  MLPSpec head;
  head.input_dim = spec.embed;
  head.hidden = spec.head_hidden;
  head.output_dim = spec.act_dim;
  head.activation = Activation::Gelu;
  return mlp_forward(tape, store, prefix + ".head", head, h);
}

//! Dropout-free inference: window [B, context, obs_dim] -> [B, act_dim].
template <typename T>
std::vector<T> transformer_eval(ParamStore<T>& store, const std::string& prefix,
                                const TransformerSpec& spec, const std::vector<T>& window,
                                int batch) {
  Tape<T> tape;
  auto x = tape.constant(Tensor<T>::from({batch, spec.context, spec.obs_dim},
                                         std::vector<T>(window.begin(), window.end())),
                         "obs_window");
  auto out = transformer_forward(tape, store, prefix, spec, x, false, nullptr);
  return tape.val(out).data;
}

}  // namespace bg::nn
