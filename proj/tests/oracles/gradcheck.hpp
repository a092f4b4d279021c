#pragma once

// Central finite-difference gradient checker for Tape<double> graphs.

#include <functional>
#include <string>
#include <vector>

#include "nn/params.hpp"
#include "nn/tape.hpp"

namespace bg::testing {

//! Builds the loss twice per perturbed coordinate and compares the analytic
//! parameter gradients against central differences. Returns the worst
//! relative error across all checked coordinates.
//! loss_fn must rebuild the full graph from the store each call.
inline double gradcheck(bg::nn::ParamStore<double>& store,
                        const std::function<double(bg::nn::ParamStore<double>&)>& loss_value,
                        const std::function<void(bg::nn::ParamStore<double>&)>& loss_backward,
                        double h = 1e-6, int max_coords_per_param = 6,
                        uint64_t coord_seed = 1234) {
  store.zero_grad();
  loss_backward(store);

  double worst_rel = 0.0;
  bg::RngStream pick(coord_seed);
  for (const auto& name : store.names()) {
    auto& value = store.value(name);
    const auto& grad = store.grad(name);
    const int64_t n = value.numel();
    const int checks = static_cast<int>(std::min<int64_t>(n, max_coords_per_param));
    for (int c = 0; c < checks; ++c) {
      const int64_t i = static_cast<int64_t>(pick.below(n));
      const double orig = value.data[i];
      value.data[i] = orig + h;
      const double up = loss_value(store);
      value.data[i] = orig - h;
      const double down = loss_value(store);
      value.data[i] = orig;
      const double fd = (up - down) / (2 * h);
      const double an = grad.data[i];
      // Differences below the central-difference roundoff floor are noise
      // (e.g. exactly-zero gradients from softmax shift invariance).
      if (std::fabs(fd - an) < 1e-7) continue;
      const double denom = std::max(std::fabs(fd), std::fabs(an));
      worst_rel = std::max(worst_rel, std::fabs(fd - an) / denom);
    }
  }
  return worst_rel;
}

}  // namespace bg::testing
