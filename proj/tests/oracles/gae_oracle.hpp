#pragma once

// Brute-force GAE: A_t = sum_k (gamma*lambda)^k delta_{t+k} until the episode
// boundary, with the same timeout-bootstrap convention as the implementation.

#include "ppo/ppo.hpp"

namespace bg::testing {

inline std::vector<double> gae_bruteforce(const bg::ppo::RolloutBuffer& b, int env, double gamma,
                                          double lam) {
  std::vector<double> adv(b.steps, 0.0);
  for (int t = 0; t < b.steps; ++t) {
    double acc = 0.0, w = 1.0;
    for (int k = t; k < b.steps; ++k) {
      const int64_t i = b.idx(k, env);
      double next_value;
      if (b.done[i]) {
        next_value = b.timeout[i] ? b.bootstrap_value[i] : 0.0;
      } else if (k == b.steps - 1) {
        next_value = b.bootstrap_value[i];
      } else {
        next_value = b.value[b.idx(k + 1, env)];
      }
      const double delta = b.reward[i] + gamma * next_value - b.value[i];
      acc += w * delta;
      if (b.done[i]) break;
      w *= gamma * lam;
    }
    adv[t] = acc;
  }
  return adv;
}

}  // namespace bg::testing
