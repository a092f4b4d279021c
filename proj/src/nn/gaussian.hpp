#pragma once

#include "nn/tape.hpp"

namespace bg::nn {

inline constexpr double kLn2Pi = 1.8378770664093454835606594728112;

//! Diagonal Gaussian head with state-independent learned log-std.

//! Tape: log probability of `actions` (constant, [B, D]) under N(mean, std).
//! Returns a [B] node.
template <typename T>
typename Tape<T>::Id gaussian_log_prob(Tape<T>& tape, typename Tape<T>::Id mean,
                                       typename Tape<T>::Id log_std,
                                       typename Tape<T>::Id actions) {
  const int d = tape.val(log_std).numel();
  auto inv_std = tape.exp(tape.neg(log_std));
  auto z = tape.mul_row(tape.sub(actions, mean), inv_std);
  auto quad = tape.scale(tape.sum_rows(tape.square(z)), T(-0.5));
  auto log_det = tape.neg(tape.sum_all(log_std));
  auto lp = tape.add_scalar_t(quad, log_det);
  return tape.add_const(lp, static_cast<T>(-0.5 * d * kLn2Pi));
}

//! Tape: entropy of the diagonal Gaussian (scalar node); depends only on log_std.
template <typename T>
typename Tape<T>::Id gaussian_entropy(Tape<T>& tape, typename Tape<T>::Id log_std) {
  const int d = tape.val(log_std).numel();
  return tape.add_const(tape.sum_all(log_std), static_cast<T>(0.5 * d * (1.0 + kLn2Pi)));
}

//! Plain scalar-path log prob for one action row.
template <typename T>
double gaussian_log_prob_eval(const T* mean, const T* log_std, const T* action, int d) {
  double lp = -0.5 * d * kLn2Pi;
  for (int i = 0; i < d; ++i) {
    const double ls = static_cast<double>(log_std[i]);
    const double z = (static_cast<double>(action[i]) - static_cast<double>(mean[i])) / std::exp(ls);
    lp += -0.5 * z * z - ls;
  }
  return lp;
}

template <typename T>
double gaussian_entropy_eval(const T* log_std, int d) {
  double h = 0.5 * d * (1.0 + kLn2Pi);
  for (int i = 0; i < d; ++i) h += static_cast<double>(log_std[i]);
  return h;
}

//! Exact KL(old || new) between diagonal Gaussians, averaged later by callers.
inline double gaussian_kl(const double* mu_old, const double* std_old, const double* mu_new,
                          const double* std_new, int d) {
  double kl = 0.0;
  for (int i = 0; i < d; ++i) {
    const double ratio = std_old[i] / std_new[i];
    const double dmu = mu_new[i] - mu_old[i];
    kl += std::log(std_new[i] / std_old[i]) +
          (std_old[i] * std_old[i] + dmu * dmu) / (2.0 * std_new[i] * std_new[i]) - 0.5;
  }
  return kl;
}

}  // namespace bg::nn
