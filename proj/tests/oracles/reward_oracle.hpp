#pragma once

// Independent reward evaluation, written directly from the reward definitions
// and kept free of any code shared with src/reward.

#include <algorithm>
#include <cmath>

#include "reward/reward.hpp"

namespace bg::testing {

inline double reward_oracle_total(const bg::reward::RewardInputs& in,
                                  const bg::reward::RewardWeights& w) {
  const double dx = in.object_xy[0] - in.center_xy[0];
  const double dy = in.object_xy[1] - in.center_xy[1];
  const double d_xy = std::hypot(dx, dy);

  double r_t = 0.0;
  if (in.contact_count >= 1 && d_xy < 0.1) {
    const double dist_term = 1.0 - std::sqrt(std::min(std::max(d_xy / 0.1, 0.0), 1.0));
    if (in.object_height >= in.target_height) {
      r_t = dist_term;
    } else {
      const double hr =
          std::min(std::max((in.target_height - in.object_height) / in.target_height, 0.0), 1.0);
      r_t = (1.0 - std::sqrt(hr)) * dist_term;
    }
  }

  const double r_i = (in.contact_count == 3) ? 1.0 : 0.0;

  double r_l = 0.0;
  for (int j = 0; j < 9; ++j) {
    if (in.joint_angles[j] < in.joint_min[j]) r_l += in.joint_min[j] - in.joint_angles[j];
    if (in.joint_angles[j] > in.joint_max[j]) r_l += in.joint_angles[j] - in.joint_max[j];
  }

  double r_a = 0.0, r_ar = 0.0;
  for (int k = 0; k < 9; ++k) {
    r_a += in.action[k] * in.action[k];
    const double d = in.action[k] - in.prev_action[k];
    r_ar += d * d;
  }

  return w.task * r_t + w.incentive * r_i + w.joint_limit * r_l + w.action * r_a +
         w.action_rate * r_ar;
}

}  // namespace bg::testing
