#include "reward/reward.hpp"

#include <algorithm>

namespace bg::reward {

double planar_distance(const double object_xy[2], const double center_xy[2]) {
  const double dx = object_xy[0] - center_xy[0];
  const double dy = object_xy[1] - center_xy[1];
  return std::sqrt(dx * dx + dy * dy);
}

double task_reward(const RewardInputs& in) {
  const double d_xy = planar_distance(in.object_xy, in.center_xy);
  if (in.contact_count < 1 || d_xy >= kWorkspaceRadius) return 0.0;

  const double dist_ratio = std::clamp(d_xy / kWorkspaceRadius, 0.0, 1.0);
  const double dist_factor = 1.0 - std::sqrt(dist_ratio);
  if (in.object_height >= in.target_height) return dist_factor;

  const double height_ratio =
      std::clamp((in.target_height - in.object_height) / in.target_height, 0.0, 1.0);
  return (1.0 - std::sqrt(height_ratio)) * dist_factor;
}

double incentive_reward(int contact_count) { return contact_count == 3 ? 1.0 : 0.0; }

double joint_limit_penalty(const std::array<double, 9>& theta,
                           const std::array<double, 9>& joint_min,
                           const std::array<double, 9>& joint_max) {
  double sum = 0.0;
  for (int j = 0; j < 9; ++j) {
    sum += std::max(0.0, joint_min[j] - theta[j]);
    sum += std::max(0.0, theta[j] - joint_max[j]);
  }
  return sum;
}

ActionPenalties action_penalties(const std::array<double, 9>& action,
                                 const std::array<double, 9>& prev_action) {
  double a2 = 0.0, rate2 = 0.0;
  for (int k = 0; k < 9; ++k) {
    a2 += action[k] * action[k];
    const double d = action[k] - prev_action[k];
    rate2 += d * d;
  }
  return {a2, rate2};
}

RewardBreakdown total_reward(const RewardInputs& in, const RewardWeights& w) {
  RewardBreakdown b;
  b.weights = w;
  b.task = task_reward(in);
  b.incentive = incentive_reward(in.contact_count);
  b.joint_limit = joint_limit_penalty(in.joint_angles, in.joint_min, in.joint_max);
  const ActionPenalties ap = action_penalties(in.action, in.prev_action);
  b.action = ap.action;
  b.action_rate = ap.action_rate;
  b.total = w.task * b.task + w.incentive * b.incentive + w.joint_limit * b.joint_limit +
            w.action * b.action + w.action_rate * b.action_rate;
  return b;
}

}  // namespace bg::reward
