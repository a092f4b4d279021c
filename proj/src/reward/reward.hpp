#pragma once

#include <array>
#include <cmath>

namespace bg::reward {

//! Reward term weights; defaults match the trained configuration.
struct RewardWeights {
  double task = 1.0;          // w1
  double incentive = 0.2;     // w2
  double joint_limit = -500;  // w31
  double action = -0.04;      // w32
  double action_rate = -0.01; // w33
};

//! Per-term values plus the weighted total, kept separate for auditing.
struct RewardBreakdown {
  double task = 0.0;         // r_t in [0, 1]
  double incentive = 0.0;    // r_i in {0, 1}
  double joint_limit = 0.0;  // r_l >= 0
  double action = 0.0;       // r_a >= 0
  double action_rate = 0.0;  // r_ar >= 0
  double total = 0.0;
  RewardWeights weights;
};

//! Everything the reward needs from one control tick.
struct RewardInputs {
  double object_height = 0.0;     // h_o, object-center height above ground
  double target_height = 0.1;     // h_t > 0
  double object_xy[2] = {0, 0};
  double center_xy[2] = {0, 0};   // gripper center
  int contact_count = 0;          // fingertips with uniaxial force > 0.1 N
  std::array<double, 9> joint_angles{};
  std::array<double, 9> joint_min{};
  std::array<double, 9> joint_max{};
  std::array<double, 9> action{};       // a_t
  std::array<double, 9> prev_action{};  // a_{t-1}; zero at episode start
};

//! Workspace radius used both for reward gating and episode escape.
inline constexpr double kWorkspaceRadius = 0.1;

double planar_distance(const double object_xy[2], const double center_xy[2]);

//! Task reward: zero unless at least one fingertip contact and d_xy < 0.1 m;
//! height and distance ratios are clamped into the square roots' valid ranges.
double task_reward(const RewardInputs& in);

double incentive_reward(int contact_count);

double joint_limit_penalty(const std::array<double, 9>& theta,
                           const std::array<double, 9>& joint_min,
                           const std::array<double, 9>& joint_max);

//! Returns (|a_t|^2, |a_t - a_{t-1}|^2).
struct ActionPenalties {
  double action;
  double action_rate;
};
ActionPenalties action_penalties(const std::array<double, 9>& action,
                                 const std::array<double, 9>& prev_action);

RewardBreakdown total_reward(const RewardInputs& in, const RewardWeights& w = {});

}  // namespace bg::reward
