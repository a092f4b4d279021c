#pragma once

#include <optional>
#include <string>

#include "core/binio.hpp"
#include "env/observation.hpp"
#include "env/randomization.hpp"
#include "reward/reward.hpp"
#include "sim/world.hpp"

namespace bg::env {

//! Relative joint position command; components are clipped to +-0.3 rad
//! before application.
struct Action {
  static constexpr double kClip = 0.3;
  std::array<double, 9> delta_theta{};

  Action clipped() const {
    Action a = *this;
    for (auto& v : a.delta_theta) v = std::clamp(v, -kClip, kClip);
    return a;
  }
};

enum class TerminationCause { None, Timeout, ObjectEscape, Invalid };

struct EpisodeStatus {
  double elapsed = 0.0;
  bool terminated = false;
  TerminationCause cause = TerminationCause::None;
  double target_height = 0.0;  // h_t
  double object_height = 0.0;  // h_o
  double planar_distance = 0.0;  // d_xy
  int contact_count = 0;         // n_contact
};

struct EnvConfig {
  std::string object_id = "Sphere-M";
  sim::GripperModel gripper;        // base model; gains get the instance multipliers
  sim::PhysicsParams physics;       // base; frictions come from the instance draw
  RandomizationConfig randomization;
  reward::RewardWeights weights;
  double target_height = 0.10;  // h_t, m
  double horizon = 10.0;        // s; demo collection uses 5 s
  bool demo_mode = false;       // 5 s horizon, disturbances disabled
  double object_density = 300.0;  // kg/m^3 baseline before the mass multiplier

  double effective_horizon() const { return demo_mode ? std::min(horizon, 5.0) : horizon; }
};

struct StepResult {
  reward::RewardBreakdown reward;
  EpisodeStatus status;
};

//! One gripper-plus-object episode world with domain randomization.
//! Friction, mass multiplier and actuator gains are drawn once from the
//! instance seed; per-reset quantities are drawn from reset seeds.
class Environment {
 public:
  Environment(const EnvConfig& config, uint64_t instance_seed);

  //! Resets with an auto-advanced episode seed; skips (with a retry budget)
  //! seeds whose object placement cannot avoid fingertip penetration.
  void reset();
  //! Deterministic reset for a specific episode seed. Throws std::runtime_error
  //! when object placement keeps penetrating the fingertips after 10 resamples.
  void reset_with_seed(uint64_t episode_seed);

  //! Applies one 20 Hz control step. Throws std::logic_error if terminated.
  StepResult step(const Action& action);

  std::vector<double> privileged_obs();
  std::vector<double> partial_obs();
  //! Noise-free variants (same layout).
  std::vector<double> privileged_obs_clean() const;
  std::vector<double> partial_obs_clean() const;

  const sim::WorldState& world() const { return world_; }
  sim::WorldState& mutable_world() { return world_; }
  const EpisodeStatus& status() const { return status_; }
  const RandomizationDraw& draw() const { return draw_; }
  const EnvConfig& config() const { return config_; }
  const sim::GripperModel& model() const { return model_; }
  const sim::PhysicsParams& physics() const { return physics_; }
  const std::array<double, 9>& previous_action() const { return prev_action_; }
  uint64_t episode_seed() const { return episode_seed_; }

  //! True while the object is in sustained-lift state this tick
  //! (h_o >= h_t and no object-ground contact).
  bool lifted_now() const;
  //! Consecutive ticks the lifted condition has held.
  int lifted_streak() const { return lifted_streak_; }

  int steps_taken() const { return steps_; }
  double control_dt() const { return physics_.control_dt(); }

  //! Serializes the full episode state (world, RNG streams, bookkeeping) so a
  //! training session can resume bit-identically. The environment must be
  //! reconstructed with the same config and instance seed before restore.
  void serialize(BinWriter& w) const;
  void deserialize(BinReader& r);

 private:
  void apply_reset(uint64_t episode_seed);
  bool placement_penetrates() const;
  EpisodeStatus compute_status(bool world_invalid);

  EnvConfig config_;
  sim::GripperModel model_;      // gains after instance multipliers
  sim::PhysicsParams physics_;   // frictions after instance draw
  RandomizationDraw draw_;
  NoiseModel noise_;

  RngStream instance_rng_;
  RngStream episode_rng_;
  RngStream noise_rng_;
  uint64_t episode_counter_ = 0;
  uint64_t episode_seed_ = 0;

  sim::WorldState world_;
  EpisodeStatus status_;
  std::array<double, 9> prev_action_{};
  int steps_ = 0;
  int lifted_streak_ = 0;
};

}  // namespace bg::env
