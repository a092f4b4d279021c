#pragma once

#include <string>
#include <vector>

#include "env/randomization.hpp"

namespace bg::distill {

//! Demonstration selection thresholds.
struct CurationCriteria {
  double task_reward_threshold = 0.5;  // r_t must exceed this...
  double sustain_seconds = 0.5;        // ...continuously for this long
  double episode_horizon = 5.0;        // collection episode length, s
  double force_sum_threshold = 200.0;  // cumulative uniaxial sum, all sensors

  //! Sustain window in control steps; throws if not an integer count.
  int sustain_steps(double control_dt = 0.05) const;
  void validate() const;
};

//! One recorded episode: per step the 12-dim observation the policy saw, the
//! normalized action it took, the task-reward value and the noiseless
//! uniaxial force triplet.
struct DemoEpisode {
  uint64_t episode_id = 0;
  std::string object_id;
  env::RandomizationDraw draw;
  int length = 0;
  std::vector<float> obs;          // [T x 12]
  std::vector<float> action;       // [T x 9], normalized to [-1, 1]
  std::vector<float> task_reward;  // [T]
  std::vector<float> forces;       // [T x 3]
};

inline constexpr int kDemoObsDim = 12;
inline constexpr int kDemoActDim = 9;
inline constexpr double kActionBound = 0.3;

//! Episode container persisted as: manifest (format version, counts, dims,
//! criteria, seeds) followed by per-episode records, each CRC-32 protected.
struct DemoDataset {
  CurationCriteria criteria;
  std::vector<uint64_t> seeds;
  std::vector<DemoEpisode> episodes;

  void save(const std::string& path) const;
  static DemoDataset load(const std::string& path);
  std::vector<uint8_t> to_bytes() const;
  static DemoDataset from_bytes(const std::vector<uint8_t>& bytes);

  int64_t total_steps() const {
    int64_t n = 0;
    for (const auto& e : episodes) n += e.length;
    return n;
  }
};

//! Demonstration action normalization by the action bound (0.3 rad).
//! Throws std::runtime_error when a component exceeds 0.31 rad (corrupt log).
std::array<float, 9> normalize_action(const std::array<double, 9>& raw);
//! Inverse map applied at deployment.
std::array<double, 9> denormalize_action(const float* normalized);

}  // namespace bg::distill
