#pragma once

#include <string>

#include "distill/bc.hpp"
#include "distill/collect.hpp"
#include "eval/protocol.hpp"
#include "ppo/trainer.hpp"

namespace bg::cfg {

//! Every stage of the pipeline in one place. Profiles provide the defaults;
//! a JSON config file overrides individual keys.
struct PipelineConfig {
  std::string profile = "desk";  // "desk" or "paper"

  env::EnvConfig env;
  ppo::PPOConfig teacher;
  std::vector<int> teacher_hidden{128, 64, 32};
  std::vector<std::string> train_objects;  // round-robin across envs

  distill::CollectOptions collect;
  distill::CurationCriteria curation;
  distill::BCConfig bc;
  nn::TransformerSpec student;

  eval::EvalProtocol eval_protocol;
  std::vector<std::string> eval_objects;

  int worker_threads = 1;

  void validate() const;  // throws std::invalid_argument naming the bad field
};

PipelineConfig desk_profile();
PipelineConfig paper_profile();
PipelineConfig profile_by_name(const std::string& name);

//! Loads a profile and overlays the JSON file (when path non-empty).
//! Unknown or wrongly-typed keys raise std::invalid_argument naming the key.
PipelineConfig load_config(const std::string& profile, const std::string& json_path);

//! Applies a parsed JSON object onto an existing config (exposed for tests).
void apply_json(PipelineConfig& cfg, const std::string& json_text);

//! Snapshot of the effective configuration (for run manifests).
std::string config_to_json(const PipelineConfig& cfg);

}  // namespace bg::cfg
