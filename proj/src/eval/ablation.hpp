#pragma once

#include "distill/bc.hpp"
#include "eval/report.hpp"
#include "ppo/trainer.hpp"

namespace bg::eval {

struct AblationVariant {
  std::string name;
  EvalPolicy policy;
};

//! Evaluates every variant on the same object set and protocol; one table,
//! rows = objects, columns = variants, plus per-variant averages.
AblationReport run_ablation(const std::vector<AblationVariant>& variants,
                            const env::EnvConfig& base_env,
                            const std::vector<std::string>& objects,
                            const EvalProtocol& protocol, std::vector<Report>* raw_out = nullptr);

//! The partial-observation channel statistics from a privileged teacher
//! checkpoint (joint positions + uniaxial forces), used to normalize student
//! observations.
std::pair<std::vector<float>, std::vector<float>> partial_norm_from_teacher(
    const ppo::PolicyCheckpoint& teacher);

}  // namespace bg::eval
