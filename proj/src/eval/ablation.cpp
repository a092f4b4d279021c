#include "eval/ablation.hpp"

#include "env/observation.hpp"

namespace bg::eval {

AblationReport run_ablation(const std::vector<AblationVariant>& variants,
                            const env::EnvConfig& base_env,
                            const std::vector<std::string>& objects,
                            const EvalProtocol& protocol, std::vector<Report>* raw_out) {
  std::vector<Report> reports;
  for (const auto& v : variants) {
    Report r = evaluate(v.policy, base_env, objects, protocol);
    r.policy_name = v.name;
    reports.push_back(std::move(r));
  }
  AblationReport table = AblationReport::from_reports(reports);
  if (raw_out) *raw_out = std::move(reports);
  return table;
}

std::pair<std::vector<float>, std::vector<float>> partial_norm_from_teacher(
    const ppo::PolicyCheckpoint& teacher) {
  const auto map = env::partial_index_map();
  std::vector<float> mean(12), stddev(12);
  for (int i = 0; i < 12; ++i) {
    mean[i] = static_cast<float>(teacher.norm.mean(map[i]));
    stddev[i] = static_cast<float>(teacher.norm.stddev(map[i]));
  }
  return {mean, stddev};
}

}  // namespace bg::eval
