// bgrasp: blind-grasping training and evaluation pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "config/config.hpp"
#include "distill/collect.hpp"
#include "eval/ablation.hpp"

namespace fs = std::filesystem;
using namespace bg;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string profile = "desk";
  uint64_t seed = 0;
  int threads = 1;
};

void write_run_manifest(const GlobalArgs& args, const cfg::PipelineConfig& cfg,
                        const std::string& command) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["seed"] = args.seed;
  manifest["profile"] = args.profile;
  manifest["config"] = nlohmann::json::parse(cfg::config_to_json(cfg));
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  manifest["unix_time"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
  fs::create_directories(args.out_dir);
  std::ofstream f(args.out_dir + "/run_manifest.json");
  f << manifest.dump(2) << "\n";
}

ppo::TeacherTrainConfig teacher_config(const cfg::PipelineConfig& cfg, const GlobalArgs& args,
                                       bool partial_obs) {
  ppo::TeacherTrainConfig tc;
  tc.ppo = cfg.teacher;
  tc.env = cfg.env;
  tc.objects = cfg.train_objects;
  tc.hidden = cfg.teacher_hidden;
  tc.partial_obs = partial_obs;
  tc.seed = args.seed;
  tc.out_dir = args.out_dir;
  tc.worker_threads = cfg.worker_threads;
  return tc;
}

int cmd_train_teacher(const GlobalArgs& args, const cfg::PipelineConfig& cfg, bool partial_obs,
                      double incentive_weight, int checkpoint_every) {
  cfg::PipelineConfig eff = cfg;
  if (incentive_weight >= 0) eff.env.weights.incentive = incentive_weight;
  write_run_manifest(args, eff, partial_obs ? "train-teacher --partial-obs" : "train-teacher");

  ppo::TeacherTrainConfig tc = teacher_config(eff, args, partial_obs);
  tc.checkpoint_every = checkpoint_every;
  ppo::TeacherTrainer trainer(tc);
  std::printf("training %s policy: %d envs, %d iterations, obs dim %d\n",
              partial_obs ? "partial-observation" : "teacher", tc.ppo.n_envs,
              tc.ppo.max_iterations, trainer.actor_critic().obs_dim);
  trainer.run([](const ppo::TrainLogRow& row) {
    if (row.iteration % 10 == 0 || row.iteration == 1) {
      std::printf("iter %4d  return %8.2f +- %6.2f  success %5.1f%%  kl %.4f  lr %.2e\n",
                  row.iteration, row.return_mean, row.return_std, 100 * row.success_proxy,
                  row.kl, row.lr);
      std::fflush(stdout);
    }
  });
  std::printf("saved %s/teacher_final.ckpt\n", args.out_dir.c_str());
  return 0;
}

int cmd_collect(const GlobalArgs& args, const cfg::PipelineConfig& cfg,
                const std::string& teacher_path, bool deterministic, bool retain_all,
                const std::string& dataset_out) {
  write_run_manifest(args, cfg, "collect-demos");
  const auto teacher =
      ppo::PolicyCheckpoint::from_file(nn::Checkpoint::load(teacher_path));
  distill::CollectOptions opts = cfg.collect;
  opts.stochastic_teacher = !deterministic && cfg.collect.stochastic_teacher;
  opts.retain_all = retain_all || cfg.collect.retain_all;
  opts.seed = args.seed;
  opts.worker_threads = cfg.worker_threads;
  const auto ds = distill::collect_demos(teacher, cfg.env, cfg.train_objects, cfg.curation, opts);
  const std::string path = dataset_out.empty() ? args.out_dir + "/demos.bgds" : dataset_out;
  ds.save(path);
  std::printf("collected %zu episodes (%lld steps) -> %s\n", ds.episodes.size(),
              static_cast<long long>(ds.total_steps()), path.c_str());
  return 0;
}

int cmd_curate(const GlobalArgs& args, const cfg::PipelineConfig& cfg, const std::string& in_path,
               const std::string& out_path) {
  write_run_manifest(args, cfg, "curate");
  const auto raw = distill::DemoDataset::load(in_path);
  const auto [kept, decisions] = distill::curate(raw, cfg.curation);
  const std::string path = out_path.empty() ? args.out_dir + "/curated.bgds" : out_path;
  kept.save(path);
  {
    std::ofstream f(args.out_dir + "/curation_decisions.csv");
    f << "episode_id,kept,rejected_by\n";
    for (const auto& d : decisions) {
      f << d.episode_id << ',' << (d.kept ? 1 : 0) << ',' << d.rejected_by << "\n";
    }
  }
  std::printf("kept %zu / %zu episodes -> %s\n", kept.episodes.size(), raw.episodes.size(),
              path.c_str());
  return 0;
}

int cmd_train_student(const GlobalArgs& args, const cfg::PipelineConfig& cfg,
                      const std::string& dataset_path, const std::string& teacher_path,
                      const std::string& student_out) {
  write_run_manifest(args, cfg, "train-student");
  const auto dataset = distill::DemoDataset::load(dataset_path);
  const auto teacher =
      ppo::PolicyCheckpoint::from_file(nn::Checkpoint::load(teacher_path));
  const auto [mean, stddev] = eval::partial_norm_from_teacher(teacher);
  distill::BCConfig bc = cfg.bc;
  bc.seed = args.seed;
  std::printf("training student on %zu episodes (%lld windows)\n", dataset.episodes.size(),
              static_cast<long long>(dataset.total_steps()));
  const auto result = distill::train_bc(dataset, bc, cfg.student, mean, stddev, args.out_dir);
  const std::string path = student_out.empty() ? args.out_dir + "/student.ckpt" : student_out;
  result.student.to_file().save(path);
  std::printf("final loss %.6f -> %s\n",
              result.loss_curve.empty() ? -1.0 : result.loss_curve.back(), path.c_str());
  return 0;
}

//! Loads any checkpoint kind and wraps it as an evaluation policy.
struct LoadedPolicy {
  std::unique_ptr<ppo::PolicyCheckpoint> gaussian;
  std::unique_ptr<ppo::GaussianActorPolicy> gaussian_policy;
  std::unique_ptr<distill::StudentPolicyData> student;
  std::unique_ptr<distill::StudentPolicy> student_policy;
  eval::EvalPolicy handle;
};

LoadedPolicy load_policy(const std::string& path, const std::string& name) {
  LoadedPolicy lp;
  const auto ck = nn::Checkpoint::load(path);
  const std::string kind = ck.meta.at("kind");
  if (kind == "mlp_gaussian") {
    lp.gaussian = std::make_unique<ppo::PolicyCheckpoint>(ppo::PolicyCheckpoint::from_file(ck));
    lp.gaussian_policy = std::make_unique<ppo::GaussianActorPolicy>(
        &lp.gaussian->ac, &lp.gaussian->norm, lp.gaussian->privileged, false);
    lp.handle = {lp.gaussian_policy.get(), nullptr, name};
  } else if (kind == "transformer_bc") {
    lp.student = std::make_unique<distill::StudentPolicyData>(
        distill::StudentPolicyData::from_file(ck));
    lp.student_policy = std::make_unique<distill::StudentPolicy>(lp.student.get(), 1);
    auto* sp = lp.student_policy.get();
    lp.handle = {sp, [sp] { sp->reset_history(); }, name};
  } else {
    throw std::runtime_error("unknown checkpoint kind: " + kind);
  }
  return lp;
}

int cmd_evaluate(const GlobalArgs& args, const cfg::PipelineConfig& cfg,
                 const std::string& checkpoint_path, const std::string& stem) {
  write_run_manifest(args, cfg, "evaluate");
  auto lp = load_policy(checkpoint_path, fs::path(checkpoint_path).stem().string());
  eval::EvalProtocol protocol = cfg.eval_protocol;
  protocol.seed_base = args.seed;
  const auto report = eval::evaluate(lp.handle, cfg.env, cfg.eval_objects, protocol);
  eval::write_report(report, args.out_dir, stem);
  std::printf("%s\n", eval::report_to_markdown(report).c_str());
  std::printf("overall %.1f%% -> %s/%s.csv\n", 100 * report.overall_rate(),
              args.out_dir.c_str(), stem.c_str());
  return 0;
}

int cmd_inspect(const cfg::PipelineConfig&, const std::string& dataset_path) {
  const auto ds = distill::DemoDataset::load(dataset_path);
  std::printf("dataset: %zu episodes, %lld steps, obs dim %d, act dim %d\n", ds.episodes.size(),
              static_cast<long long>(ds.total_steps()), distill::kDemoObsDim,
              distill::kDemoActDim);
  std::printf("criteria: r_t > %.2f for %.2f s, cumulative force > %.1f N, horizon %.1f s\n",
              ds.criteria.task_reward_threshold, ds.criteria.sustain_seconds,
              ds.criteria.force_sum_threshold, ds.criteria.episode_horizon);
  std::map<std::string, int> counts;
  for (const auto& e : ds.episodes) counts[e.object_id]++;
  for (const auto& [id, c] : counts) std::printf("  %-14s %d\n", id.c_str(), c);
  return 0;
}

int cmd_ablate(const GlobalArgs& args, const cfg::PipelineConfig& cfg,
               const std::string& artifacts_dir) {
  write_run_manifest(args, cfg, "ablate");
  fs::create_directories(artifacts_dir);

  const auto ensure = [&](const std::string& file, const std::function<void()>& make) {
    if (!fs::exists(artifacts_dir + "/" + file)) {
      std::printf("[ablate] building %s\n", file.c_str());
      make();
    } else {
      std::printf("[ablate] reusing %s\n", file.c_str());
    }
  };

  // Teacher, and the incentive-free teacher variant.
  ensure("teacher_final.ckpt", [&] {
    ppo::TeacherTrainConfig tc = teacher_config(cfg, args, false);
    tc.out_dir = artifacts_dir;
    ppo::TeacherTrainer(tc).run();
  });
  ensure("teacher_no_ri.ckpt", [&] {
    cfg::PipelineConfig no_ri = cfg;
    no_ri.env.weights.incentive = 0.0;
    ppo::TeacherTrainConfig tc = teacher_config(no_ri, args, false);
    tc.out_dir = artifacts_dir + "/no_ri";
    ppo::TeacherTrainer trainer(tc);
    trainer.run().to_file().save(artifacts_dir + "/teacher_no_ri.ckpt");
  });
  ensure("partial_rl.ckpt", [&] {
    ppo::TeacherTrainConfig tc = teacher_config(cfg, args, true);
    tc.out_dir = artifacts_dir + "/partial";
    ppo::TeacherTrainer trainer(tc);
    trainer.run().to_file().save(artifacts_dir + "/partial_rl.ckpt");
  });

  const auto teacher = ppo::PolicyCheckpoint::from_file(
      nn::Checkpoint::load(artifacts_dir + "/teacher_final.ckpt"));
  const auto [nm, ns] = eval::partial_norm_from_teacher(teacher);

  const auto train_student_from = [&](const distill::DemoDataset& ds, const std::string& file) {
    distill::BCConfig bc = cfg.bc;
    bc.seed = args.seed;
    const auto result = distill::train_bc(ds, bc, cfg.student, nm, ns);
    result.student.to_file().save(artifacts_dir + "/" + file);
  };

  ensure("student_proposed.ckpt", [&] {
    distill::CollectOptions opts = cfg.collect;
    opts.seed = args.seed;
    opts.worker_threads = cfg.worker_threads;
    const auto ds = distill::collect_demos(teacher, cfg.env, cfg.train_objects, cfg.curation, opts);
    ds.save(artifacts_dir + "/demos_curated.bgds");
    train_student_from(ds, "student_proposed.ckpt");
  });
  ensure("student_no_stochastic.ckpt", [&] {
    distill::CollectOptions opts = cfg.collect;
    opts.seed = args.seed + 1;
    opts.stochastic_teacher = false;
    opts.worker_threads = cfg.worker_threads;
    const auto ds = distill::collect_demos(teacher, cfg.env, cfg.train_objects, cfg.curation, opts);
    train_student_from(ds, "student_no_stochastic.ckpt");
  });
  ensure("student_no_curation.ckpt", [&] {
    distill::CollectOptions opts = cfg.collect;
    opts.seed = args.seed + 2;
    opts.retain_all = true;
    opts.worker_threads = cfg.worker_threads;
    const auto ds = distill::collect_demos(teacher, cfg.env, cfg.train_objects, cfg.curation, opts);
    train_student_from(ds, "student_no_curation.ckpt");
  });
  ensure("student_no_ri.ckpt", [&] {
    const auto no_ri_teacher = ppo::PolicyCheckpoint::from_file(
        nn::Checkpoint::load(artifacts_dir + "/teacher_no_ri.ckpt"));
    distill::CollectOptions opts = cfg.collect;
    opts.seed = args.seed + 3;
    opts.retain_all = true;  // per the ablation definition: no selection criteria
    opts.worker_threads = cfg.worker_threads;
    const auto ds =
        distill::collect_demos(no_ri_teacher, cfg.env, cfg.train_objects, cfg.curation, opts);
    train_student_from(ds, "student_no_ri.ckpt");
  });

  std::vector<LoadedPolicy> loaded;
  loaded.push_back(load_policy(artifacts_dir + "/student_proposed.ckpt", "Student (proposed)"));
  loaded.push_back(
      load_policy(artifacts_dir + "/student_no_stochastic.ckpt", "Student w/o stochastic teacher"));
  loaded.push_back(load_policy(artifacts_dir + "/student_no_curation.ckpt", "Student w/o curation"));
  loaded.push_back(load_policy(artifacts_dir + "/student_no_ri.ckpt", "Student w/o incentive"));
  loaded.push_back(load_policy(artifacts_dir + "/partial_rl.ckpt", "RL w/ partial obs"));

  std::vector<eval::AblationVariant> variants;
  for (auto& lp : loaded) variants.push_back({lp.handle.name, lp.handle});

  eval::EvalProtocol protocol = cfg.eval_protocol;
  protocol.seed_base = args.seed;
  std::vector<eval::Report> raw;
  const auto table = run_ablation(variants, cfg.env, cfg.eval_objects, protocol, &raw);

  fs::create_directories(args.out_dir);
  std::ofstream(args.out_dir + "/ablation.csv") << eval::ablation_to_csv(table);
  std::ofstream(args.out_dir + "/ablation.md") << eval::ablation_to_markdown(table);
  for (const auto& r : raw) {
    eval::write_report(r, args.out_dir, "ablation_" + r.policy_name);
  }
  std::printf("%s\n", eval::ablation_to_markdown(table).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind-grasping teacher-student pipeline"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "JSON config overlay");
  app.add_option("--seed", args.seed, "master seed");
  app.add_option("--out", args.out_dir, "output directory");
  app.add_option("--profile", args.profile, "defaults profile: desk or paper");
  app.add_option("--threads", args.threads, "worker threads for env stepping");

  auto* tt = app.add_subcommand("train-teacher", "PPO-train the privileged teacher");
  bool partial = false;
  double incentive_weight = -1;
  int checkpoint_every = 0;
  tt->add_flag("--partial-obs", partial, "train on the 12-dim observation instead");
  tt->add_option("--incentive-weight", incentive_weight,
                 "override the incentive reward weight (0 = the no-incentive ablation)");
  tt->add_option("--checkpoint-every", checkpoint_every, "periodic checkpoint interval");

  auto* cd = app.add_subcommand("collect-demos", "roll out the teacher and log demonstrations");
  std::string teacher_path, dataset_out;
  bool deterministic = false, retain_all = false;
  cd->add_option("--teacher", teacher_path, "teacher checkpoint")->required();
  cd->add_flag("--deterministic", deterministic, "use the mean action (no sampling)");
  cd->add_flag("--retain-all", retain_all, "keep every episode (uncurated ablation)");
  cd->add_option("--dataset-out", dataset_out, "output dataset path");

  auto* cu = app.add_subcommand("curate", "filter a demonstration dataset");
  std::string curate_in, curate_out;
  cu->add_option("--dataset", curate_in, "input dataset")->required();
  cu->add_option("--dataset-out", curate_out, "output dataset path");

  auto* ts = app.add_subcommand("train-student", "behavioral-cloning student training");
  std::string bc_dataset, bc_teacher, student_out;
  ts->add_option("--dataset", bc_dataset, "demonstration dataset")->required();
  ts->add_option("--teacher", bc_teacher, "teacher checkpoint (normalization stats)")->required();
  ts->add_option("--student-out", student_out, "output checkpoint path");

  auto* ev = app.add_subcommand("evaluate", "seeded grasp evaluation of a checkpoint");
  std::string eval_ckpt, report_stem = "report";
  ev->add_option("--checkpoint", eval_ckpt, "policy checkpoint")->required();
  ev->add_option("--report-stem", report_stem, "report file stem");

  auto* ab = app.add_subcommand("ablate", "train missing variants and run the ablation matrix");
  std::string artifacts = "artifacts";
  ab->add_option("--artifacts", artifacts, "directory for variant checkpoints");

  auto* in = app.add_subcommand("inspect-dataset", "print dataset manifest and contents");
  std::string inspect_path;
  in->add_option("--dataset", inspect_path, "dataset path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg::PipelineConfig cfg = cfg::load_config(args.profile, args.config_path);
    cfg.worker_threads = args.threads;
    if (tt->parsed()) return cmd_train_teacher(args, cfg, partial, incentive_weight, checkpoint_every);
    if (cd->parsed()) return cmd_collect(args, cfg, teacher_path, deterministic, retain_all, dataset_out);
    if (cu->parsed()) return cmd_curate(args, cfg, curate_in, curate_out);
    if (ts->parsed()) return cmd_train_student(args, cfg, bc_dataset, bc_teacher, student_out);
    if (ev->parsed()) return cmd_evaluate(args, cfg, eval_ckpt, report_stem);
    if (ab->parsed()) return cmd_ablate(args, cfg, artifacts);
    if (in->parsed()) return cmd_inspect(cfg, inspect_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
