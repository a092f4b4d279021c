#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "config/config.hpp"
#include "eval/ablation.hpp"

using namespace bg;
using namespace bg::eval;

namespace {

//! Policy that never closes the fingers.
class AlwaysOpenPolicy : public env::BatchPolicy {
 public:
  int obs_dim() const override { return env::partial_dim(); }
  bool wants_privileged() const override { return false; }
  void act(const std::vector<double>&, int n, std::vector<RngStream>&,
           std::vector<double>& out) override {
    out.assign(static_cast<size_t>(n) * 9, 0.0);
  }
};

}  // namespace

TEST_CASE("success rule: 19 consecutive ticks fail, 20 succeed") {
  env::EnvConfig cfg;
  cfg.object_id = "Sphere-M";
  cfg.physics.gravity = 0.0;  // hold the object wherever we place it
  cfg.randomization.noise_enabled = false;
  cfg.randomization.disturbance_enabled = false;
  EvalProtocol protocol;
  const int hold = protocol.hold_ticks(0.05);
  CHECK(hold == 20);

  env::Environment env(cfg, 5);
  env.mutable_world().body.position = {0.0, 0.0, 0.15};  // above h_t, airborne
  env.mutable_world().body.linear_velocity = {0, 0, 0};
  env.mutable_world().body.angular_velocity = {0, 0, 0};

  for (int i = 0; i < 19; ++i) {
    env.step(env::Action{});
    CHECK(env.lifted_streak() == i + 1);
  }
  CHECK(env.lifted_streak() < hold);  // 0.95 s: not yet a success
  env.step(env::Action{});
  CHECK(env.lifted_streak() == hold);  // 1.0 s: success
}

TEST_CASE("lift requires no ground contact, not just height") {
  env::EnvConfig cfg;
  cfg.object_id = "CuboidA-M";
  cfg.target_height = 0.02;  // below the resting height: still on the ground
  env::Environment env(cfg, 6);
  env.step(env::Action{});
  CHECK(env.world().body.position.z >= cfg.target_height);
  CHECK_FALSE(env.lifted_now());  // ground contact blocks the success state
}

TEST_CASE("evaluate: always-open policy scores zero and reruns identically") {
  env::EnvConfig cfg;
  cfg.object_id = "Sphere-M";
  EvalProtocol protocol;
  protocol.trials_per_object = 3;
  protocol.episode_duration = 2.0;
  protocol.seed_base = 42;

  AlwaysOpenPolicy open_policy;
  EvalPolicy handle{&open_policy, nullptr, "always-open"};
  const auto a = evaluate(handle, cfg, {"Sphere-M", "CuboidA-M"}, protocol);
  CHECK(a.overall_rate() == 0.0);
  CHECK(a.trials.size() == 6);
  for (const auto& t : a.trials) {
    CHECK_FALSE(t.success);
    CHECK(t.time_to_grasp == -1.0);
  }

  const auto b = evaluate(handle, cfg, {"Sphere-M", "CuboidA-M"}, protocol);
  CHECK(report_to_csv(a) == report_to_csv(b));
}

TEST_CASE("report CSV round trip reproduces rates exactly") {
  Report r;
  r.policy_name = "unit";
  RngStream rng(3);
  for (const char* obj : {"Sphere-M", "Capsule-M", "CuboidA-M"}) {
    for (int k = 0; k < 10; ++k) {
      TrialResult t;
      t.object_id = obj;
      t.seed = rng.next_u64();
      t.success = rng.uniform01() < 0.6;
      t.time_to_grasp = t.success ? rng.uniform(1.0, 9.0) : -1.0;
      t.peak_force = rng.uniform(0.0, 8.0);
      r.trials.push_back(t);
    }
  }
  const std::string csv = report_to_csv(r);
  const Report back = report_from_csv(csv);
  CHECK(back.policy_name == "unit");
  REQUIRE(back.trials.size() == r.trials.size());
  CHECK(back.overall_rate() == r.overall_rate());
  const auto ra = r.per_object(), rb = back.per_object();
  REQUIRE(ra.size() == rb.size());
  for (size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].object_id == rb[i].object_id);
    CHECK(ra[i].successes == rb[i].successes);
  }
  CHECK(report_to_csv(back) == csv);
}

TEST_CASE("ablation table: 6 objects x 5 variants with averages") {
  std::vector<Report> reports;
  RngStream rng(9);
  const auto objects = sim::medium_object_ids();
  for (int v = 0; v < 5; ++v) {
    Report r;
    r.policy_name = "variant" + std::to_string(v);
    for (const auto& obj : objects) {
      for (int k = 0; k < 4; ++k) {
        TrialResult t;
        t.object_id = obj;
        t.success = rng.uniform01() < 0.5;
        r.trials.push_back(t);
      }
    }
    reports.push_back(std::move(r));
  }
  const auto table = AblationReport::from_reports(reports);
  CHECK(table.objects.size() == 6);
  CHECK(table.variants.size() == 5);
  CHECK(table.rates.size() == 6);
  for (const auto& row : table.rates) CHECK(row.size() == 5);
  CHECK(table.averages.size() == 5);
  for (int v = 0; v < 5; ++v) {
    double avg = 0;
    for (int o = 0; o < 6; ++o) avg += table.rates[o][v];
    CHECK(table.averages[v] == doctest::Approx(avg / 6).epsilon(1e-12));
  }

  const std::string csv = ablation_to_csv(table);
  CHECK(csv.find("variant0") != std::string::npos);
  const std::string md = ablation_to_markdown(table);
  // Column order matches the variant order.
  CHECK(md.find("variant0") < md.find("variant1"));
  CHECK(md.find("variant4") != std::string::npos);
}

TEST_CASE("config profiles and error reporting") {
  const auto desk = cfg::desk_profile();
  CHECK(desk.teacher.n_envs == 256);
  CHECK(desk.teacher_hidden == std::vector<int>{128, 64, 32});
  CHECK(desk.teacher.max_iterations == 600);
  CHECK(desk.student.embed == 64);
  CHECK(desk.student.context == 30);
  CHECK(desk.train_objects.size() == 6);
  CHECK_NOTHROW(desk.validate());

  const auto paper = cfg::paper_profile();
  CHECK(paper.teacher.n_envs == 9000);
  CHECK(paper.teacher.max_iterations == 4500);
  CHECK(paper.teacher_hidden == std::vector<int>{512, 256, 128});
  CHECK(paper.student.layers == 6);
  CHECK(paper.student.embed == 512);
  CHECK(paper.student.heads == 8);
  CHECK(paper.bc.epochs == 2000);
  CHECK(paper.collect.target_count == 89500);
  CHECK(paper.train_objects.size() == 18);

  cfg::PipelineConfig c = cfg::desk_profile();
  CHECK_THROWS_WITH_AS(cfg::apply_json(c, R"({"teacher": {"leraning_rate": 0.01}})"),
                       doctest::Contains("leraning_rate"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg::apply_json(c, R"({"teacher": {"learning_rate": "fast"}})"),
                       doctest::Contains("learning_rate"), std::invalid_argument);
  CHECK_THROWS_AS(cfg::apply_json(c, "{nonsense"), std::invalid_argument);

  cfg::apply_json(c, R"({"teacher": {"envs": 64, "iterations": 10}, "eval": {"trials_per_object": 2}})");
  CHECK(c.teacher.n_envs == 64);
  CHECK(c.teacher.max_iterations == 10);
  CHECK(c.eval_protocol.trials_per_object == 2);

  // Snapshot -> reapply round trip.
  const std::string snapshot = cfg::config_to_json(c);
  cfg::PipelineConfig c2 = cfg::desk_profile();
  cfg::apply_json(c2, snapshot);
  CHECK(c2.teacher.n_envs == 64);
  CHECK(cfg::config_to_json(c2) == snapshot);
}

TEST_CASE("partial-channel statistics extraction from a teacher checkpoint") {
  ppo::PolicyCheckpoint teacher;
  teacher.ac = ppo::ActorCritic::make(env::privileged_dim(), {8}, 1);
  teacher.hidden = {8};
  teacher.norm.reset(env::privileged_dim());
  std::vector<double> row(env::privileged_dim());
  RngStream rng(2);
  for (int r = 0; r < 50; ++r) {
    for (size_t i = 0; i < row.size(); ++i) row[i] = i + rng.normal();
    teacher.norm.update(row.data(), 1);
  }
  const auto [mean, stddev] = eval::partial_norm_from_teacher(teacher);
  const auto map = env::partial_index_map();
  for (int i = 0; i < 12; ++i) {
    CHECK(mean[i] == doctest::Approx(teacher.norm.mean(map[i])).epsilon(1e-6));
    CHECK(stddev[i] == doctest::Approx(teacher.norm.stddev(map[i])).epsilon(1e-6));
  }
}
