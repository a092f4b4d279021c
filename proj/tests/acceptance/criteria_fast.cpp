// Criteria 1-6 and 10: oracle suites, physics invariants, round trips and
// boundary rules. Each runs in seconds.

#include <chrono>
#include <cstdio>

#include "acceptance/criteria.hpp"
#include "distill/curate.hpp"
#include "env/environment.hpp"
#include "nn/checkpoint.hpp"
#include "oracles/gae_oracle.hpp"
#include "oracles/gradcheck.hpp"
#include "oracles/reward_oracle.hpp"
#include "ppo/ppo.hpp"

namespace bg::acceptance {

namespace {

using clock_type = std::chrono::steady_clock;

bool criterion1_reward(const Options&, std::string& detail) {
  using namespace bg::reward;
  const auto t0 = clock_type::now();
  RngStream rng(20260810);
  double worst = 0;
  for (int i = 0; i < 100000; ++i) {
    RewardInputs in;
    in.target_height = rng.uniform(0.05, 0.3);
    in.object_height = rng.uniform(-0.05, 0.4);
    in.object_xy[0] = rng.uniform(-0.15, 0.15);
    in.object_xy[1] = rng.uniform(-0.15, 0.15);
    in.center_xy[0] = rng.uniform(-0.02, 0.02);
    in.center_xy[1] = rng.uniform(-0.02, 0.02);
    in.contact_count = static_cast<int>(rng.below(4));
    for (int j = 0; j < 9; ++j) {
      in.joint_min[j] = rng.uniform(-1.5, -0.1);
      in.joint_max[j] = rng.uniform(0.1, 1.5);
      in.joint_angles[j] = rng.uniform(-2.0, 2.0);
      in.action[j] = rng.uniform(-0.4, 0.4);
      in.prev_action[j] = rng.uniform(-0.4, 0.4);
    }
    const RewardWeights w;
    const double mine = total_reward(in, w).total;
    const double oracle = bg::testing::reward_oracle_total(in, w);
    worst = std::max(worst, std::fabs(mine - oracle) / std::max(1.0, std::fabs(oracle)));
  }

  // Hand-evaluated cases.
  RewardInputs in;
  in.target_height = 0.1;
  in.object_height = 0.075;
  in.object_xy[0] = 0.025;
  in.contact_count = 3;
  for (int j = 0; j < 9; ++j) {
    in.joint_min[j] = -1;
    in.joint_max[j] = 1;
  }
  in.action.fill(0.1);
  const auto b = total_reward(in);
  const bool hand1 = std::fabs(b.task - 0.25) < 1e-12;
  const bool hand2 = std::fabs(b.total - 0.4455) < 1e-12;
  RewardInputs gated = in;
  gated.contact_count = 0;
  const bool hand3 = total_reward(gated).task == 0.0;
  gated.contact_count = 3;
  gated.object_xy[0] = 0.12;
  const bool hand4 = total_reward(gated).task == 0.0;

  const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
  char buf[160];
  std::snprintf(buf, sizeof buf, "1e5 inputs, max rel err %.2e; hand cases %s; %.2f s", worst,
                (hand1 && hand2 && hand3 && hand4) ? "exact" : "WRONG", secs);
  detail = buf;
  return worst <= 1e-9 && hand1 && hand2 && hand3 && hand4 && secs < 10.0;
}

bool criterion2_gae(const Options&, std::string& detail) {
  RngStream rng(77);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    ppo::RolloutBuffer b;
    b.resize(24, 4, 2);
    for (int64_t i = 0; i < b.size(); ++i) {
      b.reward[i] = static_cast<float>(rng.normal());
      b.value[i] = static_cast<float>(rng.normal());
      if (rng.uniform01() < 0.15) {
        b.done[i] = 1;
        if (rng.uniform01() < 0.5) {
          b.timeout[i] = 1;
          b.bootstrap_value[i] = static_cast<float>(rng.normal());
        }
      }
    }
    for (int n = 0; n < b.envs; ++n) {
      const int64_t last = b.idx(b.steps - 1, n);
      if (!b.done[last]) b.bootstrap_value[last] = static_cast<float>(rng.normal());
    }
    compute_gae(b, 0.99, 0.95);
    for (int n = 0; n < b.envs; ++n) {
      const auto oracle = bg::testing::gae_bruteforce(b, n, 0.99, 0.95);
      for (int t = 0; t < b.steps; ++t) {
        worst = std::max(worst, std::fabs(oracle[t] - b.advantage[b.idx(t, n)]));
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "1000 random 24-step sequences, max |diff| %.2e", worst);
  detail = buf;
  return worst < 1e-6;
}

bool criterion3_gradchecks(const Options&, std::string& detail) {
  using namespace bg::nn;
  RngStream rng(42);
  double worst_mlp = 0, worst_tr = 0, worst_ppo = 0, worst_bc = 0;

  // MLP [16,16].
  {
    MLPSpec spec{8, {16, 16}, 4, Activation::Elu};
    for (int draw = 0; draw < 50; ++draw) {
      ParamStore<double> store;
      init_mlp(store, "net", spec, rng);
      Tensor64 x = Tensor64::zeros({5, 8}), y = Tensor64::zeros({5, 4});
      for (auto& v : x.data) v = rng.normal();
      for (auto& v : y.data) v = rng.normal();
      auto value = [&](ParamStore<double>& s) {
        Tape64 t;
        auto out = mlp_forward(t, s, "net", spec, t.constant(x, "x"));
        return t.val(t.mean_all(t.square(t.sub(out, t.constant(y, "y"))))).data[0];
      };
      auto back = [&](ParamStore<double>& s) {
        Tape64 t;
        auto out = mlp_forward(t, s, "net", spec, t.constant(x, "x"));
        t.backward(t.mean_all(t.square(t.sub(out, t.constant(y, "y")))));
      };
      worst_mlp = std::max(worst_mlp, bg::testing::gradcheck(store, value, back, 1e-6, 3,
                                                             1000 + draw));
    }
  }

  // 2-layer / emb-16 transformer, context 4 (this is also the BC loss:
  // MSE between the final-position prediction and the target action).
  {
    TransformerSpec spec;
    spec.obs_dim = 12;
    spec.act_dim = 9;
    spec.layers = 2;
    spec.embed = 16;
    spec.heads = 4;
    spec.context = 4;
    spec.dropout = 0.0;
    spec.head_hidden = {16};
    for (int draw = 0; draw < 50; ++draw) {
      ParamStore<double> store;
      init_transformer(store, "s", spec, rng);
      Tensor64 x = Tensor64::zeros({2, 4, 12}), y = Tensor64::zeros({2, 9});
      for (auto& v : x.data) v = rng.normal();
      for (auto& v : y.data) v = rng.uniform(-1, 1);
      auto value = [&](ParamStore<double>& s) {
        Tape64 t;
        auto out = transformer_forward(t, s, "s", spec, t.constant(x, "x"), false, nullptr);
        return t.val(t.mean_all(t.square(t.sub(out, t.constant(y, "y"))))).data[0];
      };
      auto back = [&](ParamStore<double>& s) {
        Tape64 t;
        auto out = transformer_forward(t, s, "s", spec, t.constant(x, "x"), false, nullptr);
        t.backward(t.mean_all(t.square(t.sub(out, t.constant(y, "y")))));
      };
      const double err = bg::testing::gradcheck(store, value, back, 1e-6, 2, 2000 + draw);
      worst_tr = std::max(worst_tr, err);
      worst_bc = std::max(worst_bc, err);
    }
  }

  // PPO loss on a 16-unit toy net.
  {
    MLPSpec actor{3, {16}, 9, Activation::Elu};
    MLPSpec critic{3, {16}, 1, Activation::Elu};
    for (int draw = 0; draw < 50; ++draw) {
      ParamStore<double> params;
      init_mlp(params, "actor", actor, rng);
      init_mlp(params, "critic", critic, rng);
      params.create("log_std", {9});
      for (auto& v : params.value("log_std").data) v = rng.uniform(-0.3, 0.3);
      const int b = 6;
      std::vector<float> obs(b * 3), action(b * 9), logp_old(b), adv(b), ret(b), mask(b, 1.f);
      for (auto& v : obs) v = static_cast<float>(rng.normal());
      for (auto& v : action) v = static_cast<float>(0.3 * rng.normal());
      for (auto& v : logp_old) v = static_cast<float>(rng.normal() - 9.0);
      for (auto& v : adv) v = static_cast<float>(rng.normal());
      for (auto& v : ret) v = static_cast<float>(rng.normal());
      ppo::PPOBatchView view{obs.data(), action.data(), logp_old.data(), adv.data(), ret.data(),
                             mask.data(), b, 3};
      auto value = [&](ParamStore<double>& s) {
        Tape64 t;
        return t.val(ppo::build_ppo_loss(t, s, actor, critic, view, 0.2, 1.0, 0.003)).data[0];
      };
      auto back = [&](ParamStore<double>& s) {
        Tape64 t;
        t.backward(ppo::build_ppo_loss(t, s, actor, critic, view, 0.2, 1.0, 0.003));
      };
      worst_ppo = std::max(worst_ppo, bg::testing::gradcheck(params, value, back, 1e-6, 3,
                                                             3000 + draw));
    }
  }

  char buf[160];
  std::snprintf(buf, sizeof buf, "max rel err: mlp %.2e, transformer %.2e, ppo %.2e, bc %.2e",
                worst_mlp, worst_tr, worst_ppo, worst_bc);
  detail = buf;
  return worst_mlp < 1e-4 && worst_tr < 1e-4 && worst_ppo < 1e-4 && worst_bc < 1e-4;
}

bool criterion4_physics(const Options&, std::string& detail) {
  using namespace bg::sim;
  GripperModel model;
  PhysicsParams params;

  // Free fall over 0.5 s.
  WorldState w;
  w.joint_pos = model.home_pose();
  w.joint_targets = w.joint_pos;
  place_object(w, catalog_entry("Sphere-M"), 0, 0);
  w.body.position = {0.3, 0.3, 2.0};
  const double z0 = w.body.position.z;
  for (int i = 0; i < 10; ++i) step_physics(w, w.joint_targets, model, params);
  const double drop = z0 - w.body.position.z;
  const double expected = 0.5 * params.gravity * 0.25;
  const double fall_err = std::fabs(drop - expected) / expected;

  // Resting objects: drift and penetration < 1 mm over 1 s.
  double worst_drift = 0, worst_pen = 0;
  for (const auto& shape : object_catalog()) {
    WorldState r;
    r.joint_pos = model.home_pose();
    r.joint_targets = r.joint_pos;
    place_object(r, shape, 0.01, -0.01);
    const Vec3 p0 = r.body.position;
    for (int i = 0; i < 20; ++i) step_physics(r, r.joint_targets, model, params);
    worst_drift = std::max(worst_drift, norm(r.body.position - p0));
    for (const auto& c : r.contacts) worst_pen = std::max(worst_pen, c.penetration);
  }

  // Friction cone over 1e5 random contacts.
  RngStream rng(31337);
  int64_t contacts_checked = 0;
  bool cone_ok = true;
  while (contacts_checked < 100000) {
    WorldState c;
    for (int j = 0; j < 9; ++j) c.joint_pos[j] = rng.uniform(model.joint_min[j], model.joint_max[j]);
    for (int j = 0; j < 9; ++j) c.joint_vel[j] = rng.uniform(-2, 2);
    place_object(c, object_catalog()[rng.below(18)], rng.uniform(-0.05, 0.05),
                 rng.uniform(-0.05, 0.05));
    c.body.position.z = rng.uniform(0.0, 0.2);
    c.body.linear_velocity = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    c.body.angular_velocity = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    PhysicsParams p = params;
    p.object_static_friction = rng.uniform(0.7, 1.3);
    p.object_dynamic_friction = rng.uniform(0.7, p.object_static_friction);
    p.robot_static_friction = rng.uniform(0.7, 1.3);
    p.robot_dynamic_friction = rng.uniform(0.7, p.robot_static_friction);
    resolve_contacts(c, model, p);
    for (const auto& cp : c.contacts) {
      const double fn = dot(cp.force_world, cp.normal_world);
      const Vec3 ft = cp.force_world - cp.normal_world * fn;
      const double mu = cp.fingertip_index == ContactPoint::kGround
                            ? p.object_static_friction
                            : 0.5 * (p.robot_static_friction + p.object_static_friction);
      if (fn < 0 || norm(ft) > mu * fn + 1e-9 || cp.penetration < 0) cone_ok = false;
      ++contacts_checked;
    }
  }

  // Bit-identical replay.
  auto run_traj = [&] {
    WorldState t;
    t.joint_pos = model.home_pose();
    t.joint_targets = t.joint_pos;
    place_object(t, catalog_entry("CylinderA-M"), 0.02, 0.0);
    RngStream r(5);
    auto targets = t.joint_targets;
    for (int i = 0; i < 60; ++i) {
      for (int j = 0; j < 9; ++j) targets[j] += r.uniform(-0.05, 0.05);
      step_physics(t, targets, model, params);
    }
    return t;
  };
  const WorldState a = run_traj(), b = run_traj();
  const bool replay_ok = std::memcmp(&a.body, &b.body, sizeof a.body) == 0 &&
                         a.joint_pos == b.joint_pos && a.joint_vel == b.joint_vel;

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "fall err %.2f%%, drift %.2f mm, pen %.2f mm, cone ok on %lld contacts: %s, "
                "replay %s",
                100 * fall_err, 1000 * worst_drift, 1000 * worst_pen,
                static_cast<long long>(contacts_checked), cone_ok ? "yes" : "NO",
                replay_ok ? "bit-identical" : "DIVERGED");
  detail = buf;
  return fall_err < 0.01 && worst_drift < 1e-3 && worst_pen < 1e-3 && cone_ok && replay_ok;
}

bool criterion5_curation(const Options&, std::string& detail) {
  using namespace bg::distill;
  CurationCriteria criteria;
  RngStream rng(4242);

  DemoDataset raw;
  const auto add = [&](int length, double r_t, int run, double total_force) {
    DemoEpisode e;
    e.episode_id = raw.episodes.size();
    e.object_id = "Sphere-M";
    e.length = length;
    e.obs.assign(static_cast<size_t>(length) * kDemoObsDim, 0.f);
    e.action.assign(static_cast<size_t>(length) * kDemoActDim, 0.f);
    e.task_reward.assign(length, 0.f);
    e.forces.assign(static_cast<size_t>(length) * 3, 0.f);
    for (int t = 0; t < std::min(run, length); ++t) e.task_reward[t] = static_cast<float>(r_t);
    if (length > 0) e.forces[0] = static_cast<float>(total_force);
    raw.episodes.push_back(std::move(e));
  };

  // Boundary cases: 9 vs 10 sustain steps, 199.9 vs 200.1 N.
  add(50, 0.6, 9, 300.0);
  add(50, 0.6, 10, 300.0);
  add(50, 0.6, 20, 199.9);
  add(50, 0.6, 20, 200.1);
  add(50, 0.51, 10, 200.1);
  add(50, 0.5, 50, 300.0);  // threshold is strict >
  // Random fill to 500 episodes.
  while (raw.episodes.size() < 500) {
    add(1 + static_cast<int>(rng.below(100)), rng.uniform(0.3, 0.9),
        static_cast<int>(rng.below(40)), rng.uniform(0.0, 400.0));
  }

  const auto [kept, decisions] = curate(raw, criteria);

  // Independent re-scan.
  bool agree = true;
  for (size_t i = 0; i < raw.episodes.size(); ++i) {
    const auto& e = raw.episodes[i];
    int best = 0, run = 0;
    for (int t = 0; t < e.length; ++t) {
      run = e.task_reward[t] > criteria.task_reward_threshold ? run + 1 : 0;
      best = std::max(best, run);
    }
    double force = 0;
    for (float f : e.forces) force += f;
    const bool keep = best >= 10 && force > 200.0;
    if (keep != decisions[i].kept) agree = false;
  }

  const bool boundaries = !decisions[0].kept && decisions[1].kept && !decisions[2].kept &&
                          decisions[3].kept && decisions[4].kept && !decisions[5].kept;
  char buf[128];
  std::snprintf(buf, sizeof buf, "500 episodes, filter/oracle agree: %s, boundary cases: %s",
                agree ? "exactly" : "NO", boundaries ? "correct" : "WRONG");
  detail = buf;
  return agree && boundaries;
}

bool criterion6_roundtrips(const Options&, std::string& detail) {
  using namespace bg::distill;
  RngStream rng(99);

  // Dataset round trip on 1000 random episodes.
  DemoDataset ds;
  ds.seeds = {1, 2, 3};
  for (int i = 0; i < 1000; ++i) {
    DemoEpisode e;
    e.episode_id = i;
    e.object_id = sim::all_object_ids()[rng.below(18)];
    e.length = 1 + static_cast<int>(rng.below(100));
    e.obs.resize(static_cast<size_t>(e.length) * kDemoObsDim);
    e.action.resize(static_cast<size_t>(e.length) * kDemoActDim);
    e.task_reward.resize(e.length);
    e.forces.resize(static_cast<size_t>(e.length) * 3);
    for (auto& v : e.obs) v = static_cast<float>(rng.normal());
    for (auto& v : e.action) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : e.task_reward) v = static_cast<float>(rng.uniform01());
    for (auto& v : e.forces) v = static_cast<float>(rng.uniform(0, 5));
    ds.episodes.push_back(std::move(e));
  }
  const auto bytes = ds.to_bytes();
  bool ds_ok = DemoDataset::from_bytes(bytes).to_bytes() == bytes;
  bool ds_reject = false;
  {
    auto corrupted = bytes;
    corrupted[bytes.size() / 3] ^= 0x10;
    try {
      DemoDataset::from_bytes(corrupted);
    } catch (const std::runtime_error&) {
      ds_reject = true;
    }
    auto truncated = bytes;
    truncated.resize(bytes.size() - 13);
    try {
      DemoDataset::from_bytes(truncated);
      ds_reject = false;
    } catch (const std::runtime_error&) {
    }
  }

  // Checkpoint round trip.
  nn::Checkpoint ck;
  ck.meta = {{"kind", "mlp_gaussian"}, {"obs_dim", 92}, {"act_dim", 9}, {"format", 1},
             {"obs", "privileged"}, {"hidden", std::vector<int>{8}}, {"activation", "elu"}};
  ck.params.create("actor.l0.w", {92, 8});
  for (auto& v : ck.params.value("actor.l0.w").data) v = static_cast<float>(rng.normal());
  ck.params.create("log_std", {9});
  const auto ck_bytes = ck.to_bytes();
  const bool ck_ok = nn::Checkpoint::from_bytes(ck_bytes).to_bytes() == ck_bytes;
  bool ck_reject = false;
  {
    auto corrupted = ck_bytes;
    corrupted[ck_bytes.size() / 2] ^= 0x01;
    try {
      nn::Checkpoint::from_bytes(corrupted);
    } catch (const std::runtime_error&) {
      ck_reject = true;
    }
  }

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "dataset: exact=%s rejects-corruption=%s; checkpoint: exact=%s "
                "rejects-corruption=%s",
                ds_ok ? "yes" : "NO", ds_reject ? "yes" : "NO", ck_ok ? "yes" : "NO",
                ck_reject ? "yes" : "NO");
  detail = buf;
  return ds_ok && ds_reject && ck_ok && ck_reject;
}

bool criterion10_boundaries(const Options&, std::string& detail) {
  using namespace bg::env;

  // 19 vs 20 consecutive lifted ticks.
  EnvConfig cfg;
  cfg.object_id = "Sphere-M";
  cfg.physics.gravity = 0.0;
  cfg.randomization.noise_enabled = false;
  cfg.randomization.disturbance_enabled = false;
  Environment env(cfg, 5);
  env.mutable_world().body.position = {0.0, 0.0, 0.15};
  env.mutable_world().body.linear_velocity = {0, 0, 0};
  env.mutable_world().body.angular_velocity = {0, 0, 0};
  bool ok19 = true, ok20 = false;
  for (int i = 0; i < 19; ++i) {
    env.step(Action{});
    if (env.lifted_streak() >= 20) ok19 = false;
  }
  env.step(Action{});
  ok20 = env.lifted_streak() >= 20;

  // Escape boundary at exactly 0.10 m.
  Environment e2(cfg, 9);
  e2.mutable_world().body.position = {0.10, 0.0, 1.0};
  e2.mutable_world().body.linear_velocity = {0, 0, 0};
  e2.mutable_world().body.angular_velocity = {0, 0, 0};
  const auto r2 = e2.step(Action{});
  const bool escape_at = r2.status.terminated &&
                         r2.status.cause == TerminationCause::ObjectEscape &&
                         r2.status.planar_distance == 0.10;
  Environment e3(cfg, 9);
  e3.mutable_world().body.position = {0.09999999, 0.0, 1.0};
  e3.mutable_world().body.linear_velocity = {0, 0, 0};
  e3.mutable_world().body.angular_velocity = {0, 0, 0};
  const bool no_escape_below = !e3.step(Action{}).status.terminated;

  char buf[128];
  std::snprintf(buf, sizeof buf, "19 ticks fail=%s, 20 ticks succeed=%s, escape at 0.10=%s, "
                "below=%s",
                ok19 ? "yes" : "NO", ok20 ? "yes" : "NO", escape_at ? "yes" : "NO",
                no_escape_below ? "held" : "ESCAPED");
  detail = buf;
  return ok19 && ok20 && escape_at && no_escape_below;
}

}  // namespace

bool criterion7_ppo_sanity(const Options&, std::string&);
bool criterion8_end_to_end(const Options&, std::string&);
bool criterion9_ablation(const Options&, std::string&);

const std::vector<Criterion>& all_criteria() {
  static const std::vector<Criterion> list = {
      {1, "reward oracle suite", criterion1_reward},
      {2, "GAE brute-force oracle", criterion2_gae},
      {3, "gradient checks (MLP, transformer, PPO, BC)", criterion3_gradchecks},
      {4, "physics invariants", criterion4_physics},
      {5, "curation oracle", criterion5_curation},
      {6, "dataset and checkpoint round trips", criterion6_roundtrips},
      {7, "PPO sanity on the 1-DoF surrogate", criterion7_ppo_sanity},
      {8, "end-to-end desk-scale teacher and student", criterion8_end_to_end},
      {9, "ablation ordering", criterion9_ablation},
      {10, "success-rule boundaries", criterion10_boundaries},
  };
  return list;
}

const Criterion* find(const std::vector<Criterion>& list, int id) {
  for (const auto& c : list) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

}  // namespace bg::acceptance
