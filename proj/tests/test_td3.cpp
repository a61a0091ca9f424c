#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "samro/td3.hpp"

using namespace samro;

namespace {

Td3Config small_config() {
  Td3Config cfg;
  cfg.actor_hidden = {16, 16};
  cfg.critic_hidden = {32, 32};
  return cfg;
}

Vec random_vec(int n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("select_action: noiseless determinism, clipping, seeded reproducibility") {
  Rng rng(3);
  Td3Agent agent = Td3Agent::make(4, 3, small_config(), rng);
  const Vec s = random_vec(4, rng);

  Rng noise_rng(9);
  const Vec quiet = agent.select_action(s, 0.0, noise_rng);
  CHECK((quiet - agent.policy(s)).cwiseAbs().maxCoeff() == 0.0);

  for (int trial = 0; trial < 50; ++trial) {
    const Vec a = agent.select_action(s, 0.8, noise_rng);
    CHECK(a.maxCoeff() <= 1.0);
    CHECK(a.minCoeff() >= -1.0);
  }

  Rng r1(123), r2(123);
  const Vec a1 = agent.select_action(s, 0.3, r1);
  const Vec a2 = agent.select_action(s, 0.3, r2);
  CHECK((a1 - a2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("target actions: smoothing noise is clipped then the sum is boxed") {
  Rng rng(5);
  Td3Config cfg = small_config();
  cfg.target_noise = 0.4;
  cfg.target_noise_clip = 0.5;
  Td3Agent agent = Td3Agent::make(3, 2, cfg, rng);
  const Mat states = random_vec(3 * 40, rng).reshaped(3, 40);

  Rng noise_rng(17);
  const Mat targets = agent.target_actions(states, noise_rng);
  const Mat base = agent.actor_target.forward(states);
  CHECK(targets.maxCoeff() <= 1.0);
  CHECK(targets.minCoeff() >= -1.0);
  for (int i = 0; i < targets.size(); ++i) {
    // Contribution never exceeds the clip bound.
    const double diff = targets.data()[i] - std::clamp(base.data()[i], -1.0, 1.0);
    CHECK(std::abs(diff) <= cfg.target_noise_clip + 1e-12);
  }

  Td3Config quiet_cfg = small_config();
  quiet_cfg.target_noise = 0.0;
  Rng rng2(5);
  Td3Agent quiet = Td3Agent::make(3, 2, quiet_cfg, rng2);
  Rng nrng(1);
  const Mat q_targets = quiet.target_actions(states, nrng);
  const Mat clipped = quiet.actor_target.forward(states).cwiseMax(-1.0).cwiseMin(1.0);
  CHECK((q_targets - clipped).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("critic targets against hand-computed values on a frozen tiny agent") {
  Rng rng(7);
  Td3Config cfg = small_config();
  cfg.gamma = 0.5;
  cfg.target_noise = 0.0;  // deterministic targets
  Td3Agent agent = Td3Agent::make(2, 1, cfg, rng);

  const Mat states = random_vec(2 * 2, rng).reshaped(2, 2);
  const Mat actions = random_vec(1 * 2, rng).reshaped(1, 2).cwiseMax(-1.0).cwiseMin(1.0);
  Vec rewards(2);
  rewards << 1.0, -0.5;
  const Mat next_states = random_vec(2 * 2, rng).reshaped(2, 2);

  // Hand evaluation of y = r + gamma * min(Q1', Q2') at the smoothed target
  // action (noiseless here), and of the mean squared errors.
  Vec y(2);
  Vec pred1(2), pred2(2);
  for (int i = 0; i < 2; ++i) {
    const Vec s2 = next_states.col(i);
    Vec a2 = agent.actor_target.forward_one(s2).cwiseMax(-1.0).cwiseMin(1.0);
    Vec x2(3);
    x2 << s2(0), s2(1), a2(0);
    const double q1n = agent.q1_target.forward_one(x2)(0);
    const double q2n = agent.q2_target.forward_one(x2)(0);
    y(i) = rewards(i) + cfg.gamma * std::min(q1n, q2n);
    Vec x(3);
    x << states(0, i), states(1, i), actions(0, i);
    pred1(i) = agent.q1.forward_one(x)(0);
    pred2(i) = agent.q2.forward_one(x)(0);
  }
  const double want_loss1 = (pred1 - y).squaredNorm() / 2.0;
  const double want_loss2 = (pred2 - y).squaredNorm() / 2.0;

  Rng update_rng(11);
  const CriticLosses losses =
      agent.critic_update(states, actions, rewards, next_states, update_rng);
  CHECK(losses.q1 == doctest::Approx(want_loss1).epsilon(1e-10));
  CHECK(losses.q2 == doctest::Approx(want_loss2).epsilon(1e-10));
}

TEST_CASE("gamma zero regresses the instantaneous reward") {
  Rng rng(13);
  Td3Config cfg = small_config();
  cfg.gamma = 0.0;
  cfg.lr_critic = 0.01;
  Td3Agent agent = Td3Agent::make(2, 1, cfg, rng);
  const int m = 64;
  Mat states = random_vec(2 * m, rng).reshaped(2, m);
  Mat actions = random_vec(m, rng).reshaped(1, m).cwiseMax(-1.0).cwiseMin(1.0);
  Vec rewards(m);
  for (int i = 0; i < m; ++i) rewards(i) = states(0, i);  // reward = first state entry
  Rng update_rng(3);
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 400; ++it) {
    const CriticLosses l = agent.critic_update(states, actions, rewards, states, update_rng);
    if (it == 0) first = l.q1;
    last = l.q1;
  }
  CHECK(last < 0.1 * first);  // the critic fits the rewards
}

TEST_CASE("actor update moves only the actor, critics stay frozen") {
  Rng rng(17);
  Td3Agent agent = Td3Agent::make(3, 2, small_config(), rng);
  const Mat states = random_vec(3 * 8, rng).reshaped(3, 8);
  const MlpModel q1_before = agent.q1;
  const MlpModel q2_before = agent.q2;
  const MlpModel actor_before = agent.actor;
  const MlpModel actor_target_before = agent.actor_target;
  const double loss = agent.actor_update(states);
  CHECK(parameter_distance(agent.q1, q1_before) == 0.0);
  CHECK(parameter_distance(agent.q2, q2_before) == 0.0);
  CHECK(parameter_distance(agent.actor, actor_before) > 0.0);
  // Targets only move on the explicit soft update.
  CHECK(parameter_distance(agent.actor_target, actor_target_before) == 0.0);
  // Reported loss is minus the mean q estimate of the pre-update actor.
  MlpCache cache;
  const Mat a = actor_before.forward(states, cache);
  Mat x(5, 8);
  x.topRows(3) = states;
  x.bottomRows(2) = a;
  CHECK(loss == doctest::Approx(-q1_before.forward(x).mean()).epsilon(1e-12));
}

TEST_CASE("zero critic gives zero actor gradient") {
  Rng rng(19);
  Td3Agent agent = Td3Agent::make(3, 2, small_config(), rng);
  for (auto& w : agent.q1.w) w.setZero();
  for (auto& b : agent.q1.b) b.setZero();
  const MlpModel before = agent.actor;
  const Mat states = random_vec(3 * 4, rng).reshaped(3, 4);
  agent.actor_update(states);
  CHECK(parameter_distance(agent.actor, before) == 0.0);
}

TEST_CASE("actor climbs a scripted quadratic critic to its optimum") {
  // Q(s, a) = -(a - 0.4)^2 via a frozen evaluation path: feed the gradient
  // dQ/da = -2 (a - a*) through the actor exactly as actor_update would.
  Rng rng(23);
  Td3Config cfg = small_config();
  cfg.lr_actor = 5e-3;
  Td3Agent agent = Td3Agent::make(1, 1, cfg, rng);
  const double a_star = 0.4;
  const Mat states = Mat::Constant(1, 1, 0.7);
  for (int step = 0; step < 2000; ++step) {
    MlpCache cache;
    const Mat a = agent.actor.forward(states, cache);
    Mat da(1, 1);
    da(0, 0) = 2.0 * (a(0, 0) - a_star);  // minimize (a - a*)^2
    MlpGrads grads = agent.actor.grads_like();
    agent.actor.backward_params(cache, da, grads);
    clip_grad_norm(grads, cfg.grad_clip);
    agent.opt_actor.update(agent.actor, grads);
    if (std::abs(agent.actor.forward_one(states.col(0))(0) - a_star) < 1e-2) break;
  }
  CHECK(std::abs(agent.actor.forward_one(states.col(0))(0) - a_star) < 1e-2);
}

TEST_CASE("soft update copies at tau=1, freezes at tau=0, converges geometrically") {
  Rng rng(29);
  Td3Agent agent = Td3Agent::make(2, 1, small_config(), rng);
  // Drift the current networks away from the targets.
  for (auto& w : agent.q1.w) w.array() += 0.3;
  for (auto& w : agent.actor.w) w.array() += 0.1;

  agent.cfg.tau = 1.0;
  agent.soft_update_targets();
  CHECK(parameter_distance(agent.q1, agent.q1_target) == 0.0);
  CHECK(parameter_distance(agent.actor, agent.actor_target) == 0.0);

  for (auto& w : agent.q1.w) w.array() += 0.5;
  const MlpModel frozen = agent.q1_target;
  agent.cfg.tau = 0.0;
  agent.soft_update_targets();
  CHECK(parameter_distance(agent.q1_target, frozen) == 0.0);

  agent.cfg.tau = 0.1;
  double d = parameter_distance(agent.q1_target, agent.q1);
  for (int i = 0; i < 4; ++i) {
    agent.soft_update_targets();
    const double next = parameter_distance(agent.q1_target, agent.q1);
    CHECK(next == doctest::Approx(0.9 * d).epsilon(1e-9));
    d = next;
  }
}

TEST_CASE("network shapes stay fixed through training updates") {
  Rng rng(31);
  Td3Agent agent = Td3Agent::make(4, 2, small_config(), rng);
  const auto widths_actor = agent.actor.widths;
  const auto widths_q1 = agent.q1.widths;
  const Mat states = random_vec(4 * 8, rng).reshaped(4, 8);
  const Mat actions = random_vec(2 * 8, rng).reshaped(2, 8).cwiseMax(-1.0).cwiseMin(1.0);
  const Vec rewards = random_vec(8, rng);
  Rng update_rng(1);
  for (int i = 0; i < 5; ++i) {
    agent.critic_update(states, actions, rewards, states, update_rng);
    agent.actor_update(states);
    agent.soft_update_targets();
  }
  CHECK(agent.actor.widths == widths_actor);
  CHECK(agent.q1.widths == widths_q1);
  CHECK(agent.q1_target.widths == widths_q1);
}

TEST_CASE("agent checkpoints restore all six networks and optimizers") {
  Rng rng(37);
  Td3Agent agent = Td3Agent::make(3, 2, small_config(), rng);
  const Mat states = random_vec(3 * 8, rng).reshaped(3, 8);
  const Mat actions = random_vec(2 * 8, rng).reshaped(2, 8).cwiseMax(-1.0).cwiseMin(1.0);
  const Vec rewards = random_vec(8, rng);
  Rng update_rng(2);
  agent.critic_update(states, actions, rewards, states, update_rng);
  agent.actor_update(states);
  agent.soft_update_targets();

  const std::string dir = "td3_ckpt_test";
  agent.save(dir);
  Td3Agent loaded = Td3Agent::load(dir);
  CHECK(parameter_distance(loaded.actor, agent.actor) == 0.0);
  CHECK(parameter_distance(loaded.actor_target, agent.actor_target) == 0.0);
  CHECK(parameter_distance(loaded.q1, agent.q1) == 0.0);
  CHECK(parameter_distance(loaded.q2, agent.q2) == 0.0);
  CHECK(parameter_distance(loaded.q1_target, agent.q1_target) == 0.0);
  CHECK(parameter_distance(loaded.q2_target, agent.q2_target) == 0.0);
  CHECK(loaded.opt_q1.step == agent.opt_q1.step);
  CHECK(loaded.opt_actor.lr == agent.opt_actor.lr);
  CHECK(grad_norm(loaded.opt_q1.m) == doctest::Approx(grad_norm(agent.opt_q1.m)));
  std::filesystem::remove_all(dir);
}
