#pragma once

#include <string>

#include "samro/mlp.hpp"
#include "samro/types.hpp"

namespace samro {

struct Td3Config {
  double gamma = 0.1;
  double tau = 0.005;
  double lr_actor = 1e-3;
  double lr_critic = 2e-3;
  int batch_size = 64;
  double target_noise = 0.2;       // normalized action units
  double target_noise_clip = 0.5;  // c
  double explore_noise = 0.1;
  int actor_period = 3;  // H^(A)
  double grad_clip = 10.0;
  std::vector<int> actor_hidden{128, 64, 32};
  std::vector<int> critic_hidden{64, 16, 4};
};

struct CriticLosses {
  double q1 = 0.0;
  double q2 = 0.0;
};

/// Twin-delayed deterministic actor-critic. States arrive already scaled;
/// actions live in the normalized box [-1, 1] everywhere inside the agent.
class Td3Agent {
 public:
  static Td3Agent make(int state_dim, int action_dim, const Td3Config& cfg, Rng& rng);

  /// Pins the initial policy to a fixed point of the normalized box (the
  /// default operating configuration): zeroes the actor's output layer and
  /// writes the pre-tanh image of the target into its bias. Targets follow.
  void set_initial_policy(const Vec& normalized_action);

  /// Deterministic actor output (tanh box).
  Vec policy(const Vec& state) const;
  /// Actor output plus exploration noise, clipped back into the box.
  Vec select_action(const Vec& state, double noise_std, Rng& rng) const;
  /// Smoothed target-policy actions for a batch of next states.
  Mat target_actions(const Mat& next_states, Rng& rng) const;

  double q1_value(const Vec& state, const Vec& action) const;

  /// One TD step on both critics against the twin-target minimum.
  CriticLosses critic_update(const Mat& states, const Mat& actions, const Vec& rewards,
                             const Mat& next_states, Rng& rng);
  /// Deterministic policy gradient through the first critic (critics frozen);
  /// returns the actor loss, i.e. minus the mean Q estimate.
  double actor_update(const Mat& states);
  void soft_update_targets();

  void save(const std::string& dir) const;
  static Td3Agent load(const std::string& dir);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }

  Td3Config cfg;
  MlpModel actor, actor_target, q1, q2, q1_target, q2_target;
  Adam opt_actor, opt_q1, opt_q2;

 private:
  int state_dim_ = 0;
  int action_dim_ = 0;
};

}  // namespace samro
