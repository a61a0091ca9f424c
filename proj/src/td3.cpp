#include "samro/td3.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace samro {

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> widths;
  widths.push_back(in);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  return widths;
}

Mat stack(const Mat& top, const Mat& bottom) {
  Mat x(top.rows() + bottom.rows(), top.cols());
  x.topRows(top.rows()) = top;
  x.bottomRows(bottom.rows()) = bottom;
  return x;
}

}  // namespace

Td3Agent Td3Agent::make(int state_dim, int action_dim, const Td3Config& cfg, Rng& rng) {
  Td3Agent agent;
  agent.cfg = cfg;
  agent.state_dim_ = state_dim;
  agent.action_dim_ = action_dim;
  agent.actor = MlpModel::make(with_ends(state_dim, cfg.actor_hidden, action_dim),
                               Activation::Relu, Activation::Tanh, rng);
  agent.q1 = MlpModel::make(with_ends(state_dim + action_dim, cfg.critic_hidden, 1),
                            Activation::Relu, Activation::Linear, rng);
  agent.q2 = MlpModel::make(with_ends(state_dim + action_dim, cfg.critic_hidden, 1),
                            Activation::Relu, Activation::Linear, rng);
  agent.actor_target = agent.actor;
  agent.q1_target = agent.q1;
  agent.q2_target = agent.q2;
  agent.opt_actor = Adam::make(agent.actor, cfg.lr_actor);
  agent.opt_q1 = Adam::make(agent.q1, cfg.lr_critic);
  agent.opt_q2 = Adam::make(agent.q2, cfg.lr_critic);
  return agent;
}

void Td3Agent::set_initial_policy(const Vec& normalized_action) {
  if (normalized_action.size() != action_dim_) {
    throw std::invalid_argument("set_initial_policy: dimension mismatch");
  }
  Mat& w_out = actor.w.back();
  Vec& b_out = actor.b.back();
  w_out.setZero();
  for (int j = 0; j < action_dim_; ++j) {
    const double a = std::clamp(normalized_action(j), -0.999, 0.999);
    b_out(j) = std::atanh(a);
  }
  actor_target = actor;
}

Vec Td3Agent::policy(const Vec& state) const { return actor.forward_one(state); }

Vec Td3Agent::select_action(const Vec& state, double noise_std, Rng& rng) const {
  Vec a = actor.forward_one(state);
  if (noise_std > 0.0) {
    std::normal_distribution<double> normal(0.0, noise_std);
    for (int j = 0; j < a.size(); ++j) a(j) += normal(rng);
  }
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

Mat Td3Agent::target_actions(const Mat& next_states, Rng& rng) const {
  Mat a = actor_target.forward(next_states);
  if (cfg.target_noise > 0.0) {
    std::normal_distribution<double> normal(0.0, cfg.target_noise);
    const double c = cfg.target_noise_clip;
    for (int j = 0; j < a.size(); ++j) {
      a.data()[j] += std::clamp(normal(rng), -c, c);
    }
  }
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

double Td3Agent::q1_value(const Vec& state, const Vec& action) const {
  Vec x(state.size() + action.size());
  x.head(state.size()) = state;
  x.tail(action.size()) = action;
  return q1.forward_one(x)(0);
}

CriticLosses Td3Agent::critic_update(const Mat& states, const Mat& actions,
                                     const Vec& rewards, const Mat& next_states,
                                     Rng& rng) {
  const int m = static_cast<int>(states.cols());
  if (m == 0) throw std::invalid_argument("critic_update: empty batch");
  const Mat next_a = target_actions(next_states, rng);
  const Mat next_x = stack(next_states, next_a);
  const Mat q1n = q1_target.forward(next_x);
  const Mat q2n = q2_target.forward(next_x);
  // y is a constant target: no gradient flows through the target networks.
  Vec y(m);
  for (int i = 0; i < m; ++i) {
    y(i) = rewards(i) + cfg.gamma * std::min(q1n(0, i), q2n(0, i));
  }

  const Mat x = stack(states, actions);
  CriticLosses losses;
  auto fit = [&](MlpModel& critic, Adam& opt, double& loss_out) {
    MlpCache cache;
    const Mat pred = critic.forward(x, cache);
    Mat err(1, m);
    for (int i = 0; i < m; ++i) err(0, i) = pred(0, i) - y(i);
    loss_out = err.squaredNorm() / m;
    MlpGrads grads = critic.grads_like();
    critic.backward_params(cache, err * (2.0 / m), grads);
    clip_grad_norm(grads, cfg.grad_clip);
    opt.update(critic, grads);
  };
  fit(q1, opt_q1, losses.q1);
  fit(q2, opt_q2, losses.q2);
  return losses;
}

double Td3Agent::actor_update(const Mat& states) {
  const int m = static_cast<int>(states.cols());
  if (m == 0) throw std::invalid_argument("actor_update: empty batch");
  MlpCache actor_cache;
  const Mat a = actor.forward(states, actor_cache);
  MlpCache q_cache;
  const Mat x = stack(states, a);
  const Mat q = q1.forward(x, q_cache);
  const double loss = -q.sum() / m;

  // d(loss)/d(q output) = -1/m; the critic stays frozen, only its input
  // gradient is needed to reach the actor.
  MlpGrads q_scratch = q1.grads_like();
  const Mat dx = q1.backward(q_cache, Mat::Constant(1, m, -1.0 / m), q_scratch);
  const Mat da = dx.bottomRows(action_dim_);
  MlpGrads grads = actor.grads_like();
  actor.backward_params(actor_cache, da, grads);
  clip_grad_norm(grads, cfg.grad_clip);
  opt_actor.update(actor, grads);
  return loss;
}

void Td3Agent::soft_update_targets() {
  soft_update(actor_target, actor, cfg.tau);
  soft_update(q1_target, q1, cfg.tau);
  soft_update(q2_target, q2, cfg.tau);
}

void Td3Agent::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  actor.save(dir + "/actor.mlp");
  actor_target.save(dir + "/actor_target.mlp");
  q1.save(dir + "/critic1.mlp");
  q2.save(dir + "/critic2.mlp");
  q1_target.save(dir + "/critic1_target.mlp");
  q2_target.save(dir + "/critic2_target.mlp");
  save_adam(dir + "/actor.adam", opt_actor);
  save_adam(dir + "/critic1.adam", opt_q1);
  save_adam(dir + "/critic2.adam", opt_q2);
  std::ofstream manifest(dir + "/manifest.txt");
  manifest << "role actor actor.mlp\n"
           << "role actor_target actor_target.mlp\n"
           << "role critic1 critic1.mlp\n"
           << "role critic2 critic2.mlp\n"
           << "role critic1_target critic1_target.mlp\n"
           << "role critic2_target critic2_target.mlp\n";
  manifest << "state_dim " << state_dim_ << "\naction_dim " << action_dim_ << "\n";
}

Td3Agent Td3Agent::load(const std::string& dir) {
  Td3Agent agent;
  agent.actor = MlpModel::load(dir + "/actor.mlp");
  agent.actor_target = MlpModel::load(dir + "/actor_target.mlp");
  agent.q1 = MlpModel::load(dir + "/critic1.mlp");
  agent.q2 = MlpModel::load(dir + "/critic2.mlp");
  agent.q1_target = MlpModel::load(dir + "/critic1_target.mlp");
  agent.q2_target = MlpModel::load(dir + "/critic2_target.mlp");
  agent.state_dim_ = agent.actor.input_dim();
  agent.action_dim_ = agent.actor.output_dim();
  agent.opt_actor = load_adam(dir + "/actor.adam", agent.actor);
  agent.opt_q1 = load_adam(dir + "/critic1.adam", agent.q1);
  agent.opt_q2 = load_adam(dir + "/critic2.adam", agent.q2);
  return agent;
}

}  // namespace samro
