#include "samro/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace samro {

double beta_schedule(long periods, const BetaSchedule& schedule) {
  return std::min(schedule.beta_max, schedule.beta0 + schedule.delta * periods);
}

std::vector<TransitionRecord> collect_offline(Env& env, int n_samples,
                                              const PipelineConfig& cfg, Rng& rng) {
  const ActionGrid& grid = env.grid();
  std::normal_distribution<double> margin_noise(0.0, cfg.collect_margin_std_db);
  std::normal_distribution<double> ttt_noise(0.0, cfg.collect_ttt_std_ms);
  std::vector<TransitionRecord> out;
  out.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    Vec proto(grid.dim());
    for (int j = 0; j < proto.size(); ++j) {
      proto(j) = grid.is_ttt_dim(j) ? 512.0 + ttt_noise(rng) : margin_noise(rng);
    }
    const Vec snapped = snap_nearest(proto, grid);
    TransitionRecord rec;
    rec.state = env.current_state();
    rec.action = snapped;  // stored in proto form, already grid-valued
    const Env::StepOutcome outcome = env.step(snapped);
    rec.next_state = outcome.next_state;
    rec.reward = outcome.reward;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<TransitionRecord> augment_dataset(const std::vector<TransitionRecord>& data,
                                              int k, const ActionGrid& grid, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("augment_dataset: empty dataset");
  if (k < 1) throw std::invalid_argument("augment_dataset: k must be >= 1");
  std::vector<TransitionRecord> out;
  out.reserve(data.size() * static_cast<size_t>(k));
  for (const auto& rec : data) {
    for (const Vec& action : augment_continuous(rec.action, k, grid, rng)) {
      TransitionRecord copy = rec;
      copy.action = action;
      out.push_back(std::move(copy));
    }
  }
  return out;
}

Mat energy_inputs(const std::vector<const TransitionRecord*>& batch, const Env& env,
                  const EnergyConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("energy_inputs: empty batch");
  const int sdim = static_cast<int>(batch[0]->state.size());
  const int adim = static_cast<int>(batch[0]->action.size());
  Mat x(sdim + adim, batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    x.col(i).head(sdim) = cfg.state_weight * env.scale_state(batch[i]->state);
    x.col(i).tail(adim) = normalize_action(batch[i]->action, env.grid());
  }
  return cfg.input_scale * x;
}

namespace {

struct BatchTensors {
  Mat states;
  Mat actions;
  Mat next_states;
  Vec rewards;  // regularized
};

BatchTensors build_batch(const std::vector<const TransitionRecord*>& batch, Env& env,
                         EnergyModel& energy, double alpha, EnergyNorm norm,
                         EnergyStandardizer* standardizer) {
  const int m = static_cast<int>(batch.size());
  const int sdim = env.state_dim();
  const int adim = env.action_dim();
  BatchTensors t;
  t.states.resize(sdim, m);
  t.actions.resize(adim, m);
  t.next_states.resize(sdim, m);
  t.rewards.resize(m);
  Mat x(sdim + adim, m);
  for (int i = 0; i < m; ++i) {
    t.states.col(i) = env.scale_state(batch[i]->state);
    t.actions.col(i) = normalize_action(batch[i]->action, env.grid());
    t.next_states.col(i) = env.scale_state(batch[i]->next_state);
    x.col(i).head(sdim) = t.states.col(i);
    x.col(i).tail(adim) = t.actions.col(i);
  }
  if (alpha > 0.0) {
    Mat xe = x;
    xe.topRows(sdim) *= energy.config().state_weight;
    const Vec e = energy.energies(energy.config().input_scale * xe);
    if (standardizer && norm != EnergyNorm::Raw) {
      for (int i = 0; i < m; ++i) standardizer->observe(e(i));
      for (int i = 0; i < m; ++i) {
        t.rewards(i) =
            regularize_reward(batch[i]->reward, standardizer->apply(e(i), norm), alpha);
      }
    } else {
      for (int i = 0; i < m; ++i) {
        t.rewards(i) = regularize_reward(batch[i]->reward, e(i), alpha);
      }
    }
  } else {
    for (int i = 0; i < m; ++i) t.rewards(i) = batch[i]->reward;
  }
  return t;
}

std::vector<const TransitionRecord*> uniform_batch(const std::vector<TransitionRecord>& data,
                                                   int m, Rng& rng) {
  std::uniform_int_distribution<size_t> pick(0, data.size() - 1);
  std::vector<const TransitionRecord*> batch;
  batch.reserve(m);
  for (int i = 0; i < m; ++i) batch.push_back(&data[pick(rng)]);
  return batch;
}

void pretrain_energy(EnergyModel& energy, const std::vector<TransitionRecord>& dataset,
                     Env& env, int batches, Rng& rng) {
  for (int b = 0; b < batches; ++b) {
    const auto batch = uniform_batch(dataset, energy.config().batch_size, rng);
    energy.train_batch(energy_inputs(batch, env, energy.config()), rng);
  }
}

}  // namespace

OfflineTrainStats train_offline(Td3Agent& agent, EnergyModel& energy,
                                const std::vector<TransitionRecord>& dataset, Env& env,
                                const PipelineConfig& cfg, Rng& rng,
                                EnergyStandardizer* standardizer) {
  if (dataset.empty()) throw std::invalid_argument("train_offline: empty dataset");
  OfflineTrainStats stats;
  if (cfg.alpha > 0.0) {
    pretrain_energy(energy, dataset, env, cfg.energy_pretrain_batches, rng);
    if (standardizer) {
      // One deterministic pass seeds the running statistics.
      std::vector<const TransitionRecord*> all;
      all.reserve(dataset.size());
      for (const auto& rec : dataset) all.push_back(&rec);
      const Vec e = energy.energies(energy_inputs(all, env, energy.config()));
      for (int i = 0; i < e.size(); ++i) standardizer->observe(e(i));
    }
  }

  const long batches_per_epoch =
      std::max<long>(1, static_cast<long>(dataset.size()) / agent.cfg.batch_size);
  const long total = batches_per_epoch * cfg.offline_epochs;
  const double lr_critic = agent.cfg.lr_critic;
  for (long b = 1; b <= total; ++b) {
    const double ramp = cfg.critic_warmup_batches > 0
                            ? std::min(1.0, static_cast<double>(b) / cfg.critic_warmup_batches)
                            : 1.0;
    agent.opt_q1.lr = lr_critic * ramp;
    agent.opt_q2.lr = lr_critic * ramp;
    const auto batch = uniform_batch(dataset, agent.cfg.batch_size, rng);
    const BatchTensors t =
        build_batch(batch, env, energy, cfg.alpha, cfg.energy_norm, standardizer);
    const CriticLosses losses =
        agent.critic_update(t.states, t.actions, t.rewards, t.next_states, rng);
    stats.critic_loss.push_back(0.5 * (losses.q1 + losses.q2));
    if (b >= cfg.actor_start_batch && b % agent.cfg.actor_period == 0) {
      const double actor_loss = agent.actor_update(t.states);
      agent.soft_update_targets();
      stats.actor_loss.push_back(actor_loss);
      stats.mean_q.push_back(-actor_loss);
    }
    ++stats.minibatches;
  }
  agent.opt_q1.lr = lr_critic;
  agent.opt_q2.lr = lr_critic;
  return stats;
}

std::function<double(const Vec&)> make_q_evaluator(const Td3Agent& agent, const Env& env,
                                                   const Vec& raw_state) {
  const Vec scaled = env.scale_state(raw_state);
  const ActionGrid& grid = env.grid();
  return [&agent, &grid, scaled](const Vec& operating_action) {
    return agent.q1_value(scaled, normalize_action(operating_action, grid));
  };
}

FinetuneLog finetune_online(Env& env, Td3Agent& agent, EnergyModel& energy,
                            ReplayBuffers& buffers, const PipelineConfig& cfg, Rng& rng,
                            EnergyStandardizer* standardizer) {
  if (buffers.offline.empty()) {
    throw std::runtime_error("finetune_online: offline buffer must be preloaded");
  }
  FinetuneLog log;
  long periods = 0;
  buffers.beta = beta_schedule(periods, cfg.beta);
  for (long t = 1; t <= cfg.online_steps; ++t) {
    const Vec raw_state = env.current_state();
    const Vec scaled = env.scale_state(raw_state);
    const Vec proto_norm = agent.select_action(scaled, agent.cfg.explore_noise, rng);
    const Vec proto = denormalize_action(proto_norm, env.grid());
    const Vec operating = project_action(
        proto, cfg.projection_k, env.grid(), make_q_evaluator(agent, env, raw_state), rng);
    const Env::StepOutcome outcome = env.step(operating);
    TransitionRecord rec;
    rec.state = raw_state;
    rec.action = proto;  // the noisy proto action, not the projected one
    rec.next_state = outcome.next_state;
    rec.reward = outcome.reward;
    buffers.online.push(std::move(rec));
    ++log.stored_transitions;
    log.reward.push_back(outcome.reward);
    log.beta.push_back(buffers.beta);

    const auto batch = mixed_sample(buffers, agent.cfg.batch_size, rng);
    const BatchTensors tensors =
        build_batch(batch, env, energy, cfg.alpha, cfg.energy_norm, standardizer);
    agent.critic_update(tensors.states, tensors.actions, tensors.rewards,
                        tensors.next_states, rng);
    if (t % agent.cfg.actor_period == 0) {
      const double actor_loss = agent.actor_update(tensors.states);
      agent.soft_update_targets();
      log.actor_loss.push_back(actor_loss);
      ++log.actor_updates;
    }
    if (cfg.energy_period > 0 && t % cfg.energy_period == 0) {
      if (cfg.alpha > 0.0) {
        // Refresh on the union of both buffers.
        std::vector<const TransitionRecord*> pool;
        pool.reserve(buffers.offline.size() + buffers.online.size());
        for (const auto& r : buffers.offline) pool.push_back(&r);
        for (size_t i = 0; i < buffers.online.size(); ++i) pool.push_back(&buffers.online[i]);
        std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
        for (int b = 0; b < cfg.energy_refresh_batches; ++b) {
          std::vector<const TransitionRecord*> ebatch;
          ebatch.reserve(energy.config().batch_size);
          for (int i = 0; i < energy.config().batch_size; ++i) ebatch.push_back(pool[pick(rng)]);
          energy.train_batch(energy_inputs(ebatch, env, energy.config()), rng);
        }
      }
      ++log.energy_refreshes;
      ++periods;
      buffers.beta = beta_schedule(periods, cfg.beta);
    }
  }
  return log;
}

}  // namespace samro
