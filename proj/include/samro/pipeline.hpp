#pragma once

#include <functional>
#include <vector>

#include "samro/energy.hpp"
#include "samro/env.hpp"
#include "samro/replay.hpp"
#include "samro/td3.hpp"

namespace samro {

struct BetaSchedule {
  double beta0 = 0.2;
  double delta = 0.05;
  double beta_max = 0.9;
};

/// beta after `periods` elapsed energy-refresh periods.
double beta_schedule(long periods, const BetaSchedule& schedule);

struct PipelineConfig {
  // Biased collection around the default operating point.
  int offline_samples = 20000;
  double collect_margin_std_db = 3.0;
  double collect_ttt_std_ms = 300.0;

  int augment_k = 8;
  int projection_k = 8;

  // Offline phase. The critic learning rate ramps up over the first batches
  // and the first actor update waits for the critics to settle; both damp
  // the early value transient that otherwise dominates the actor loss.
  int offline_epochs = 20;
  int energy_pretrain_batches = 3000;
  int critic_warmup_batches = 150;
  int actor_start_batch = 150;
  double alpha = 0.1;
  EnergyNorm energy_norm = EnergyNorm::Center;

  // Online phase.
  int online_steps = 1344;
  int test_steps = 192;
  size_t online_capacity = 20000;
  int energy_period = 100;          // H^(E)
  int energy_refresh_batches = 200;
  BetaSchedule beta;
};

/// Runs one biased agent step per sample: margins drawn around 0 dB, trigger
/// times around 512 ms, snapped to the grid before execution; the snapped
/// action is stored.
std::vector<TransitionRecord> collect_offline(Env& env, int n_samples,
                                              const PipelineConfig& cfg, Rng& rng);

/// k continuous-action copies of every record.
std::vector<TransitionRecord> augment_dataset(const std::vector<TransitionRecord>& data,
                                              int k, const ActionGrid& grid, Rng& rng);

/// Normalized (state, action) input for the energy net, compressed by its
/// configured input scale.
Mat energy_inputs(const std::vector<const TransitionRecord*>& batch, const Env& env,
                  const EnergyConfig& cfg);

struct OfflineTrainStats {
  std::vector<double> critic_loss;  // per minibatch
  std::vector<double> actor_loss;   // per actor update
  std::vector<double> mean_q;       // -actor_loss, per actor update
  long minibatches = 0;
};

/// Pretrains the energy net on the dataset, then runs TD3 over the fixed
/// dataset with the reward regularized by the (standardized) energy. No
/// environment interaction happens here.
OfflineTrainStats train_offline(Td3Agent& agent, EnergyModel& energy,
                                const std::vector<TransitionRecord>& dataset, Env& env,
                                const PipelineConfig& cfg, Rng& rng,
                                EnergyStandardizer* standardizer);

struct FinetuneLog {
  std::vector<double> reward;       // per environment step
  std::vector<double> beta;         // per environment step (value used that step)
  std::vector<double> actor_loss;   // per actor update
  long actor_updates = 0;
  long energy_refreshes = 0;
  long stored_transitions = 0;
};

/// The online fine-tuning loop: act with exploration noise, project onto the
/// grid through the first critic, store the noisy proto action, train from
/// the mixed replay, refresh the energy model and advance beta periodically.
FinetuneLog finetune_online(Env& env, Td3Agent& agent, EnergyModel& energy,
                            ReplayBuffers& buffers, const PipelineConfig& cfg, Rng& rng,
                            EnergyStandardizer* standardizer);

/// Builds the critic-side q evaluator used for action projection: scales the
/// state once and normalizes each candidate.
std::function<double(const Vec&)> make_q_evaluator(const Td3Agent& agent, const Env& env,
                                                   const Vec& raw_state);

}  // namespace samro
