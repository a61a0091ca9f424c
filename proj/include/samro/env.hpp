#pragma once

#include <memory>

#include "samro/action_grid.hpp"
#include "samro/mdp.hpp"
#include "samro/world.hpp"

namespace samro {

/// The agent-facing MDP around a world. The slice-aware view exposes the full
/// per-slice state and one parameter pair per (boundary, slice); the
/// slice-agnostic view aggregates the state over slices and broadcasts one
/// parameter pair per boundary to every slice. Rewards are computed on the
/// view's metrics so both views train against the same objective shape.
class Env {
 public:
  Env(const ScenarioConfig& scenario, bool slice_aware);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return grid_.dim(); }
  const ActionGrid& grid() const { return grid_; }
  const RewardConfig& reward_config() const { return reward_cfg_; }
  const World& world() const { return *world_; }
  World& world() { return *world_; }
  bool slice_aware() const { return slice_aware_; }

  struct StepOutcome {
    Vec next_state;                         // view state, raw canonical units
    double reward = 0.0;                    // view reward
    std::vector<SliceMetrics> slice_metrics;  // true per-slice outcomes
    std::vector<SliceMetrics> view_metrics;   // what the reward was computed on
  };

  /// Applies a grid-valued view action for one agent step.
  StepOutcome step(const Vec& view_operating_action);

  const Vec& current_state() const { return last_state_; }
  long interactions() const { return interactions_; }

  /// Conditioning map for network inputs.
  Vec scale_state(const Vec& raw_state) const;

  /// View action -> full per-slice action on the world's grid.
  Vec expand_action(const Vec& view_action) const;

  StateScalingConfig scaling;

 private:
  std::unique_ptr<World> world_;
  bool slice_aware_ = true;
  ActionGrid grid_;
  RewardConfig reward_cfg_;
  int state_dim_ = 0;
  int view_slices_ = 1;
  Vec last_state_;
  long interactions_ = 0;
};

}  // namespace samro
