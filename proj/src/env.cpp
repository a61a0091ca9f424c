#include "samro/env.hpp"

namespace samro {

Env::Env(const ScenarioConfig& scenario, bool slice_aware)
    : world_(std::make_unique<World>(scenario)), slice_aware_(slice_aware) {
  const int n_slices = scenario.n_slices;
  view_slices_ = slice_aware_ ? n_slices : 1;
  grid_ = ActionGrid::make(world_->boundaries().size(), view_slices_);
  reward_cfg_ = RewardConfig::defaults(view_slices_);
  state_dim_ =
      (4 * world_->n_cells_count() + 4 * world_->boundaries().pair_count()) * view_slices_;
  // One warm-up step under the default parameters produces the first
  // observation; it does not count as an agent interaction.
  const AgentStepResult warm = world_->run_agent_step(world_->grid_default_action());
  const StateAggregates agg =
      slice_aware_ ? warm.aggregates : aggregate_slices(warm.aggregates);
  last_state_ = assemble_state(agg);
}

Vec Env::expand_action(const Vec& view_action) const {
  if (view_action.size() != grid_.dim()) {
    throw std::invalid_argument("env action dimension mismatch");
  }
  if (slice_aware_) return view_action;
  const int n_slices = world_->config().n_slices;
  const int b_count = world_->boundaries().size();
  Vec full(2 * b_count * n_slices);
  for (int b = 0; b < b_count; ++b) {
    for (int s = 0; s < n_slices; ++s) {
      full(2 * (b * n_slices + s)) = view_action(2 * b);
      full(2 * (b * n_slices + s) + 1) = view_action(2 * b + 1);
    }
  }
  return full;
}

Env::StepOutcome Env::step(const Vec& view_operating_action) {
  const AgentStepResult result = world_->run_agent_step(expand_action(view_operating_action));
  ++interactions_;

  StepOutcome outcome;
  outcome.slice_metrics = result.metrics;
  if (slice_aware_) {
    outcome.next_state = assemble_state(result.aggregates);
    outcome.view_metrics = result.metrics;
  } else {
    const StateAggregates agg = aggregate_slices(result.aggregates);
    outcome.next_state = assemble_state(agg);
    // Slice-agnostic metrics: ratios of slice-summed counts and level sums.
    SliceMetrics m;
    long attempts = 0, successes = 0, failures = 0, pp = 0;
    for (int s = 0; s < result.counters.n_slices(); ++s) {
      attempts += result.counters.slice_total(s, HoCounter::Attempt);
      successes += result.counters.slice_total(s, HoCounter::Success);
      failures += result.counters.slice_total(s, HoCounter::TooLate) +
                  result.counters.slice_total(s, HoCounter::TooEarly) +
                  result.counters.slice_total(s, HoCounter::WrongCell);
      pp += result.counters.slice_total(s, HoCounter::PingPong);
    }
    m.hfr = attempts > 0 ? static_cast<double>(failures) / attempts : 0.0;
    m.ppr = successes > 0 ? static_cast<double>(pp) / successes : 0.0;
    double tsl_sum = 0.0, lsl_sum = 0.0, users = 0.0;
    for (size_t i = 0; i < agg.tsl_sum.size(); ++i) {
      tsl_sum += agg.tsl_sum[i];
      lsl_sum += agg.lsl_sum[i];
      users += agg.users[i];
    }
    m.tsl = users > 0.0 ? tsl_sum / users : 0.0;
    m.lsl = users > 0.0 ? lsl_sum / users : 0.0;
    outcome.view_metrics = {m};
  }
  outcome.reward = reward(outcome.view_metrics, reward_cfg_);
  last_state_ = outcome.next_state;
  return outcome;
}

Vec Env::scale_state(const Vec& raw_state) const {
  return samro::scale_state(raw_state, world_->n_cells_count(), view_slices_,
                            world_->boundaries().pair_count(), scaling);
}

}  // namespace samro
