#include "samro/mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace samro {

StateAggregates StateAggregates::zeros(int n_cells, int n_slices, int n_pairs) {
  StateAggregates agg;
  agg.n_cells = n_cells;
  agg.n_slices = n_slices;
  agg.n_pairs = n_pairs;
  agg.load.assign(static_cast<size_t>(n_cells) * n_slices, 0.0);
  agg.users.assign(static_cast<size_t>(n_cells) * n_slices, 0.0);
  agg.tsl_sum.assign(static_cast<size_t>(n_cells) * n_slices, 0.0);
  agg.lsl_sum.assign(static_cast<size_t>(n_cells) * n_slices, 0.0);
  agg.ho_attempts.assign(static_cast<size_t>(n_pairs) * n_slices, 0.0);
  agg.ho_successes.assign(static_cast<size_t>(n_pairs) * n_slices, 0.0);
  agg.ho_too_late.assign(static_cast<size_t>(n_pairs) * n_slices, 0.0);
  agg.ho_ping_pong.assign(static_cast<size_t>(n_pairs) * n_slices, 0.0);
  return agg;
}

Vec assemble_state(const StateAggregates& agg) {
  const size_t cell_slots = static_cast<size_t>(agg.n_cells) * agg.n_slices;
  const size_t pair_slots = static_cast<size_t>(agg.n_pairs) * agg.n_slices;
  if (agg.load.size() != cell_slots || agg.users.size() != cell_slots ||
      agg.tsl_sum.size() != cell_slots || agg.lsl_sum.size() != cell_slots ||
      agg.ho_attempts.size() != pair_slots || agg.ho_successes.size() != pair_slots ||
      agg.ho_too_late.size() != pair_slots || agg.ho_ping_pong.size() != pair_slots) {
    throw std::runtime_error("assemble_state: aggregate sizes inconsistent");
  }
  Vec state(agg.state_dim());
  int j = 0;
  for (size_t i = 0; i < cell_slots; ++i) {
    state(j++) = agg.load[i];
    state(j++) = agg.users[i];
    state(j++) = agg.tsl_sum[i];
    state(j++) = agg.lsl_sum[i];
  }
  for (size_t i = 0; i < pair_slots; ++i) {
    state(j++) = agg.ho_attempts[i];
    state(j++) = agg.ho_successes[i];
    state(j++) = agg.ho_too_late[i];
    state(j++) = agg.ho_ping_pong[i];
  }
  return state;
}

StateAggregates disassemble_state(const Vec& state, int n_cells, int n_slices,
                                  int n_pairs) {
  StateAggregates agg = StateAggregates::zeros(n_cells, n_slices, n_pairs);
  if (state.size() != agg.state_dim()) {
    throw std::runtime_error("disassemble_state: dimension mismatch");
  }
  int j = 0;
  for (size_t i = 0; i < agg.load.size(); ++i) {
    agg.load[i] = state(j++);
    agg.users[i] = state(j++);
    agg.tsl_sum[i] = state(j++);
    agg.lsl_sum[i] = state(j++);
  }
  for (size_t i = 0; i < agg.ho_attempts.size(); ++i) {
    agg.ho_attempts[i] = state(j++);
    agg.ho_successes[i] = state(j++);
    agg.ho_too_late[i] = state(j++);
    agg.ho_ping_pong[i] = state(j++);
  }
  return agg;
}

void fill_pair_counts(const HoCounterBook& book, StateAggregates& agg) {
  for (int p = 0; p < book.boundaries().pair_count(); ++p) {
    for (int s = 0; s < book.n_slices(); ++s) {
      const size_t i = static_cast<size_t>(p) * agg.n_slices + s;
      agg.ho_attempts[i] = static_cast<double>(book.pair_total(p, s, HoCounter::Attempt));
      agg.ho_successes[i] = static_cast<double>(book.pair_total(p, s, HoCounter::Success));
      agg.ho_too_late[i] = static_cast<double>(book.pair_total(p, s, HoCounter::TooLate));
      agg.ho_ping_pong[i] = static_cast<double>(book.pair_total(p, s, HoCounter::PingPong));
    }
  }
}

StateAggregates aggregate_slices(const StateAggregates& agg) {
  StateAggregates out = StateAggregates::zeros(agg.n_cells, 1, agg.n_pairs);
  for (int c = 0; c < agg.n_cells; ++c) {
    for (int s = 0; s < agg.n_slices; ++s) {
      const size_t i = static_cast<size_t>(c) * agg.n_slices + s;
      out.load[c] += agg.load[i];
      out.users[c] += agg.users[i];
      out.tsl_sum[c] += agg.tsl_sum[i];
      out.lsl_sum[c] += agg.lsl_sum[i];
    }
  }
  for (int p = 0; p < agg.n_pairs; ++p) {
    for (int s = 0; s < agg.n_slices; ++s) {
      const size_t i = static_cast<size_t>(p) * agg.n_slices + s;
      out.ho_attempts[p] += agg.ho_attempts[i];
      out.ho_successes[p] += agg.ho_successes[i];
      out.ho_too_late[p] += agg.ho_too_late[i];
      out.ho_ping_pong[p] += agg.ho_ping_pong[i];
    }
  }
  return out;
}

double hfr(const HoCounterBook& book, int slice) {
  const long attempts = book.slice_total(slice, HoCounter::Attempt);
  if (attempts == 0) return 0.0;
  const long failures = book.slice_total(slice, HoCounter::TooLate) +
                        book.slice_total(slice, HoCounter::TooEarly) +
                        book.slice_total(slice, HoCounter::WrongCell);
  return static_cast<double>(failures) / static_cast<double>(attempts);
}

double ppr(const HoCounterBook& book, int slice) {
  const long successes = book.slice_total(slice, HoCounter::Success);
  if (successes == 0) return 0.0;
  return static_cast<double>(book.slice_total(slice, HoCounter::PingPong)) /
         static_cast<double>(successes);
}

std::pair<double, double> user_service_levels(double rate_mbps, double latency_ms,
                                              double required_rate_mbps,
                                              double required_latency_ms) {
  if (latency_ms <= 0.0) throw std::domain_error("latency must be positive");
  if (required_rate_mbps <= 0.0 || required_latency_ms <= 0.0) {
    throw std::domain_error("service requirements must be positive");
  }
  const double tsl = std::min(rate_mbps / required_rate_mbps, 1.0);
  const double lsl = std::min(required_latency_ms / latency_ms, 1.0);
  return {tsl, lsl};
}

double slice_service_level(const std::vector<double>& per_cell_sums,
                           const std::vector<double>& per_cell_users) {
  double sum = 0.0, users = 0.0;
  for (double v : per_cell_sums) sum += v;
  for (double v : per_cell_users) users += v;
  if (users <= 0.0) return 0.0;
  return sum / users;
}

RewardConfig RewardConfig::defaults(int n_slices) {
  RewardConfig cfg;
  cfg.w_tsl.assign(n_slices, 1.0);
  cfg.w_lsl.assign(n_slices, 1.0);
  cfg.w_hfr.assign(n_slices, 1.0);
  cfg.w_ppr.assign(n_slices, 0.3);
  return cfg;
}

double RewardConfig::max_value() const {
  const int s_count = static_cast<int>(w_tsl.size());
  double total = 0.0;
  for (int s = 0; s < s_count; ++s) total += w_tsl[s] + w_lsl[s];
  return scale * total / (normalize_by_slices ? s_count : 1);
}

double RewardConfig::min_value() const {
  const int s_count = static_cast<int>(w_tsl.size());
  double total = 0.0;
  for (int s = 0; s < s_count; ++s) total -= w_hfr[s] + w_ppr[s];
  return scale * total / (normalize_by_slices ? s_count : 1);
}

double reward(const std::vector<SliceMetrics>& metrics, const RewardConfig& cfg) {
  const int s_count = static_cast<int>(metrics.size());
  if (static_cast<int>(cfg.w_tsl.size()) != s_count) {
    throw std::invalid_argument("reward: weight/metric slice count mismatch");
  }
  double total = 0.0;
  for (int s = 0; s < s_count; ++s) {
    total += cfg.w_tsl[s] * metrics[s].tsl + cfg.w_lsl[s] * metrics[s].lsl -
             cfg.w_hfr[s] * metrics[s].hfr - cfg.w_ppr[s] * metrics[s].ppr;
  }
  const double norm = cfg.normalize_by_slices ? static_cast<double>(s_count) : 1.0;
  return cfg.scale * total / norm;
}

Vec scale_state(const Vec& state, int n_cells, int n_slices, int n_pairs,
                const StateScalingConfig& cfg) {
  const int cell_block = 4 * n_cells * n_slices;
  const int dim = (4 * n_cells + 4 * n_pairs) * n_slices;
  if (state.size() != dim) throw std::invalid_argument("scale_state: dimension mismatch");
  Vec scaled = state;
  for (int i = 0; i < cell_block; i += 4) {
    // load stays raw (already in [0, 1]); counts and level sums share the cap
    scaled(i + 1) /= cfg.count_cap;
    scaled(i + 2) /= cfg.count_cap;
    scaled(i + 3) /= cfg.count_cap;
  }
  for (int i = cell_block; i < dim; ++i) scaled(i) /= cfg.count_cap;
  return scaled;
}

}  // namespace samro
