#pragma once

#include <vector>

#include "samro/ho.hpp"
#include "samro/types.hpp"

namespace samro {

/// Everything one agent step reports, already aggregated: per-cell per-slice
/// time averages and per-pair per-slice handover counts summed over both
/// directions of each boundary.
struct StateAggregates {
  int n_cells = 0;
  int n_slices = 0;
  int n_pairs = 0;
  // Indexed [cell * n_slices + slice].
  std::vector<double> load;
  std::vector<double> users;
  std::vector<double> tsl_sum;
  std::vector<double> lsl_sum;
  // Indexed [pair * n_slices + slice].
  std::vector<double> ho_attempts;
  std::vector<double> ho_successes;
  std::vector<double> ho_too_late;
  std::vector<double> ho_ping_pong;

  static StateAggregates zeros(int n_cells, int n_slices, int n_pairs);
  int state_dim() const { return (4 * n_cells + 2 * 2 * n_pairs) * n_slices; }
};

/// Canonical flat layout: the per-cell block first (cells ascending, slices
/// ascending, features [load, users, tsl_sum, lsl_sum]), then the per-pair
/// block (pairs in lexicographic order, slices ascending, features
/// [attempts, successes, too_late, ping_pong]).
Vec assemble_state(const StateAggregates& agg);
StateAggregates disassemble_state(const Vec& state, int n_cells, int n_slices, int n_pairs);

/// Copies the direction-summed handover counts out of a counter book.
void fill_pair_counts(const HoCounterBook& book, StateAggregates& agg);

/// Collapses the slice dimension by summation (loads, user counts, service
/// level sums and handover counts are all additive across slices).
StateAggregates aggregate_slices(const StateAggregates& agg);

struct SliceMetrics {
  double hfr = 0.0;  // handover failure ratio
  double ppr = 0.0;  // ping-pong ratio
  double tsl = 0.0;  // throughput service level
  double lsl = 0.0;  // latency service level
};

/// Failure ratio (too late + too early + wrong cell) / attempts over all
/// boundaries of one slice; 0 when there were no attempts.
double hfr(const HoCounterBook& book, int slice);
/// Ping-pong / successes over all boundaries of one slice; 0 without successes.
double ppr(const HoCounterBook& book, int slice);

/// Capped satisfaction ratios for one user: achieved vs required throughput
/// and required vs achieved latency.
std::pair<double, double> user_service_levels(double rate_mbps, double latency_ms,
                                              double required_rate_mbps,
                                              double required_latency_ms);

/// Slice-wide average service level from per-cell sums and user counts;
/// 0 when the slice has no users.
double slice_service_level(const std::vector<double>& per_cell_sums,
                           const std::vector<double>& per_cell_users);

struct RewardConfig {
  std::vector<double> w_tsl;  // one weight per slice
  std::vector<double> w_lsl;
  std::vector<double> w_hfr;
  std::vector<double> w_ppr;
  double scale = 5.0;
  bool normalize_by_slices = true;

  static RewardConfig defaults(int n_slices);  // weights (1, 1, 1, 0.3), scale 5
  double min_value() const;
  double max_value() const;
};

double reward(const std::vector<SliceMetrics>& metrics, const RewardConfig& cfg);

struct StateScalingConfig {
  double count_cap = 50.0;  // divides user counts, HO counts and service sums
};

/// Conditioning map for network inputs; the canonical vector stays raw.
Vec scale_state(const Vec& state, int n_cells, int n_slices, int n_pairs,
                const StateScalingConfig& cfg);

}  // namespace samro
