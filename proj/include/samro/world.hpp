#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "samro/ho.hpp"
#include "samro/mdp.hpp"
#include "samro/propagation.hpp"
#include "samro/scenario.hpp"

namespace samro {

struct CellGeometry {
  Vec2 site;
  double azimuth_deg = 0.0;
  int site_index = 0;
};

struct HoTraceEvent {
  enum class Kind { Trigger, Complete, Rlf, Reestablish };
  double t = 0.0;
  int user = -1;
  Kind kind = Kind::Trigger;
  int source = -1;
  int target = -1;
  int slice = 0;
};

/// Equal-share scheduler for one cell plus the load-sensitive latency model.
/// Users are the active attached ones; slices index the load split.
struct CellAllocation {
  std::vector<double> rate_mbps;
  std::vector<double> latency_ms;
  std::vector<double> slice_load;  // per slice, sums to the utilization
  double utilization = 0.0;
};
CellAllocation allocate_resources(const std::vector<double>& sinr_db,
                                  const std::vector<double>& demand_mbps,
                                  const std::vector<int>& slice_of, int n_slices,
                                  const ScenarioConfig& cfg);

struct UserState {
  Vec2 pos{0.0, 0.0};
  Vec2 waypoint{0.0, 0.0};
  double speed_mps = 0.0;
  int group = 0;
  int slice = 0;
  bool active = false;
  int serving = -1;  // -1 while re-establishing
  double reattach_timer_s = -1.0;
  int reattach_from = -1;
  int rlf_streak = 0;
  double pending_exec_s = -1.0;  // >= 0 while a handover spans ticks
  int pending_source = -1;
  int pending_target = -1;
  std::vector<int> hold_ticks;  // per target cell, consecutive criterion hits
  UserHoTracker tracker;
  Vec rsrp_dbm;  // this tick's measured values, one per cell
  double sinr_db = 0.0;
  double rate_mbps = 0.0;
  double latency_ms = 0.0;
};

struct AgentStepResult {
  StateAggregates aggregates;
  HoCounterBook counters;
  std::vector<SliceMetrics> metrics;
};

/// Deterministic multi-cell multi-slice radio environment, advanced in fixed
/// radio ticks and aggregated into agent steps. Single-threaded; independent
/// instances share nothing.
class World {
 public:
  explicit World(const ScenarioConfig& cfg);

  /// Decodes a grid-valued action (boundary-major layout) into per-boundary
  /// per-slice margins and trigger windows.
  void set_action(const Vec& operating_action);

  /// One radio tick under the currently set action.
  void tick();

  /// Resets counters, runs ticks_per_agent_step ticks, returns the
  /// aggregated measures and step metrics.
  AgentStepResult run_agent_step(const Vec& operating_action);

  const ScenarioConfig& config() const { return cfg_; }
  const BoundarySet& boundaries() const { return boundaries_; }
  const std::vector<CellGeometry>& cells() const { return cells_; }
  int n_cells_count() const;
  int n_users() const { return static_cast<int>(users_.size()); }
  /// All margins 0 dB and trigger times 512 ms in this world's layout.
  Vec grid_default_action() const;
  const UserState& user(int u) const { return users_.at(u); }
  double now_s() const { return static_cast<double>(clock_ticks_) * cfg_.radio_tick_s; }
  long agent_steps_run() const { return agent_steps_run_; }

  /// Scripted trajectories: drop a user at a position heading for a waypoint.
  void place_user(int u, const Vec2& pos, const Vec2& waypoint);

  double compute_sinr(int u) const;
  double activity_probability(double t_s) const;
  int active_attached_users(int slice) const;
  double cell_slice_load(int cell, int slice) const { return prev_slice_load_(cell, slice); }

  void set_event_sink(std::vector<HoTraceEvent>* sink) { event_sink_ = sink; }
  void write_snapshot_header(std::ostream& out) const;
  void write_snapshot(std::ostream& out) const;

 private:
  ScenarioConfig cfg_;
  std::vector<CellGeometry> cells_;
  BoundarySet boundaries_;
  ShadowingField shadowing_;
  std::vector<UserState> users_;
  Rng rng_;
  HoCounterBook book_;

  Mat margins_;        // boundary x slice
  Mat ttt_ticks_;      // boundary x slice, rounded trigger windows in ticks
  Vec prev_total_load_;
  Mat prev_slice_load_;

  long clock_ticks_ = 0;
  long agent_steps_run_ = 0;
  int rlf_window_ticks_ = 1;

  // Step accumulators (per cell x slice, averaged on aggregation).
  Mat acc_load_, acc_users_, acc_tsl_, acc_lsl_;
  long acc_ticks_ = 0;

  std::vector<HoTraceEvent>* event_sink_ = nullptr;

  void build_users();
  void attach_initial();
  Vec2 sample_point(const MobilityRegion& region);
  void move_user(int u);
  void refresh_activity();
  void measure(int u);
  void process_reattach(int u);
  void process_rlf(int u);
  void process_pending(int u);
  void process_criteria(int u);
  void complete_handover(int u, int from, int to);
  void allocate_all();
  void begin_step();
  void log_event(HoTraceEvent::Kind kind, int u, int source, int target);
};

}  // namespace samro
