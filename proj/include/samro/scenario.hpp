#pragma once

#include <string>
#include <vector>

#include "samro/types.hpp"

namespace samro {

struct SliceSpec {
  double throughput_req_mbps = 5.0;  // eta*
  double latency_req_ms = 1.0;       // d*
};

struct MobilityRegion {
  enum class Kind { Playground, Circle };
  Kind kind = Kind::Playground;
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
};

struct UserGroupSpec {
  int size = 0;
  int slice = 0;
  double expected_rate_mbps = 0.0;
  double speed_kmh = 0.0;
  MobilityRegion region;
};

/// Full description of one radio environment. All values carry physical
/// units in their names; defaults build the nine-cell two-slice layout.
struct ScenarioConfig {
  // Layout: three-sector sites; cell index = site * sectors_per_site + sector.
  std::vector<Vec2> site_positions;
  int sectors_per_site = 3;
  int n_slices = 2;
  double playground_x_min = -400.0, playground_x_max = 1800.0;
  double playground_y_min = -500.0, playground_y_max = 500.0;

  // Radio.
  double carrier_freq_ghz = 2.4;
  double bandwidth_mhz = 10.0;
  double tx_power_dbm = 43.0;
  double noise_floor_dbm = -104.0;

  // Propagation: log-distance with spatially smoothed lognormal shadowing.
  double pl_ref_db = 40.0;
  double pl_ref_dist_m = 10.0;
  double pl_exponent = 3.5;
  double shadowing_sigma_db = 6.0;
  double shadowing_decorr_m = 25.0;
  double measurement_noise_db = 2.0;  // per-tick RSRP measurement error

  // Sector antenna.
  double sector_beamwidth_deg = 65.0;
  double sector_max_attenuation_db = 25.0;
  double first_sector_azimuth_deg = 90.0;

  // Neighbor construction: same-site sectors are always neighbors; across
  // sites two cells are neighbors when the sites are within range and both
  // boresights face the other site within the half angle.
  double neighbor_site_range_m = 1000.0;
  double facing_half_angle_deg = 100.0;

  // Scheduler and latency model.
  double max_spectral_eff_bps_hz = 6.0;
  double latency_base_ms = 0.2;  // queueing delay scale
  double latency_load_eps = 0.01;
  double packet_kbit = 12.0;

  // Handover and radio link failure machinery.
  double q_out_db = -8.0;
  double t_rlf_s = 1.0;
  double t_crit_s = 1.0;
  double t_pp_s = 2.0;
  double ho_exec_delay_s = 0.05;
  double reestablish_delay_s = 0.2;

  // Traffic activity: sinusoidal daily on-probability.
  double activity_min = 0.3;
  double activity_max = 1.0;
  double traffic_period_s = 86400.0;
  double activity_update_s = 10.0;

  // Time discretization.
  double radio_tick_s = 0.1;
  int ticks_per_agent_step = 9000;
  std::uint64_t rng_seed = 1;

  std::vector<SliceSpec> slices;
  std::vector<UserGroupSpec> user_groups;

  int n_cells() const {
    return static_cast<int>(site_positions.size()) * sectors_per_site;
  }
  int total_users() const;

  void validate() const;

  /// Nine cells, two slices, the four standard user groups, 900 s steps.
  static ScenarioConfig standard();
  /// Same layout with 60 s agent steps and a two-hour traffic period.
  static ScenarioConfig desk();

  static ScenarioConfig from_file(const std::string& path);
};

class KeyValues;
/// Overrides cfg with any scenario keys present in kv (shared with the
/// experiment-level configuration parser).
ScenarioConfig apply_scenario_keys(KeyValues& kv, ScenarioConfig cfg);

}  // namespace samro
