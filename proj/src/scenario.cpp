#include "samro/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "samro/keyvalues.hpp"

namespace samro {

int ScenarioConfig::total_users() const {
  int n = 0;
  for (const auto& g : user_groups) n += g.size;
  return n;
}

void ScenarioConfig::validate() const {
  if (site_positions.empty()) throw std::invalid_argument("scenario: no sites");
  if (sectors_per_site <= 0) throw std::invalid_argument("scenario: sectors_per_site must be positive");
  if (n_slices <= 0) throw std::invalid_argument("scenario: n_slices must be positive");
  if (static_cast<int>(slices.size()) != n_slices) {
    throw std::invalid_argument("scenario: slice spec count does not match n_slices");
  }
  for (const auto& s : slices) {
    if (s.throughput_req_mbps <= 0.0 || s.latency_req_ms <= 0.0) {
      throw std::invalid_argument("scenario: slice requirements must be strictly positive");
    }
  }
  for (const auto& g : user_groups) {
    if (g.size < 0) throw std::invalid_argument("scenario: group size must be >= 0");
    if (g.speed_kmh < 0.0) throw std::invalid_argument("scenario: group speed must be >= 0");
    if (g.slice < 0 || g.slice >= n_slices) {
      throw std::invalid_argument("scenario: group references an invalid slice");
    }
    if (g.expected_rate_mbps <= 0.0) {
      throw std::invalid_argument("scenario: group expected rate must be positive");
    }
  }
  if (radio_tick_s <= 0.0) throw std::invalid_argument("scenario: radio_tick_s must be positive");
  if (ticks_per_agent_step <= 0) {
    throw std::invalid_argument("scenario: ticks_per_agent_step must be positive");
  }
  if (bandwidth_mhz <= 0.0 || pl_ref_dist_m <= 0.0 || pl_exponent <= 0.0) {
    throw std::invalid_argument("scenario: radio parameters must be positive");
  }
  if (playground_x_min >= playground_x_max || playground_y_min >= playground_y_max) {
    throw std::invalid_argument("scenario: empty playground");
  }
  if (activity_min < 0.0 || activity_max > 1.0 || activity_min > activity_max) {
    throw std::invalid_argument("scenario: activity bounds must satisfy 0 <= min <= max <= 1");
  }
}

ScenarioConfig ScenarioConfig::standard() {
  ScenarioConfig cfg;
  cfg.site_positions = {Vec2(0.0, 0.0), Vec2(700.0, 0.0), Vec2(1400.0, 0.0)};
  cfg.slices = {SliceSpec{5.0, 1.0}, SliceSpec{3.0, 1.0}};
  UserGroupSpec g1{25, 0, 5.0, 6.0, {}};
  UserGroupSpec g2{25, 1, 3.0, 3.0, {}};
  UserGroupSpec h1{8, 0, 5.0, 3.0,
                   {MobilityRegion::Kind::Circle, Vec2(350.0, 150.0), 120.0}};
  UserGroupSpec h2{8, 0, 5.0, 3.0,
                   {MobilityRegion::Kind::Circle, Vec2(1050.0, -150.0), 120.0}};
  cfg.user_groups = {g1, g2, h1, h2};
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::desk() {
  ScenarioConfig cfg = standard();
  cfg.ticks_per_agent_step = 600;  // 60 s steps
  cfg.traffic_period_s = 7200.0;
  // Users move four times faster and packets are a third the size: one
  // minute then carries handover and queueing statistics comparable to a
  // full-scale fifteen-minute step.
  for (auto& g : cfg.user_groups) g.speed_kmh *= 4.0;
  cfg.packet_kbit = 4.0;
  cfg.validate();
  return cfg;
}

namespace {

MobilityRegion parse_region(const std::vector<std::string>& tokens, size_t from) {
  MobilityRegion region;
  if (from >= tokens.size() || tokens[from] == "playground") return region;
  if (tokens[from] == "circle" && tokens.size() >= from + 4) {
    region.kind = MobilityRegion::Kind::Circle;
    region.center = Vec2(std::stod(tokens[from + 1]), std::stod(tokens[from + 2]));
    region.radius = std::stod(tokens[from + 3]);
    return region;
  }
  throw std::runtime_error("group region must be `playground` or `circle <x> <y> <r>`");
}

}  // namespace

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  KeyValues kv = KeyValues::from_file(path);
  ScenarioConfig cfg = apply_scenario_keys(kv, ScenarioConfig::standard());
  kv.check_all_consumed();
  return cfg;
}

ScenarioConfig apply_scenario_keys(KeyValues& kv, ScenarioConfig cfg) {
  const auto sites = kv.get_lists("site");
  if (!sites.empty()) {
    cfg.site_positions.clear();
    for (const auto& tokens : sites) {
      if (tokens.size() != 2) throw std::runtime_error("site needs `x y`");
      cfg.site_positions.emplace_back(std::stod(tokens[0]), std::stod(tokens[1]));
    }
  }
  const auto slices = kv.get_lists("slice");
  if (!slices.empty()) {
    cfg.slices.clear();
    for (const auto& tokens : slices) {
      if (tokens.size() != 2) throw std::runtime_error("slice needs `throughput_mbps latency_ms`");
      cfg.slices.push_back(SliceSpec{std::stod(tokens[0]), std::stod(tokens[1])});
    }
    cfg.n_slices = static_cast<int>(cfg.slices.size());
  }
  const auto groups = kv.get_lists("group");
  if (!groups.empty()) {
    cfg.user_groups.clear();
    for (const auto& tokens : groups) {
      if (tokens.size() < 4) {
        throw std::runtime_error("group needs `size slice rate_mbps speed_kmh [region]`");
      }
      UserGroupSpec g;
      g.size = std::stoi(tokens[0]);
      g.slice = std::stoi(tokens[1]);
      g.expected_rate_mbps = std::stod(tokens[2]);
      g.speed_kmh = std::stod(tokens[3]);
      g.region = parse_region(tokens, 4);
      cfg.user_groups.push_back(g);
    }
  }
  const auto playground = kv.get_lists("playground");
  if (!playground.empty()) {
    if (playground.size() != 1 || playground[0].size() != 4) {
      throw std::runtime_error("playground needs `x_min x_max y_min y_max`");
    }
    cfg.playground_x_min = std::stod(playground[0][0]);
    cfg.playground_x_max = std::stod(playground[0][1]);
    cfg.playground_y_min = std::stod(playground[0][2]);
    cfg.playground_y_max = std::stod(playground[0][3]);
  }

  cfg.sectors_per_site = static_cast<int>(kv.get_long("sectors_per_site", cfg.sectors_per_site));
  cfg.n_slices = static_cast<int>(kv.get_long("n_slices", cfg.n_slices));
  cfg.carrier_freq_ghz = kv.get_double("carrier_freq_ghz", cfg.carrier_freq_ghz);
  cfg.bandwidth_mhz = kv.get_double("bandwidth_mhz", cfg.bandwidth_mhz);
  cfg.tx_power_dbm = kv.get_double("tx_power_dbm", cfg.tx_power_dbm);
  cfg.noise_floor_dbm = kv.get_double("noise_floor_dbm", cfg.noise_floor_dbm);
  cfg.pl_ref_db = kv.get_double("pl_ref_db", cfg.pl_ref_db);
  cfg.pl_ref_dist_m = kv.get_double("pl_ref_dist_m", cfg.pl_ref_dist_m);
  cfg.pl_exponent = kv.get_double("pl_exponent", cfg.pl_exponent);
  cfg.shadowing_sigma_db = kv.get_double("shadowing_sigma_db", cfg.shadowing_sigma_db);
  cfg.shadowing_decorr_m = kv.get_double("shadowing_decorr_m", cfg.shadowing_decorr_m);
  cfg.measurement_noise_db = kv.get_double("measurement_noise_db", cfg.measurement_noise_db);
  cfg.sector_beamwidth_deg = kv.get_double("sector_beamwidth_deg", cfg.sector_beamwidth_deg);
  cfg.sector_max_attenuation_db =
      kv.get_double("sector_max_attenuation_db", cfg.sector_max_attenuation_db);
  cfg.first_sector_azimuth_deg =
      kv.get_double("first_sector_azimuth_deg", cfg.first_sector_azimuth_deg);
  cfg.neighbor_site_range_m = kv.get_double("neighbor_site_range_m", cfg.neighbor_site_range_m);
  cfg.facing_half_angle_deg = kv.get_double("facing_half_angle_deg", cfg.facing_half_angle_deg);
  cfg.max_spectral_eff_bps_hz =
      kv.get_double("max_spectral_eff_bps_hz", cfg.max_spectral_eff_bps_hz);
  cfg.latency_base_ms = kv.get_double("latency_base_ms", cfg.latency_base_ms);
  cfg.latency_load_eps = kv.get_double("latency_load_eps", cfg.latency_load_eps);
  cfg.packet_kbit = kv.get_double("packet_kbit", cfg.packet_kbit);
  cfg.q_out_db = kv.get_double("q_out_db", cfg.q_out_db);
  cfg.t_rlf_s = kv.get_double("t_rlf_s", cfg.t_rlf_s);
  cfg.t_crit_s = kv.get_double("t_crit_s", cfg.t_crit_s);
  cfg.t_pp_s = kv.get_double("t_pp_s", cfg.t_pp_s);
  cfg.ho_exec_delay_s = kv.get_double("ho_exec_delay_s", cfg.ho_exec_delay_s);
  cfg.reestablish_delay_s = kv.get_double("reestablish_delay_s", cfg.reestablish_delay_s);
  cfg.activity_min = kv.get_double("activity_min", cfg.activity_min);
  cfg.activity_max = kv.get_double("activity_max", cfg.activity_max);
  cfg.traffic_period_s = kv.get_double("traffic_period_s", cfg.traffic_period_s);
  cfg.activity_update_s = kv.get_double("activity_update_s", cfg.activity_update_s);
  cfg.radio_tick_s = kv.get_double("radio_tick_s", cfg.radio_tick_s);
  cfg.ticks_per_agent_step =
      static_cast<int>(kv.get_long("ticks_per_agent_step", cfg.ticks_per_agent_step));
  cfg.rng_seed = static_cast<std::uint64_t>(kv.get_long("rng_seed", static_cast<long>(cfg.rng_seed)));

  const long n_cells = kv.get_long("n_cells", cfg.n_cells());
  if (n_cells != cfg.n_cells()) {
    throw std::runtime_error("n_cells does not equal site count times sectors_per_site");
  }
  cfg.validate();
  return cfg;
}

}  // namespace samro
