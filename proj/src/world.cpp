#include "samro/world.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace samro {

CellAllocation allocate_resources(const std::vector<double>& sinr_db,
                                  const std::vector<double>& demand_mbps,
                                  const std::vector<int>& slice_of, int n_slices,
                                  const ScenarioConfig& cfg) {
  const int k = static_cast<int>(sinr_db.size());
  if (static_cast<int>(demand_mbps.size()) != k ||
      static_cast<int>(slice_of.size()) != k) {
    throw std::invalid_argument("allocate_resources: input sizes differ");
  }
  CellAllocation out;
  out.slice_load.assign(n_slices, 0.0);
  if (k == 0) return out;
  out.rate_mbps.resize(k);
  out.latency_ms.resize(k);

  std::vector<double> util(k);
  for (int i = 0; i < k; ++i) {
    const double se =
        std::min(std::log2(1.0 + db_to_linear(sinr_db[i])), cfg.max_spectral_eff_bps_hz);
    const double capacity_share = cfg.bandwidth_mhz / k * se;  // Mbit/s
    out.rate_mbps[i] = std::min(demand_mbps[i], capacity_share);
    util[i] = std::min(1.0, demand_mbps[i] / capacity_share);
    out.slice_load[slice_of[i]] += util[i] / k;
  }
  for (double l : out.slice_load) out.utilization += l;
  const double queue_ms = cfg.latency_base_ms * out.utilization /
                          (1.0 - out.utilization + cfg.latency_load_eps);
  for (int i = 0; i < k; ++i) {
    out.latency_ms[i] = cfg.packet_kbit / out.rate_mbps[i] + queue_ms;
  }
  return out;
}

namespace {

std::vector<std::vector<int>> build_neighbor_lists(const std::vector<CellGeometry>& cells,
                                                   const ScenarioConfig& cfg) {
  const int n = static_cast<int>(cells.size());
  std::vector<std::vector<int>> lists(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      bool neighbor = false;
      if (cells[a].site_index == cells[b].site_index) {
        neighbor = true;  // co-sited sectors
      } else {
        const double site_dist = (cells[a].site - cells[b].site).norm();
        if (site_dist <= cfg.neighbor_site_range_m) {
          const double a_to_b = bearing_deg(cells[a].site, cells[b].site);
          const double b_to_a = bearing_deg(cells[b].site, cells[a].site);
          neighbor = angle_distance_deg(cells[a].azimuth_deg, a_to_b) <=
                         cfg.facing_half_angle_deg &&
                     angle_distance_deg(cells[b].azimuth_deg, b_to_a) <=
                         cfg.facing_half_angle_deg;
        }
      }
      if (neighbor) {
        lists[a].push_back(b);
        lists[b].push_back(a);
      }
    }
  }
  return lists;
}

}  // namespace

World::World(const ScenarioConfig& cfg) : cfg_(cfg), rng_(cfg.rng_seed) {
  cfg_.validate();
  const int n_sites = static_cast<int>(cfg_.site_positions.size());
  for (int s = 0; s < n_sites; ++s) {
    for (int k = 0; k < cfg_.sectors_per_site; ++k) {
      CellGeometry cell;
      cell.site = cfg_.site_positions[s];
      cell.azimuth_deg = cfg_.first_sector_azimuth_deg +
                         k * 360.0 / static_cast<double>(cfg_.sectors_per_site);
      cell.site_index = s;
      cells_.push_back(cell);
    }
  }
  boundaries_ = BoundarySet::from_neighbor_lists(build_neighbor_lists(cells_, cfg_));
  book_ = HoCounterBook(boundaries_, cfg_.n_slices);
  rlf_window_ticks_ = window_samples(cfg_.t_rlf_s * 1000.0, cfg_.radio_tick_s * 1000.0);

  margins_ = Mat::Zero(boundaries_.size(), cfg_.n_slices);
  ttt_ticks_ = Mat::Ones(boundaries_.size(), cfg_.n_slices);
  prev_total_load_ = Vec::Zero(n_cells_count());
  prev_slice_load_ = Mat::Zero(n_cells_count(), cfg_.n_slices);
  acc_load_ = Mat::Zero(n_cells_count(), cfg_.n_slices);
  acc_users_ = Mat::Zero(n_cells_count(), cfg_.n_slices);
  acc_tsl_ = Mat::Zero(n_cells_count(), cfg_.n_slices);
  acc_lsl_ = Mat::Zero(n_cells_count(), cfg_.n_slices);

  build_users();
  shadowing_ = ShadowingField(n_users(), n_cells_count(), cfg_, rng_);
  attach_initial();
  set_action(grid_default_action());
}

int World::n_cells_count() const { return static_cast<int>(cells_.size()); }

Vec World::grid_default_action() const {
  Vec a(2 * boundaries_.size() * cfg_.n_slices);
  for (int j = 0; j < a.size(); ++j) a(j) = (j % 2 == 1) ? 512.0 : 0.0;
  return a;
}

double World::activity_probability(double t_s) const {
  const double phase = std::sin(2.0 * M_PI * t_s / cfg_.traffic_period_s);
  return cfg_.activity_min +
         (cfg_.activity_max - cfg_.activity_min) * 0.5 * (1.0 + phase);
}

Vec2 World::sample_point(const MobilityRegion& region) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (region.kind == MobilityRegion::Kind::Circle) {
    const double r = region.radius * std::sqrt(unif(rng_));
    const double theta = 2.0 * M_PI * unif(rng_);
    return region.center + r * Vec2(std::cos(theta), std::sin(theta));
  }
  const double x = cfg_.playground_x_min +
                   unif(rng_) * (cfg_.playground_x_max - cfg_.playground_x_min);
  const double y = cfg_.playground_y_min +
                   unif(rng_) * (cfg_.playground_y_max - cfg_.playground_y_min);
  return Vec2(x, y);
}

void World::build_users() {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double p0 = activity_probability(0.0);
  for (size_t g = 0; g < cfg_.user_groups.size(); ++g) {
    const UserGroupSpec& group = cfg_.user_groups[g];
    for (int i = 0; i < group.size; ++i) {
      UserState u;
      u.group = static_cast<int>(g);
      u.slice = group.slice;
      u.speed_mps = group.speed_kmh / 3.6;
      u.pos = sample_point(group.region);
      u.waypoint = sample_point(group.region);
      u.active = unif(rng_) < p0;
      u.hold_ticks.assign(n_cells_count(), 0);
      u.rsrp_dbm = Vec::Zero(n_cells_count());
      u.tracker = UserHoTracker(u.slice, HoClassifierConfig{cfg_.t_crit_s, cfg_.t_pp_s});
      users_.push_back(std::move(u));
    }
  }
}

void World::attach_initial() {
  for (int i = 0; i < n_users(); ++i) {
    UserState& u = users_[i];
    int best = 0;
    double best_rsrp = -1e300;
    for (int c = 0; c < n_cells_count(); ++c) {
      const double r = mean_rsrp_dbm(u.pos, cells_[c].site, cells_[c].azimuth_deg, cfg_) -
                       shadowing_.value(i, c);
      u.rsrp_dbm(c) = r;
      if (r > best_rsrp) {
        best_rsrp = r;
        best = c;
      }
    }
    u.serving = best;
  }
}

void World::set_action(const Vec& operating_action) {
  const int expected = 2 * boundaries_.size() * cfg_.n_slices;
  if (operating_action.size() != expected) {
    throw std::invalid_argument("action dimension mismatch: expected " +
                                std::to_string(expected));
  }
  const double tick_ms = cfg_.radio_tick_s * 1000.0;
  for (int b = 0; b < boundaries_.size(); ++b) {
    for (int s = 0; s < cfg_.n_slices; ++s) {
      const int j = 2 * (b * cfg_.n_slices + s);
      margins_(b, s) = operating_action(j);
      ttt_ticks_(b, s) = window_samples(operating_action(j + 1), tick_ms);
    }
  }
}

void World::place_user(int u, const Vec2& pos, const Vec2& waypoint) {
  users_.at(u).pos = pos;
  users_.at(u).waypoint = waypoint;
  int best = 0;
  double best_rsrp = -1e300;
  for (int c = 0; c < n_cells_count(); ++c) {
    const double r = mean_rsrp_dbm(pos, cells_[c].site, cells_[c].azimuth_deg, cfg_) -
                     shadowing_.value(u, c);
    users_[u].rsrp_dbm(c) = r;
    if (r > best_rsrp) {
      best_rsrp = r;
      best = c;
    }
  }
  users_[u].serving = best;
  std::fill(users_[u].hold_ticks.begin(), users_[u].hold_ticks.end(), 0);
}

void World::log_event(HoTraceEvent::Kind kind, int u, int source, int target) {
  if (!event_sink_) return;
  event_sink_->push_back(HoTraceEvent{now_s(), u, kind, source, target, users_[u].slice});
}

void World::move_user(int u) {
  UserState& user = users_[u];
  if (user.speed_mps <= 0.0) return;
  const double step = user.speed_mps * cfg_.radio_tick_s;
  const Vec2 delta = user.waypoint - user.pos;
  const double dist = delta.norm();
  if (dist <= step) {
    user.pos = user.waypoint;
    user.waypoint = sample_point(cfg_.user_groups[user.group].region);
  } else {
    user.pos += delta * (step / dist);
  }
}

void World::refresh_activity() {
  const double p = activity_probability(now_s());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (auto& u : users_) u.active = unif(rng_) < p;
}

void World::measure(int u) {
  UserState& user = users_[u];
  const double moved = users_[u].speed_mps * cfg_.radio_tick_s;
  shadowing_.advance(u, moved, rng_);
  std::normal_distribution<double> noise(0.0, cfg_.measurement_noise_db);
  for (int c = 0; c < n_cells_count(); ++c) {
    double r = mean_rsrp_dbm(user.pos, cells_[c].site, cells_[c].azimuth_deg, cfg_) -
               shadowing_.value(u, c);
    if (cfg_.measurement_noise_db > 0.0) r += noise(rng_);
    user.rsrp_dbm(c) = r;
  }
}

double World::compute_sinr(int u) const {
  const UserState& user = users_.at(u);
  if (user.serving < 0) throw std::logic_error("compute_sinr: user not attached");
  const double serving_mw = db_to_linear(user.rsrp_dbm(user.serving));
  double interference_mw = 0.0;
  for (int c = 0; c < n_cells_count(); ++c) {
    if (c == user.serving) continue;
    interference_mw += db_to_linear(user.rsrp_dbm(c)) * prev_total_load_(c);
  }
  const double noise_mw = db_to_linear(cfg_.noise_floor_dbm);
  return linear_to_db(serving_mw / (interference_mw + noise_mw));
}

void World::process_reattach(int u) {
  UserState& user = users_[u];
  if (user.reattach_timer_s < 0.0) return;
  user.reattach_timer_s -= cfg_.radio_tick_s;
  if (user.reattach_timer_s > 0.0) return;
  // Re-establish to the strongest cell the old serving cell knows about.
  int best = user.reattach_from;
  double best_rsrp = user.rsrp_dbm(best);
  for (int c : boundaries_.neighbors_of(user.reattach_from)) {
    if (user.rsrp_dbm(c) > best_rsrp) {
      best_rsrp = user.rsrp_dbm(c);
      best = c;
    }
  }
  user.tracker.on_reestablish(now_s(), best, book_);
  log_event(HoTraceEvent::Kind::Reestablish, u, user.reattach_from, best);
  user.serving = best;
  user.reattach_timer_s = -1.0;
  user.reattach_from = -1;
  user.rlf_streak = 0;
  std::fill(user.hold_ticks.begin(), user.hold_ticks.end(), 0);
}

void World::process_rlf(int u) {
  UserState& user = users_[u];
  if (user.serving < 0) return;
  user.sinr_db = compute_sinr(u);
  if (user.sinr_db < cfg_.q_out_db) {
    ++user.rlf_streak;
  } else {
    user.rlf_streak = 0;
  }
  if (user.rlf_streak < rlf_window_ticks_) return;
  log_event(HoTraceEvent::Kind::Rlf, u, user.serving, -1);
  user.tracker.on_rlf(now_s(), user.serving, book_);
  user.pending_exec_s = -1.0;  // any executing handover was charged as too late
  user.pending_source = -1;
  user.pending_target = -1;
  user.reattach_from = user.serving;
  user.serving = -1;
  user.reattach_timer_s = cfg_.reestablish_delay_s;
  user.rlf_streak = 0;
  std::fill(user.hold_ticks.begin(), user.hold_ticks.end(), 0);
}

void World::complete_handover(int u, int from, int to) {
  UserState& user = users_[u];
  user.tracker.on_complete(now_s(), from, to, book_);
  log_event(HoTraceEvent::Kind::Complete, u, from, to);
  user.serving = to;
  user.rlf_streak = 0;
  std::fill(user.hold_ticks.begin(), user.hold_ticks.end(), 0);
}

void World::process_pending(int u) {
  UserState& user = users_[u];
  if (user.pending_exec_s < 0.0 || user.serving < 0) return;
  user.pending_exec_s -= cfg_.radio_tick_s;
  if (user.pending_exec_s > 0.0) return;
  const int from = user.pending_source;
  const int to = user.pending_target;
  user.pending_exec_s = -1.0;
  user.pending_source = -1;
  user.pending_target = -1;
  complete_handover(u, from, to);
}

void World::process_criteria(int u) {
  UserState& user = users_[u];
  if (user.serving < 0 || user.tracker.executing()) return;
  const int serving = user.serving;
  int trigger_target = -1;
  double trigger_rsrp = -1e300;
  for (int m : boundaries_.neighbors_of(serving)) {
    const int b = boundaries_.index_of(serving, m);
    const bool held = user.rsrp_dbm(m) > user.rsrp_dbm(serving) + margins_(b, user.slice);
    user.hold_ticks[m] = held ? user.hold_ticks[m] + 1 : 0;
    if (user.hold_ticks[m] >= static_cast<int>(ttt_ticks_(b, user.slice)) &&
        user.rsrp_dbm(m) > trigger_rsrp) {
      trigger_target = m;
      trigger_rsrp = user.rsrp_dbm(m);
    }
  }
  if (trigger_target < 0) return;
  log_event(HoTraceEvent::Kind::Trigger, u, serving, trigger_target);
  user.tracker.on_trigger(now_s(), serving, trigger_target, book_);
  std::fill(user.hold_ticks.begin(), user.hold_ticks.end(), 0);
  if (cfg_.ho_exec_delay_s <= cfg_.radio_tick_s) {
    complete_handover(u, serving, trigger_target);
  } else {
    user.pending_source = serving;
    user.pending_target = trigger_target;
    user.pending_exec_s = cfg_.ho_exec_delay_s;
  }
}

void World::allocate_all() {
  for (int c = 0; c < n_cells_count(); ++c) {
    std::vector<int> members;
    std::vector<double> sinr, demand;
    std::vector<int> slice_of;
    for (int i = 0; i < n_users(); ++i) {
      const UserState& u = users_[i];
      if (u.serving == c && u.active) {
        members.push_back(i);
        sinr.push_back(u.sinr_db);
        demand.push_back(cfg_.user_groups[u.group].expected_rate_mbps);
        slice_of.push_back(u.slice);
      }
    }
    const CellAllocation alloc =
        allocate_resources(sinr, demand, slice_of, cfg_.n_slices, cfg_);
    for (size_t j = 0; j < members.size(); ++j) {
      UserState& u = users_[members[j]];
      u.rate_mbps = alloc.rate_mbps[j];
      u.latency_ms = alloc.latency_ms[j];
      const auto [tsl, lsl] = user_service_levels(
          u.rate_mbps, u.latency_ms, cfg_.slices[u.slice].throughput_req_mbps,
          cfg_.slices[u.slice].latency_req_ms);
      acc_tsl_(c, u.slice) += tsl;
      acc_lsl_(c, u.slice) += lsl;
      acc_users_(c, u.slice) += 1.0;
    }
    for (int s = 0; s < cfg_.n_slices; ++s) {
      prev_slice_load_(c, s) = alloc.slice_load[s];
      acc_load_(c, s) += alloc.slice_load[s];
    }
    prev_total_load_(c) = alloc.utilization;
  }
}

void World::tick() {
  ++clock_ticks_;
  const double update_s = cfg_.activity_update_s;
  const bool refresh = static_cast<long>(std::floor(now_s() / update_s)) !=
                       static_cast<long>(std::floor((now_s() - cfg_.radio_tick_s) / update_s));
  for (int u = 0; u < n_users(); ++u) move_user(u);
  if (refresh) refresh_activity();
  for (int u = 0; u < n_users(); ++u) measure(u);
  for (int u = 0; u < n_users(); ++u) process_reattach(u);
  for (int u = 0; u < n_users(); ++u) process_rlf(u);
  for (int u = 0; u < n_users(); ++u) process_pending(u);
  for (int u = 0; u < n_users(); ++u) process_criteria(u);
  allocate_all();
  ++acc_ticks_;
}

void World::begin_step() {
  book_.reset();
  acc_load_.setZero();
  acc_users_.setZero();
  acc_tsl_.setZero();
  acc_lsl_.setZero();
  acc_ticks_ = 0;
}

AgentStepResult World::run_agent_step(const Vec& operating_action) {
  set_action(operating_action);
  begin_step();
  for (int t = 0; t < cfg_.ticks_per_agent_step; ++t) tick();
  ++agent_steps_run_;

  AgentStepResult result;
  result.aggregates = StateAggregates::zeros(n_cells_count(), cfg_.n_slices,
                                             boundaries_.pair_count());
  const double ticks = static_cast<double>(std::max<long>(acc_ticks_, 1));
  for (int c = 0; c < n_cells_count(); ++c) {
    for (int s = 0; s < cfg_.n_slices; ++s) {
      const size_t i = static_cast<size_t>(c) * cfg_.n_slices + s;
      result.aggregates.load[i] = acc_load_(c, s) / ticks;
      result.aggregates.users[i] = acc_users_(c, s) / ticks;
      result.aggregates.tsl_sum[i] = acc_tsl_(c, s) / ticks;
      result.aggregates.lsl_sum[i] = acc_lsl_(c, s) / ticks;
    }
  }
  fill_pair_counts(book_, result.aggregates);
  result.counters = book_;

  result.metrics.resize(cfg_.n_slices);
  for (int s = 0; s < cfg_.n_slices; ++s) {
    std::vector<double> tsl_sums(n_cells_count()), lsl_sums(n_cells_count()),
        user_counts(n_cells_count());
    for (int c = 0; c < n_cells_count(); ++c) {
      const size_t i = static_cast<size_t>(c) * cfg_.n_slices + s;
      tsl_sums[c] = result.aggregates.tsl_sum[i];
      lsl_sums[c] = result.aggregates.lsl_sum[i];
      user_counts[c] = result.aggregates.users[i];
    }
    result.metrics[s].hfr = hfr(book_, s);
    result.metrics[s].ppr = ppr(book_, s);
    result.metrics[s].tsl = slice_service_level(tsl_sums, user_counts);
    result.metrics[s].lsl = slice_service_level(lsl_sums, user_counts);
  }
  return result;
}

int World::active_attached_users(int slice) const {
  int n = 0;
  for (const auto& u : users_) {
    if (u.active && u.serving >= 0 && u.slice == slice) ++n;
  }
  return n;
}

void World::write_snapshot_header(std::ostream& out) const {
  out << "t_s,user,group,slice,x_m,y_m,active,serving,sinr_db,rate_mbps,latency_ms\n";
}

void World::write_snapshot(std::ostream& out) const {
  for (int i = 0; i < n_users(); ++i) {
    const UserState& u = users_[i];
    out << now_s() << ',' << i << ',' << u.group << ',' << u.slice << ',' << u.pos.x()
        << ',' << u.pos.y() << ',' << (u.active ? 1 : 0) << ',' << u.serving << ','
        << u.sinr_db << ',' << u.rate_mbps << ',' << u.latency_ms << '\n';
  }
}

}  // namespace samro
