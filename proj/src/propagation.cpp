#include "samro/propagation.hpp"

#include <cmath>

namespace samro {

double pathloss_db(double distance_m, const ScenarioConfig& cfg) {
  const double d = std::max(distance_m, 1.0);
  return cfg.pl_ref_db + 10.0 * cfg.pl_exponent * std::log10(d / cfg.pl_ref_dist_m);
}

double sector_attenuation_db(double off_boresight_deg, const ScenarioConfig& cfg) {
  const double ratio = off_boresight_deg / cfg.sector_beamwidth_deg;
  return std::min(12.0 * ratio * ratio, cfg.sector_max_attenuation_db);
}

double angle_distance_deg(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

double bearing_deg(const Vec2& a, const Vec2& b) {
  return std::atan2(b.y() - a.y(), b.x() - a.x()) * 180.0 / M_PI;
}

double mean_rsrp_dbm(const Vec2& user_pos, const Vec2& site_pos, double azimuth_deg,
                     const ScenarioConfig& cfg) {
  const double dist = (user_pos - site_pos).norm();
  const double off = angle_distance_deg(bearing_deg(site_pos, user_pos), azimuth_deg);
  return cfg.tx_power_dbm - pathloss_db(dist, cfg) - sector_attenuation_db(off, cfg);
}

ShadowingField::ShadowingField(int n_users, int n_cells, const ScenarioConfig& cfg,
                               Rng& rng)
    : sigma_db_(cfg.shadowing_sigma_db), decorr_m_(cfg.shadowing_decorr_m) {
  values_.resize(n_cells, n_users);
  std::normal_distribution<double> normal(0.0, sigma_db_);
  for (int u = 0; u < n_users; ++u) {
    for (int c = 0; c < n_cells; ++c) values_(c, u) = normal(rng);
  }
}

void ShadowingField::advance(int u, double moved_m, Rng& rng) {
  if (moved_m <= 0.0 || sigma_db_ <= 0.0) return;
  const double rho = std::exp(-moved_m / decorr_m_);
  const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho)) * sigma_db_;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < values_.rows(); ++c) {
    values_(c, u) = rho * values_(c, u) + innovation * normal(rng);
  }
}

}  // namespace samro
