#pragma once

#include "samro/scenario.hpp"
#include "samro/types.hpp"

namespace samro {

/// Log-distance pathloss without shadowing; distances clamp at one meter.
double pathloss_db(double distance_m, const ScenarioConfig& cfg);

/// Parabolic sector pattern: attenuation grows with the square of the angle
/// off boresight, floored at the maximum attenuation.
double sector_attenuation_db(double off_boresight_deg, const ScenarioConfig& cfg);

/// Smallest absolute angle between two bearings, in [0, 180] degrees.
double angle_distance_deg(double a_deg, double b_deg);

/// Bearing of the vector from `a` to `b`, degrees counterclockwise from +x.
double bearing_deg(const Vec2& a, const Vec2& b);

/// Mean received power from one cell at one position (no shadowing, no
/// measurement noise).
double mean_rsrp_dbm(const Vec2& user_pos, const Vec2& site_pos, double azimuth_deg,
                     const ScenarioConfig& cfg);

/// Gudmundson-style shadowing: one correlated lognormal process per
/// user-cell link, decorrelating with the distance the user moves.
class ShadowingField {
 public:
  ShadowingField() = default;
  ShadowingField(int n_users, int n_cells, const ScenarioConfig& cfg, Rng& rng);

  /// Advances user `u` by `moved_m` meters and refreshes its link samples.
  void advance(int u, double moved_m, Rng& rng);
  double value(int u, int c) const { return values_(c, u); }

 private:
  Mat values_;  // cells x users
  double sigma_db_ = 0.0;
  double decorr_m_ = 1.0;
};

}  // namespace samro
