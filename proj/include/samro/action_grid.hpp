#pragma once

#include <functional>
#include <vector>

#include "samro/types.hpp"

namespace samro {

/// Gridded handover-parameter space. Dimensions are laid out boundary-major:
/// directional boundaries in lexicographic order, slices ascending within a
/// boundary, margin (dB) before trigger time (ms) within a slice. Even
/// dimensions are margins, odd dimensions trigger times.
struct ActionGrid {
  std::vector<double> margin_values;  // dB, strictly ascending
  std::vector<double> ttt_values;     // ms, strictly ascending
  int n_boundaries = 0;               // directional boundaries
  int n_slices = 0;

  static ActionGrid make(int n_boundaries, int n_slices);
  static std::vector<double> default_margin_values();  // {-5,...,5} dB
  static std::vector<double> default_ttt_values();     // 3GPP trigger times

  int dim() const { return 2 * n_boundaries * n_slices; }
  bool is_ttt_dim(int j) const { return (j % 2) == 1; }
  const std::vector<double>& values(int j) const {
    return is_ttt_dim(j) ? ttt_values : margin_values;
  }
  double low(int j) const { return values(j).front(); }
  double high(int j) const { return values(j).back(); }
  int margin_index(int boundary, int slice) const {
    return 2 * (boundary * n_slices + slice);
  }
  int ttt_index(int boundary, int slice) const {
    return margin_index(boundary, slice) + 1;
  }

  void validate() const;
};

/// Per-dimension affine map between the physical box [low, high] and [-1, 1].
Vec normalize_action(const Vec& action, const ActionGrid& grid);
Vec denormalize_action(const Vec& unit, const ActionGrid& grid);

/// Nearest grid value per dimension; exact midpoints round toward the
/// smaller value.
Vec snap_nearest(const Vec& proto, const ActionGrid& grid);

/// One stochastic neighbor of the proto action: per dimension the adjacent
/// grid values are chosen with probability proportional to the reciprocal of
/// their distance; values at or beyond the grid ends clamp to the endpoint.
Vec sample_neighbor(const Vec& proto, const ActionGrid& grid, Rng& rng);

/// k independent draws of sample_neighbor (duplicates permitted).
std::vector<Vec> k_neighbors(const Vec& proto, int k, const ActionGrid& grid, Rng& rng);

/// Projection onto the grid: evaluates q on each of k sampled neighbors and
/// returns the argmax, ties broken by lowest candidate index.
Vec project_action(const Vec& proto, int k, const ActionGrid& grid,
                   const std::function<double(const Vec&)>& q_evaluator, Rng& rng);

/// Inverse of the neighbor selection used for dataset augmentation: samples
/// uniformly within the snapping cell of each grid-valued entry, so that
/// snap_nearest maps every sample back to the original action.
Vec sample_within_cell(const Vec& operating, const ActionGrid& grid, Rng& rng);
std::vector<Vec> augment_continuous(const Vec& operating, int k,
                                    const ActionGrid& grid, Rng& rng);

/// All margins 0 dB, all trigger times 512 ms.
Vec default_action(const ActionGrid& grid);

}  // namespace samro
