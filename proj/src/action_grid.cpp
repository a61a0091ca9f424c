#include "samro/action_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace samro {

namespace {

constexpr double kExactHitEps = 1e-9;

// Index of the nearest grid value; on an exact midpoint the smaller wins.
int nearest_index(const std::vector<double>& values, double x) {
  const auto it = std::lower_bound(values.begin(), values.end(), x);
  if (it == values.begin()) return 0;
  if (it == values.end()) return static_cast<int>(values.size()) - 1;
  const int hi = static_cast<int>(it - values.begin());
  const int lo = hi - 1;
  const double d_lo = x - values[lo];
  const double d_hi = values[hi] - x;
  return d_hi < d_lo ? hi : lo;
}

}  // namespace

std::vector<double> ActionGrid::default_margin_values() {
  std::vector<double> v;
  for (int o = -5; o <= 5; ++o) v.push_back(static_cast<double>(o));
  return v;
}

std::vector<double> ActionGrid::default_ttt_values() {
  return {40, 64, 80, 100, 128, 160, 256, 320, 480, 512, 640, 1024, 1280, 2560, 5120};
}

ActionGrid ActionGrid::make(int n_boundaries, int n_slices) {
  ActionGrid grid;
  grid.margin_values = default_margin_values();
  grid.ttt_values = default_ttt_values();
  grid.n_boundaries = n_boundaries;
  grid.n_slices = n_slices;
  grid.validate();
  return grid;
}

void ActionGrid::validate() const {
  if (n_boundaries <= 0 || n_slices <= 0) {
    throw std::invalid_argument("action grid needs positive boundary and slice counts");
  }
  for (const auto* vals : {&margin_values, &ttt_values}) {
    if (vals->empty()) throw std::invalid_argument("empty grid value set");
    for (size_t i = 1; i < vals->size(); ++i) {
      if ((*vals)[i] <= (*vals)[i - 1]) {
        throw std::invalid_argument("grid value sets must be strictly ascending");
      }
    }
  }
}

Vec normalize_action(const Vec& action, const ActionGrid& grid) {
  if (action.size() != grid.dim()) {
    throw std::invalid_argument("normalize_action: dimension mismatch");
  }
  Vec unit(action.size());
  for (int j = 0; j < action.size(); ++j) {
    const double lo = grid.low(j), hi = grid.high(j);
    unit(j) = 2.0 * (action(j) - lo) / (hi - lo) - 1.0;
  }
  return unit;
}

Vec denormalize_action(const Vec& unit, const ActionGrid& grid) {
  if (unit.size() != grid.dim()) {
    throw std::invalid_argument("denormalize_action: dimension mismatch");
  }
  Vec action(unit.size());
  for (int j = 0; j < unit.size(); ++j) {
    const double lo = grid.low(j), hi = grid.high(j);
    action(j) = lo + (unit(j) + 1.0) * 0.5 * (hi - lo);
  }
  return action;
}

Vec snap_nearest(const Vec& proto, const ActionGrid& grid) {
  if (proto.size() != grid.dim()) {
    throw std::invalid_argument("snap_nearest: dimension mismatch");
  }
  Vec out(proto.size());
  for (int j = 0; j < proto.size(); ++j) {
    const auto& vals = grid.values(j);
    out(j) = vals[nearest_index(vals, proto(j))];
  }
  return out;
}

Vec sample_neighbor(const Vec& proto, const ActionGrid& grid, Rng& rng) {
  if (proto.size() != grid.dim()) {
    throw std::invalid_argument("sample_neighbor: dimension mismatch");
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec out(proto.size());
  for (int j = 0; j < proto.size(); ++j) {
    const auto& vals = grid.values(j);
    const double x = proto(j);
    if (x <= vals.front()) {
      out(j) = vals.front();
      continue;
    }
    if (x >= vals.back()) {
      out(j) = vals.back();
      continue;
    }
    const auto it = std::lower_bound(vals.begin(), vals.end(), x);
    const int hi = static_cast<int>(it - vals.begin());
    if (hi < static_cast<int>(vals.size()) && std::abs(vals[hi] - x) < kExactHitEps) {
      out(j) = vals[hi];
      continue;
    }
    const int lo = hi - 1;
    if (std::abs(x - vals[lo]) < kExactHitEps) {
      out(j) = vals[lo];
      continue;
    }
    const double nu_hi = 1.0 / (vals[hi] - x);
    const double nu_lo = 1.0 / (x - vals[lo]);
    const double p_hi = nu_hi / (nu_hi + nu_lo);
    out(j) = unif(rng) < p_hi ? vals[hi] : vals[lo];
  }
  return out;
}

std::vector<Vec> k_neighbors(const Vec& proto, int k, const ActionGrid& grid, Rng& rng) {
  if (k < 1) throw std::invalid_argument("k_neighbors: k must be >= 1");
  std::vector<Vec> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(sample_neighbor(proto, grid, rng));
  return out;
}

Vec project_action(const Vec& proto, int k, const ActionGrid& grid,
                   const std::function<double(const Vec&)>& q_evaluator, Rng& rng) {
  const std::vector<Vec> candidates = k_neighbors(proto, k, grid, rng);
  int best = 0;
  double best_q = q_evaluator(candidates[0]);
  for (int i = 1; i < static_cast<int>(candidates.size()); ++i) {
    const double q = q_evaluator(candidates[i]);
    if (q > best_q) {
      best_q = q;
      best = i;
    }
  }
  return candidates[best];
}

Vec sample_within_cell(const Vec& operating, const ActionGrid& grid, Rng& rng) {
  if (operating.size() != grid.dim()) {
    throw std::invalid_argument("sample_within_cell: dimension mismatch");
  }
  Vec out(operating.size());
  for (int j = 0; j < operating.size(); ++j) {
    const auto& vals = grid.values(j);
    const int idx = nearest_index(vals, operating(j));
    if (vals[idx] != operating(j)) {
      throw std::invalid_argument("sample_within_cell: action entry not on the grid");
    }
    // Snapping cell: from the midpoint below (exclusive, since exact
    // midpoints snap to the smaller value) to the midpoint above, clipped to
    // the grid range at the endpoints.
    const double lo =
        idx == 0 ? vals.front() : 0.5 * (vals[idx - 1] + vals[idx]);
    const double hi = idx + 1 == static_cast<int>(vals.size())
                          ? vals.back()
                          : 0.5 * (vals[idx] + vals[idx + 1]);
    if (lo == hi) {  // single-value grid
      out(j) = vals[idx];
      continue;
    }
    std::uniform_real_distribution<double> unif(lo, hi);
    double x = unif(rng);
    if (idx > 0 && x <= lo) x = std::nextafter(lo, hi);
    out(j) = x;
  }
  return out;
}

std::vector<Vec> augment_continuous(const Vec& operating, int k,
                                    const ActionGrid& grid, Rng& rng) {
  if (k < 1) throw std::invalid_argument("augment_continuous: k must be >= 1");
  std::vector<Vec> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(sample_within_cell(operating, grid, rng));
  return out;
}

Vec default_action(const ActionGrid& grid) {
  Vec a(grid.dim());
  for (int j = 0; j < a.size(); ++j) a(j) = grid.is_ttt_dim(j) ? 512.0 : 0.0;
  return a;
}

}  // namespace samro
