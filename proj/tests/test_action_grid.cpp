#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "samro/action_grid.hpp"

using namespace samro;

namespace {

Vec constant_action(const ActionGrid& grid, double margin, double ttt) {
  Vec a(grid.dim());
  for (int j = 0; j < a.size(); ++j) a(j) = grid.is_ttt_dim(j) ? ttt : margin;
  return a;
}

}  // namespace

TEST_CASE("grid layout and bounds") {
  const ActionGrid grid = ActionGrid::make(34, 2);
  CHECK(grid.dim() == 136);
  CHECK(grid.margin_values.size() == 11);
  CHECK(grid.ttt_values.size() == 15);
  CHECK(grid.low(0) == -5.0);
  CHECK(grid.high(0) == 5.0);
  CHECK(grid.low(1) == 40.0);
  CHECK(grid.high(1) == 5120.0);
  CHECK(grid.margin_index(0, 0) == 0);
  CHECK(grid.ttt_index(0, 0) == 1);
  CHECK(grid.margin_index(1, 1) == 6);
}

TEST_CASE("normalize endpoints, midpoint and exact round trip") {
  const ActionGrid grid = ActionGrid::make(3, 2);
  Vec lows(grid.dim()), highs(grid.dim()), mids(grid.dim());
  for (int j = 0; j < grid.dim(); ++j) {
    lows(j) = grid.low(j);
    highs(j) = grid.high(j);
    mids(j) = 0.5 * (grid.low(j) + grid.high(j));
  }
  CHECK((normalize_action(lows, grid).array() + 1.0).abs().maxCoeff() < 1e-15);
  CHECK((normalize_action(highs, grid).array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK(normalize_action(mids, grid).cwiseAbs().maxCoeff() < 1e-15);

  Rng rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec u(grid.dim());
    for (int j = 0; j < u.size(); ++j) u(j) = unif(rng);
    const Vec back = normalize_action(denormalize_action(u, grid), grid);
    CHECK((back - u).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("snap_nearest basics and midpoint tie toward the smaller value") {
  const ActionGrid grid = ActionGrid::make(1, 1);
  Vec a(2);
  a << 0.4, 70.0;
  const Vec snapped = snap_nearest(a, grid);
  CHECK(snapped(0) == 0.0);   // 0.4 rounds down on the integer margin grid
  CHECK(snapped(1) == 64.0);  // |70-64| = 6 < |80-70| = 10

  a << 0.5, 72.0;  // exact midpoints
  const Vec tie = snap_nearest(a, grid);
  CHECK(tie(0) == 0.0);
  CHECK(tie(1) == 64.0);

  a << 3.0, 512.0;  // already on the grid
  const Vec fixed = snap_nearest(a, grid);
  CHECK(fixed(0) == 3.0);
  CHECK(fixed(1) == 512.0);
}

TEST_CASE("neighbor sampling: clamping, exact hits, and membership") {
  const ActionGrid grid = ActionGrid::make(2, 2);
  Rng rng(11);

  Vec beyond = constant_action(grid, 6.0, 9999.0);
  for (int i = 0; i < 20; ++i) {
    const Vec n = sample_neighbor(beyond, grid, rng);
    for (int j = 0; j < n.size(); ++j) {
      CHECK(n(j) == (grid.is_ttt_dim(j) ? 5120.0 : 5.0));
    }
  }
  Vec below = constant_action(grid, -7.5, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Vec n = sample_neighbor(below, grid, rng);
    for (int j = 0; j < n.size(); ++j) {
      CHECK(n(j) == (grid.is_ttt_dim(j) ? 40.0 : -5.0));
    }
  }
  Vec exact = constant_action(grid, 2.0, 320.0);
  for (int i = 0; i < 20; ++i) {
    const Vec n = sample_neighbor(exact, grid, rng);
    for (int j = 0; j < n.size(); ++j) {
      CHECK(n(j) == (grid.is_ttt_dim(j) ? 320.0 : 2.0));
    }
  }

  // Every sampled neighbor is a grid member in every dimension.
  std::uniform_real_distribution<double> um(-6.0, 6.0), ut(0.0, 6000.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec proto(grid.dim());
    for (int j = 0; j < proto.size(); ++j) proto(j) = grid.is_ttt_dim(j) ? ut(rng) : um(rng);
    const Vec n = sample_neighbor(proto, grid, rng);
    for (int j = 0; j < n.size(); ++j) {
      const auto& vals = grid.values(j);
      CHECK(std::find(vals.begin(), vals.end(), n(j)) != vals.end());
    }
  }
}

TEST_CASE("neighbor sampling follows the reciprocal-distance law") {
  // Margin 0.25 between 0 and 1: p(1) = (1/0.75) / (1/0.75 + 1/0.25) = 0.25.
  const ActionGrid grid = ActionGrid::make(1, 1);
  Rng rng(17);
  Vec proto(2);
  proto << 0.25, 512.0;
  const int draws = 100000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) {
    if (sample_neighbor(proto, grid, rng)(0) == 1.0) ++ones;
  }
  const double p = static_cast<double>(ones) / draws;
  // Three standard errors of a Bernoulli(0.25) over 1e5 draws.
  const double se = std::sqrt(0.25 * 0.75 / draws);
  CHECK(std::abs(p - 0.25) < 3.0 * se);

  // Symmetric midpoint: both neighbors equally likely.
  proto << 0.5, 512.0;
  ones = 0;
  for (int i = 0; i < draws; ++i) {
    if (sample_neighbor(proto, grid, rng)(0) == 1.0) ++ones;
  }
  CHECK(std::abs(ones / static_cast<double>(draws) - 0.5) < 3.0 * std::sqrt(0.25 / draws));
}

TEST_CASE("empirical frequencies match on ttt dimensions too") {
  const ActionGrid grid = ActionGrid::make(1, 1);
  Rng rng(23);
  Vec proto(2);
  proto << 0.0, 200.0;  // between 160 and 256: p(256) = (1/56)/(1/56 + 1/40) = 40/96
  const double expect = 40.0 / 96.0;
  const int draws = 100000;
  int hi = 0;
  for (int i = 0; i < draws; ++i) {
    if (sample_neighbor(proto, grid, rng)(1) == 256.0) ++hi;
  }
  const double p = static_cast<double>(hi) / draws;
  CHECK(std::abs(p - expect) < 3.0 * std::sqrt(expect * (1.0 - expect) / draws));
}

TEST_CASE("k_neighbors returns k members; k must be positive") {
  const ActionGrid grid = ActionGrid::make(2, 1);
  Rng rng(3);
  const Vec proto = constant_action(grid, 0.3, 300.0);
  const auto neighbors = k_neighbors(proto, 8, grid, rng);
  CHECK(neighbors.size() == 8);
  CHECK_THROWS_AS(k_neighbors(proto, 0, grid, rng), std::invalid_argument);
}

TEST_CASE("projection equals exhaustive argmax over its candidates") {
  const ActionGrid grid = ActionGrid::make(2, 2);
  Rng rng(29);
  std::uniform_real_distribution<double> um(-6.0, 6.0), ut(0.0, 6000.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec proto(grid.dim());
    for (int j = 0; j < proto.size(); ++j) proto(j) = grid.is_ttt_dim(j) ? ut(rng) : um(rng);
    // Scripted q: deterministic function of the action entries.
    auto q = [](const Vec& a) {
      double s = 0.0;
      for (int j = 0; j < a.size(); ++j) s += std::sin(0.01 * a(j) * (j + 1));
      return s;
    };
    Rng rng_a(1000 + trial), rng_b(1000 + trial);
    const Vec chosen = project_action(proto, 6, grid, q, rng_a);
    const auto candidates = k_neighbors(proto, 6, grid, rng_b);
    double best = -1e300;
    Vec want;
    for (const Vec& c : candidates) {
      if (q(c) > best) {
        best = q(c);
        want = c;
      }
    }
    CHECK((chosen - want).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("projection with k=1 ignores q; constant q keeps the first candidate") {
  const ActionGrid grid = ActionGrid::make(1, 1);
  const Vec proto = constant_action(grid, 0.7, 90.0);
  int calls = 0;
  auto q_counting = [&calls](const Vec&) {
    ++calls;
    return 1.0;
  };
  Rng rng_a(7), rng_b(7);
  const Vec single = project_action(proto, 1, grid, q_counting, rng_a);
  CHECK(calls == 1);
  CHECK((single - sample_neighbor(proto, grid, rng_b)).cwiseAbs().maxCoeff() == 0.0);

  Rng rng_c(9), rng_d(9);
  const Vec first = project_action(proto, 5, grid, [](const Vec&) { return 0.0; }, rng_c);
  const Vec expect = k_neighbors(proto, 5, grid, rng_d)[0];
  CHECK((first - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("augmentation samples stay inside the snapping cell") {
  const ActionGrid grid = ActionGrid::make(2, 2);
  Rng rng(31);

  // Interior value 0 between -1 and 1: the cell is (-0.5, 0.5).
  Vec op = constant_action(grid, 0.0, 512.0);
  for (const Vec& sample : augment_continuous(op, 50, grid, rng)) {
    for (int j = 0; j < sample.size(); ++j) {
      if (!grid.is_ttt_dim(j)) {
        CHECK(sample(j) > -0.5);
        CHECK(sample(j) < 0.5);
      }
    }
  }

  // Endpoints: samples between the midpoint and the boundary value.
  Vec top = constant_action(grid, 5.0, 5120.0);
  for (const Vec& sample : augment_continuous(top, 50, grid, rng)) {
    for (int j = 0; j < sample.size(); ++j) {
      if (grid.is_ttt_dim(j)) {
        CHECK(sample(j) > 0.5 * (2560.0 + 5120.0));
        CHECK(sample(j) <= 5120.0);
      } else {
        CHECK(sample(j) > 4.5);
        CHECK(sample(j) <= 5.0);
      }
    }
  }
}

TEST_CASE("augmentation round trips through snap_nearest") {
  const ActionGrid grid = ActionGrid::make(3, 2);
  Rng rng(37);
  std::uniform_int_distribution<size_t> pick_m(0, grid.margin_values.size() - 1);
  std::uniform_int_distribution<size_t> pick_t(0, grid.ttt_values.size() - 1);
  for (int trial = 0; trial < 100; ++trial) {
    Vec op(grid.dim());
    for (int j = 0; j < op.size(); ++j) {
      op(j) = grid.is_ttt_dim(j) ? grid.ttt_values[pick_t(rng)]
                                 : grid.margin_values[pick_m(rng)];
    }
    for (const Vec& sample : augment_continuous(op, 4, grid, rng)) {
      const Vec back = snap_nearest(sample, grid);
      CHECK((back - op).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  CHECK_THROWS_AS(augment_continuous(constant_action(grid, 0.25, 512.0), 2, grid, rng),
                  std::invalid_argument);
}

TEST_CASE("default action is on the grid everywhere") {
  const ActionGrid grid = ActionGrid::make(34, 2);
  const Vec d = default_action(grid);
  CHECK(d.size() == 136);
  const Vec snapped = snap_nearest(d, grid);
  CHECK((snapped - d).cwiseAbs().maxCoeff() == 0.0);
}
