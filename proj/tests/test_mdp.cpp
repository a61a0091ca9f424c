#include <doctest.h>

#include <cmath>

#include "ho_oracle.hpp"
#include "samro/mdp.hpp"

using namespace samro;
using namespace samro::testing;

TEST_CASE("handover failure ratio arithmetic") {
  const BoundarySet bs = complete_boundaries(3);
  HoCounterBook book(bs, 1);
  // HOA = 10 split as 7 successes and one of each failure kind.
  book.add(0, 1, 0, HoCounter::Attempt, 10);
  book.add(0, 1, 0, HoCounter::Success, 7);
  book.add(0, 1, 0, HoCounter::TooLate, 1);
  book.add(0, 1, 0, HoCounter::TooEarly, 1);
  book.add(0, 1, 0, HoCounter::WrongCell, 1);
  CHECK(hfr(book, 0) == doctest::Approx(0.3));

  HoCounterBook clean(bs, 1);
  clean.add(1, 2, 0, HoCounter::Attempt, 5);
  clean.add(1, 2, 0, HoCounter::Success, 5);
  CHECK(hfr(clean, 0) == 0.0);

  HoCounterBook empty(bs, 1);
  CHECK(hfr(empty, 0) == 0.0);  // zero-attempt convention
}

TEST_CASE("ping-pong ratio arithmetic") {
  const BoundarySet bs = complete_boundaries(3);
  HoCounterBook book(bs, 1);
  book.add(0, 1, 0, HoCounter::Success, 8);
  book.add(0, 1, 0, HoCounter::PingPong, 2);
  CHECK(ppr(book, 0) == doctest::Approx(0.25));

  HoCounterBook none(bs, 1);
  none.add(0, 1, 0, HoCounter::Success, 4);
  CHECK(ppr(none, 0) == 0.0);

  HoCounterBook saturated(bs, 1);
  saturated.add(0, 2, 0, HoCounter::Success, 3);
  saturated.add(0, 2, 0, HoCounter::PingPong, 3);
  CHECK(ppr(saturated, 0) == 1.0);

  HoCounterBook empty(bs, 1);
  CHECK(ppr(empty, 0) == 0.0);
}

TEST_CASE("ratios stay in [0,1] for any book satisfying the count identity") {
  const BoundarySet bs = complete_boundaries(3);
  Rng rng(3);
  std::uniform_int_distribution<long> count(0, 20);
  for (int trial = 0; trial < 500; ++trial) {
    HoCounterBook book(bs, 2);
    for (const auto& [n, m] : bs.directional) {
      for (int s = 0; s < 2; ++s) {
        const long hos = count(rng), hol = count(rng), hoe = count(rng), how = count(rng);
        book.add(n, m, s, HoCounter::Success, hos);
        book.add(n, m, s, HoCounter::TooLate, hol);
        book.add(n, m, s, HoCounter::TooEarly, hoe);
        book.add(n, m, s, HoCounter::WrongCell, how);
        book.add(n, m, s, HoCounter::Attempt, hos + hol + hoe + how);
        book.add(n, m, s, HoCounter::PingPong, std::uniform_int_distribution<long>(0, hos)(rng));
      }
    }
    for (int s = 0; s < 2; ++s) {
      CHECK(hfr(book, s) >= 0.0);
      CHECK(hfr(book, s) <= 1.0);
      CHECK(ppr(book, s) >= 0.0);
      CHECK(ppr(book, s) <= 1.0);
    }
  }
}

TEST_CASE("user service levels") {
  auto [tsl, lsl] = user_service_levels(2.5, 1.0, 5.0, 1.0);
  CHECK(tsl == doctest::Approx(0.5));
  CHECK(lsl == doctest::Approx(1.0));  // latency exactly at the requirement

  auto capped = user_service_levels(6.0, 0.5, 5.0, 1.0);
  CHECK(capped.first == 1.0);
  CHECK(capped.second == 1.0);

  auto slow = user_service_levels(5.0, 4.0, 5.0, 1.0);
  CHECK(slow.second == doctest::Approx(0.25));

  CHECK_THROWS_AS(user_service_levels(1.0, 0.0, 5.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(user_service_levels(1.0, -2.0, 5.0, 1.0), std::domain_error);
}

TEST_CASE("slice service level over cells") {
  CHECK(slice_service_level({0.5, 1.5}, {1.0, 2.0}) == doctest::Approx(2.0 / 3.0));
  CHECK(slice_service_level({2.0, 3.0}, {2.0, 3.0}) == doctest::Approx(1.0));
  CHECK(slice_service_level({0.0, 0.0}, {0.0, 0.0}) == 0.0);  // empty slice convention
}

TEST_CASE("reward endpoints match the published range") {
  const RewardConfig cfg = RewardConfig::defaults(2);
  std::vector<SliceMetrics> best(2), worst(2), zero(2);
  for (auto& m : best) {
    m.tsl = m.lsl = 1.0;
    m.hfr = m.ppr = 0.0;
  }
  for (auto& m : worst) {
    m.tsl = m.lsl = 0.0;
    m.hfr = m.ppr = 1.0;
  }
  CHECK(reward(best, cfg) == doctest::Approx(10.0));
  CHECK(reward(worst, cfg) == doctest::Approx(-6.5));
  CHECK(reward(zero, cfg) == 0.0);
  CHECK(cfg.max_value() == doctest::Approx(10.0));
  CHECK(cfg.min_value() == doctest::Approx(-6.5));
}

TEST_CASE("reward corners stay inside the range and respond monotonically") {
  const RewardConfig cfg = RewardConfig::defaults(2);
  // Exhaustive 0/1 corners of the 8 metric entries.
  for (int mask = 0; mask < 256; ++mask) {
    std::vector<SliceMetrics> m(2);
    for (int s = 0; s < 2; ++s) {
      m[s].tsl = (mask >> (4 * s + 0)) & 1;
      m[s].lsl = (mask >> (4 * s + 1)) & 1;
      m[s].hfr = (mask >> (4 * s + 2)) & 1;
      m[s].ppr = (mask >> (4 * s + 3)) & 1;
    }
    const double r = reward(m, cfg);
    CHECK(r <= 10.0 + 1e-12);
    CHECK(r >= -6.5 - 1e-12);
  }

  Rng rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SliceMetrics> m(2);
    for (auto& sm : m) {
      sm.tsl = unif(rng);
      sm.lsl = unif(rng);
      sm.hfr = unif(rng);
      sm.ppr = unif(rng);
    }
    const double base = reward(m, cfg);
    auto bumped = m;
    bumped[0].tsl = std::min(1.0, m[0].tsl + 0.1);
    CHECK(reward(bumped, cfg) >= base);
    bumped = m;
    bumped[1].hfr = std::min(1.0, m[1].hfr + 0.1);
    CHECK(reward(bumped, cfg) <= base);
  }
}

TEST_CASE("state dimension formula") {
  // (4 N + 2 B) S with B directional boundaries (= 2 * pairs).
  CHECK(StateAggregates::zeros(9, 2, 17).state_dim() == 208);
  CHECK(StateAggregates::zeros(2, 1, 1).state_dim() == 12);
  CHECK(StateAggregates::zeros(9, 1, 17).state_dim() == 104);
}

TEST_CASE("assemble/disassemble is a bijection") {
  Rng rng(17);
  std::uniform_real_distribution<double> unif(0.0, 5.0);
  StateAggregates agg = StateAggregates::zeros(3, 2, 2);
  for (auto* v : {&agg.load, &agg.users, &agg.tsl_sum, &agg.lsl_sum}) {
    for (auto& x : *v) x = unif(rng);
  }
  for (auto* v : {&agg.ho_attempts, &agg.ho_successes, &agg.ho_too_late, &agg.ho_ping_pong}) {
    for (auto& x : *v) x = std::floor(unif(rng));
  }
  const Vec state = assemble_state(agg);
  REQUIRE(state.size() == agg.state_dim());
  const StateAggregates back = disassemble_state(state, 3, 2, 2);
  CHECK(back.load == agg.load);
  CHECK(back.users == agg.users);
  CHECK(back.tsl_sum == agg.tsl_sum);
  CHECK(back.lsl_sum == agg.lsl_sum);
  CHECK(back.ho_attempts == agg.ho_attempts);
  CHECK(back.ho_successes == agg.ho_successes);
  CHECK(back.ho_too_late == agg.ho_too_late);
  CHECK(back.ho_ping_pong == agg.ho_ping_pong);

  const StateAggregates zeros = StateAggregates::zeros(3, 2, 2);
  CHECK(assemble_state(zeros).isZero());
}

TEST_CASE("canonical layout order: cell block first, then pair block") {
  StateAggregates agg = StateAggregates::zeros(2, 2, 1);
  agg.load[0 * 2 + 0] = 0.25;      // cell 0, slice 0
  agg.users[1 * 2 + 1] = 7.0;      // cell 1, slice 1
  agg.ho_attempts[0 * 2 + 1] = 3;  // pair 0, slice 1
  const Vec s = assemble_state(agg);
  CHECK(s(0) == 0.25);                     // first feature of cell 0 slice 0
  CHECK(s(4 * 3 + 1) == 7.0);              // cell 1, slice 1, second feature
  CHECK(s(4 * 2 * 2 + 4 * 1 + 0) == 3.0);  // pair block, slice 1, attempts
}

TEST_CASE("pair counts sum both directions from the book") {
  const BoundarySet bs = complete_boundaries(3);
  HoCounterBook book(bs, 2);
  book.add(0, 1, 1, HoCounter::Attempt, 2);
  book.add(1, 0, 1, HoCounter::Attempt, 3);
  StateAggregates agg = StateAggregates::zeros(3, 2, bs.pair_count());
  fill_pair_counts(book, agg);
  const int pair01 = bs.pair_index_of(0, 1);
  CHECK(agg.ho_attempts[pair01 * 2 + 1] == 5.0);
  CHECK(agg.ho_attempts[pair01 * 2 + 0] == 0.0);
}

TEST_CASE("slice aggregation sums additively") {
  StateAggregates agg = StateAggregates::zeros(2, 2, 1);
  agg.load = {0.1, 0.2, 0.3, 0.4};
  agg.users = {1, 2, 3, 4};
  agg.tsl_sum = {0.5, 1.0, 1.5, 2.0};
  agg.lsl_sum = {0.2, 0.4, 0.6, 0.8};
  agg.ho_attempts = {2, 3};
  agg.ho_successes = {1, 2};
  agg.ho_too_late = {1, 0};
  agg.ho_ping_pong = {0, 1};
  const StateAggregates out = aggregate_slices(agg);
  CHECK(out.n_slices == 1);
  CHECK(out.load == std::vector<double>{0.1 + 0.2, 0.3 + 0.4});
  CHECK(out.users == std::vector<double>{3, 7});
  CHECK(out.ho_attempts == std::vector<double>{5});
  CHECK(out.state_dim() == (4 * 2 + 2 * 2) * 1);
}

TEST_CASE("state scaling divides counts and level sums by the cap") {
  StateAggregates agg = StateAggregates::zeros(1, 1, 1);
  agg.load = {0.5};
  agg.users = {25.0};
  agg.tsl_sum = {10.0};
  agg.lsl_sum = {5.0};
  agg.ho_attempts = {50.0};
  agg.ho_successes = {40.0};
  agg.ho_too_late = {5.0};
  agg.ho_ping_pong = {10.0};
  const Vec scaled = scale_state(assemble_state(agg), 1, 1, 1, StateScalingConfig{50.0});
  CHECK(scaled(0) == 0.5);  // load untouched
  CHECK(scaled(1) == doctest::Approx(0.5));
  CHECK(scaled(2) == doctest::Approx(0.2));
  CHECK(scaled(3) == doctest::Approx(0.1));
  CHECK(scaled(4) == doctest::Approx(1.0));
  CHECK(scaled(7) == doctest::Approx(0.2));
}
