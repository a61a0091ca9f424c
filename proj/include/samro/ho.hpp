#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "samro/types.hpp"

namespace samro {

/// Directional cell boundaries. If (n, m) is a boundary so is (m, n); the
/// directional list and the unordered pair list are kept in lexicographic
/// order, which fixes the canonical layout of actions and state entries.
struct BoundarySet {
  std::vector<std::pair<int, int>> directional;  // size B
  std::vector<std::pair<int, int>> pairs;        // size B/2, entries (n, m) with n < m

  static BoundarySet from_neighbor_lists(const std::vector<std::vector<int>>& neighbors);

  int size() const { return static_cast<int>(directional.size()); }
  int pair_count() const { return static_cast<int>(pairs.size()); }

  /// Index into the directional list, -1 when (n, m) is not a boundary.
  int index_of(int n, int m) const;
  /// Index into the pair list, -1 when {n, m} is not a neighbor pair.
  int pair_index_of(int n, int m) const;
  const std::vector<int>& neighbors_of(int n) const;

 private:
  std::vector<std::vector<int>> neighbor_lists_;
  std::vector<std::vector<int>> dir_index_;   // dir_index_[n][m] or -1
  std::vector<std::vector<int>> pair_index_;  // pair_index_[min][max] or -1
};

enum class HoCounter { Attempt = 0, Success, TooLate, TooEarly, WrongCell, PingPong };
inline constexpr int kHoCounterCount = 6;

/// Per-boundary per-slice handover event counts.
class HoCounterBook {
 public:
  HoCounterBook() = default;
  HoCounterBook(const BoundarySet& boundaries, int n_slices);

  void reset();
  void add(int n, int m, int slice, HoCounter c, long delta = 1);
  long get(int n, int m, int slice, HoCounter c) const;
  long pair_total(int pair_idx, int slice, HoCounter c) const;  // both directions
  long slice_total(int slice, HoCounter c) const;               // over all boundaries

  const BoundarySet& boundaries() const { return boundaries_; }
  int n_slices() const { return n_slices_; }

  /// Attempts minus resolved outcomes; zero whenever no handover is mid-execution.
  long unresolved(int slice) const;

 private:
  BoundarySet boundaries_;
  int n_slices_ = 0;
  std::vector<std::array<long, kHoCounterCount>> counts_;
  int slot(int n, int m, int slice) const;
};

/// True iff the target beat the serving cell by more than margin_db on every
/// sample of the trailing window of length ttt_ms. Histories shorter than the
/// window cannot have held the criterion.
bool evaluate_criterion(std::span<const double> serving_rsrp,
                        std::span<const double> target_rsrp, double margin_db,
                        double ttt_ms, double sample_period_ms);

/// True iff the link stayed below q_out_db for the whole trailing window.
bool detect_rlf(std::span<const double> sinr_history, double q_out_db,
                double t_rlf_ms, double sample_period_ms);

/// TTT and RLF windows round to the nearest whole number of samples, at
/// least one.
int window_samples(double duration_ms, double sample_period_ms);

struct HoClassifierConfig {
  double t_crit_s = 1.0;  // window after completion in which an RLF is blamed on the HO
  double t_pp_s = 2.0;    // window in which a reverse trigger marks a ping-pong
};

/// Per-user classification state machine. Feed events in time order; counter
/// increments implement the rule table:
///   - trigger counts an attempt immediately;
///   - RLF while an attempt is executing makes it a too-late failure;
///   - RLF within t_crit of a completed handover reclassifies it as too-early
///     (re-established to the source) or wrong-cell (a third cell);
///   - RLF with no recent completion charges a too-late failure, with its
///     implied attempt, to (serving at failure, re-establishment cell);
///   - a reverse trigger within t_pp of a completion marks one ping-pong while
///     both handovers stay successful.
class UserHoTracker {
 public:
  UserHoTracker() = default;
  UserHoTracker(int slice, HoClassifierConfig cfg) : slice_(slice), cfg_(cfg) {}

  void on_trigger(double t, int from, int to, HoCounterBook& book);
  void on_complete(double t, int from, int to, HoCounterBook& book);
  void on_rlf(double t, int serving, HoCounterBook& book);
  void on_reestablish(double t, int cell, HoCounterBook& book);

  bool executing() const { return executing_.has_value(); }
  void abort_execution() { executing_.reset(); }

 private:
  int slice_ = 0;
  HoClassifierConfig cfg_;

  struct Completed {
    int from = -1;
    int to = -1;
    double t = 0.0;
    bool pp_marked = false;
  };
  struct Executing {
    int from = -1;
    int to = -1;
  };
  struct PendingRlf {
    double t = 0.0;
    int serving = -1;
    std::optional<Completed> recent;
  };
  std::optional<Completed> last_completed_;
  std::optional<Executing> executing_;
  std::optional<PendingRlf> pending_rlf_;
};

}  // namespace samro
