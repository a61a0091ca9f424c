#include "samro/ho.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace samro {

BoundarySet BoundarySet::from_neighbor_lists(const std::vector<std::vector<int>>& neighbors) {
  BoundarySet set;
  const int n_cells = static_cast<int>(neighbors.size());
  set.neighbor_lists_.assign(n_cells, {});
  for (int n = 0; n < n_cells; ++n) {
    for (int m : neighbors[n]) {
      if (m < 0 || m >= n_cells || m == n) {
        throw std::invalid_argument("invalid neighbor list entry");
      }
      set.neighbor_lists_[n].push_back(m);
    }
    std::sort(set.neighbor_lists_[n].begin(), set.neighbor_lists_[n].end());
    set.neighbor_lists_[n].erase(
        std::unique(set.neighbor_lists_[n].begin(), set.neighbor_lists_[n].end()),
        set.neighbor_lists_[n].end());
  }
  // Symmetrize: (n, m) implies (m, n).
  for (int n = 0; n < n_cells; ++n) {
    for (int m : set.neighbor_lists_[n]) {
      auto& back = set.neighbor_lists_[m];
      if (!std::binary_search(back.begin(), back.end(), n)) {
        back.insert(std::lower_bound(back.begin(), back.end(), n), n);
      }
    }
  }
  for (int n = 0; n < n_cells; ++n) {
    for (int m : set.neighbor_lists_[n]) {
      set.directional.emplace_back(n, m);
      if (n < m) set.pairs.emplace_back(n, m);
    }
  }
  set.dir_index_.assign(n_cells, std::vector<int>(n_cells, -1));
  set.pair_index_.assign(n_cells, std::vector<int>(n_cells, -1));
  for (int i = 0; i < set.size(); ++i) {
    set.dir_index_[set.directional[i].first][set.directional[i].second] = i;
  }
  for (int i = 0; i < set.pair_count(); ++i) {
    set.pair_index_[set.pairs[i].first][set.pairs[i].second] = i;
  }
  return set;
}

int BoundarySet::index_of(int n, int m) const {
  if (n < 0 || m < 0 || n >= static_cast<int>(dir_index_.size()) ||
      m >= static_cast<int>(dir_index_.size())) {
    return -1;
  }
  return dir_index_[n][m];
}

int BoundarySet::pair_index_of(int n, int m) const {
  const int a = std::min(n, m), b = std::max(n, m);
  if (a < 0 || b >= static_cast<int>(pair_index_.size())) return -1;
  return pair_index_[a][b];
}

const std::vector<int>& BoundarySet::neighbors_of(int n) const {
  return neighbor_lists_.at(n);
}

HoCounterBook::HoCounterBook(const BoundarySet& boundaries, int n_slices)
    : boundaries_(boundaries), n_slices_(n_slices) {
  if (n_slices <= 0) throw std::invalid_argument("counter book needs n_slices >= 1");
  counts_.assign(static_cast<size_t>(boundaries_.size()) * n_slices_, {});
}

void HoCounterBook::reset() {
  for (auto& c : counts_) c.fill(0);
}

int HoCounterBook::slot(int n, int m, int slice) const {
  const int b = boundaries_.index_of(n, m);
  if (b < 0) {
    throw std::out_of_range("handover charged to a non-boundary cell pair");
  }
  if (slice < 0 || slice >= n_slices_) throw std::out_of_range("bad slice index");
  return b * n_slices_ + slice;
}

void HoCounterBook::add(int n, int m, int slice, HoCounter c, long delta) {
  counts_[slot(n, m, slice)][static_cast<int>(c)] += delta;
}

long HoCounterBook::get(int n, int m, int slice, HoCounter c) const {
  return counts_[slot(n, m, slice)][static_cast<int>(c)];
}

long HoCounterBook::pair_total(int pair_idx, int slice, HoCounter c) const {
  const auto [n, m] = boundaries_.pairs.at(pair_idx);
  return get(n, m, slice, c) + get(m, n, slice, c);
}

long HoCounterBook::slice_total(int slice, HoCounter c) const {
  long total = 0;
  for (const auto& [n, m] : boundaries_.directional) total += get(n, m, slice, c);
  return total;
}

long HoCounterBook::unresolved(int slice) const {
  return slice_total(slice, HoCounter::Attempt) - slice_total(slice, HoCounter::Success) -
         slice_total(slice, HoCounter::TooLate) - slice_total(slice, HoCounter::TooEarly) -
         slice_total(slice, HoCounter::WrongCell);
}

int window_samples(double duration_ms, double sample_period_ms) {
  if (sample_period_ms <= 0.0) throw std::invalid_argument("sample period must be positive");
  return std::max(1, static_cast<int>(std::lround(duration_ms / sample_period_ms)));
}

bool evaluate_criterion(std::span<const double> serving_rsrp,
                        std::span<const double> target_rsrp, double margin_db,
                        double ttt_ms, double sample_period_ms) {
  if (serving_rsrp.size() != target_rsrp.size()) {
    throw std::invalid_argument("criterion histories must be aligned");
  }
  const int need = window_samples(ttt_ms, sample_period_ms);
  const int have = static_cast<int>(serving_rsrp.size());
  if (have < need) return false;
  for (int i = have - need; i < have; ++i) {
    if (!(target_rsrp[i] > serving_rsrp[i] + margin_db)) return false;
  }
  return true;
}

bool detect_rlf(std::span<const double> sinr_history, double q_out_db,
                double t_rlf_ms, double sample_period_ms) {
  const int need = window_samples(t_rlf_ms, sample_period_ms);
  const int have = static_cast<int>(sinr_history.size());
  if (have < need) return false;
  for (int i = have - need; i < have; ++i) {
    if (sinr_history[i] >= q_out_db) return false;
  }
  return true;
}

void UserHoTracker::on_trigger(double t, int from, int to, HoCounterBook& book) {
  if (executing_) throw std::logic_error("trigger while a handover is executing");
  book.add(from, to, slice_, HoCounter::Attempt);
  if (last_completed_ && !last_completed_->pp_marked &&
      last_completed_->to == from && last_completed_->from == to &&
      t - last_completed_->t <= cfg_.t_pp_s) {
    book.add(last_completed_->from, last_completed_->to, slice_, HoCounter::PingPong);
    last_completed_->pp_marked = true;
  }
  executing_ = Executing{from, to};
}

void UserHoTracker::on_complete(double t, int from, int to, HoCounterBook& book) {
  if (!executing_ || executing_->from != from || executing_->to != to) {
    throw std::logic_error("completion without a matching executing handover");
  }
  executing_.reset();
  book.add(from, to, slice_, HoCounter::Success);
  last_completed_ = Completed{from, to, t, false};
}

void UserHoTracker::on_rlf(double t, int serving, HoCounterBook& book) {
  if (pending_rlf_) throw std::logic_error("RLF while already re-establishing");
  if (executing_) {
    // Failed before completing: a too-late handover on the attempted boundary.
    book.add(executing_->from, executing_->to, slice_, HoCounter::TooLate);
    executing_.reset();
    last_completed_.reset();
    return;
  }
  PendingRlf pending;
  pending.t = t;
  pending.serving = serving;
  if (last_completed_ && last_completed_->to == serving &&
      t - last_completed_->t <= cfg_.t_crit_s) {
    pending.recent = last_completed_;
  }
  pending_rlf_ = pending;
  last_completed_.reset();
}

void UserHoTracker::on_reestablish(double /*t*/, int cell, HoCounterBook& book) {
  if (!pending_rlf_) return;  // already classified (RLF during execution)
  const PendingRlf pending = *pending_rlf_;
  pending_rlf_.reset();
  if (pending.recent) {
    const Completed& ho = *pending.recent;
    if (cell == ho.from) {
      book.add(ho.from, ho.to, slice_, HoCounter::Success, -1);
      book.add(ho.from, ho.to, slice_, HoCounter::TooEarly);
    } else if (cell != ho.to) {
      book.add(ho.from, ho.to, slice_, HoCounter::Success, -1);
      book.add(ho.from, ho.to, slice_, HoCounter::WrongCell);
    }
    // Re-establishing back to the failed cell keeps the handover successful:
    // the outage was not a handover decision problem.
    return;
  }
  if (cell != pending.serving) {
    // Too late without any attempt on record: the missed handover is charged,
    // attempt included, to the boundary the user actually crossed.
    book.add(pending.serving, cell, slice_, HoCounter::Attempt);
    book.add(pending.serving, cell, slice_, HoCounter::TooLate);
  }
}

}  // namespace samro
