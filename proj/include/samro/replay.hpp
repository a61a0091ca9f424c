#pragma once

#include <string>
#include <vector>

#include "samro/ho.hpp"
#include "samro/types.hpp"

namespace samro {

/// One off-policy sample. Actions are stored in proto (continuous, physical
/// unit) form; rewards are the raw scaled environment rewards, never the
/// regularized ones.
struct TransitionRecord {
  Vec state;
  Vec action;
  Vec next_state;
  double reward = 0.0;
};

/// Fixed-capacity ring buffer for online experience.
class RingBuffer {
 public:
  explicit RingBuffer(size_t capacity) : capacity_(capacity) {}

  void push(TransitionRecord record);
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const TransitionRecord& operator[](size_t i) const { return records_[i]; }

 private:
  size_t capacity_ = 0;
  size_t next_ = 0;
  std::vector<TransitionRecord> records_;
};

/// Offline and online buffers with the mixed sampling rule: one Bernoulli
/// draw per minibatch picks the source buffer, records are then drawn
/// uniformly with replacement. An empty online buffer falls back to the
/// offline one.
struct ReplayBuffers {
  std::vector<TransitionRecord> offline;
  RingBuffer online{0};
  double beta = 0.2;
};

std::vector<const TransitionRecord*> mixed_sample(const ReplayBuffers& buffers, int m,
                                                  Rng& rng);

/// CSV dataset files: full-precision doubles, one record per row, header
/// naming every column in the canonical layout.
std::vector<std::string> state_column_names(int n_cells, int n_slices,
                                            const BoundarySet& boundaries);
std::vector<std::string> action_column_names(int n_slices, const BoundarySet& boundaries);

void save_dataset(const std::string& path, const std::vector<TransitionRecord>& records,
                  int n_cells, int n_slices, const BoundarySet& boundaries);
std::vector<TransitionRecord> load_dataset(const std::string& path, int state_dim,
                                           int action_dim);

}  // namespace samro
