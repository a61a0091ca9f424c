#include "samro/replay.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace samro {

void RingBuffer::push(TransitionRecord record) {
  if (capacity_ == 0) throw std::logic_error("ring buffer has zero capacity");
  if (records_.size() < capacity_) {
    records_.push_back(std::move(record));
  } else {
    records_[next_] = std::move(record);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const TransitionRecord*> mixed_sample(const ReplayBuffers& buffers, int m,
                                                  Rng& rng) {
  if (buffers.offline.empty() && buffers.online.empty()) {
    throw std::runtime_error("mixed_sample: both replay buffers are empty");
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const bool use_online = !buffers.online.empty() &&
                          (buffers.offline.empty() || unif(rng) < buffers.beta);
  std::vector<const TransitionRecord*> batch;
  batch.reserve(m);
  if (use_online) {
    std::uniform_int_distribution<size_t> pick(0, buffers.online.size() - 1);
    for (int i = 0; i < m; ++i) batch.push_back(&buffers.online[pick(rng)]);
  } else {
    std::uniform_int_distribution<size_t> pick(0, buffers.offline.size() - 1);
    for (int i = 0; i < m; ++i) batch.push_back(&buffers.offline[pick(rng)]);
  }
  return batch;
}

std::vector<std::string> state_column_names(int n_cells, int n_slices,
                                            const BoundarySet& boundaries) {
  std::vector<std::string> names;
  for (int c = 0; c < n_cells; ++c) {
    for (int s = 0; s < n_slices; ++s) {
      const std::string suffix = "_n" + std::to_string(c) + "_s" + std::to_string(s);
      names.push_back("load" + suffix);
      names.push_back("users" + suffix);
      names.push_back("tsl_sum" + suffix);
      names.push_back("lsl_sum" + suffix);
    }
  }
  for (const auto& [n, m] : boundaries.pairs) {
    for (int s = 0; s < n_slices; ++s) {
      const std::string suffix =
          "_p" + std::to_string(n) + "-" + std::to_string(m) + "_s" + std::to_string(s);
      names.push_back("hoa" + suffix);
      names.push_back("hos" + suffix);
      names.push_back("hol" + suffix);
      names.push_back("hopp" + suffix);
    }
  }
  return names;
}

std::vector<std::string> action_column_names(int n_slices, const BoundarySet& boundaries) {
  std::vector<std::string> names;
  for (const auto& [n, m] : boundaries.directional) {
    for (int s = 0; s < n_slices; ++s) {
      const std::string suffix =
          "_b" + std::to_string(n) + "-" + std::to_string(m) + "_s" + std::to_string(s);
      names.push_back("margin" + suffix);
      names.push_back("ttt" + suffix);
    }
  }
  return names;
}

void save_dataset(const std::string& path, const std::vector<TransitionRecord>& records,
                  int n_cells, int n_slices, const BoundarySet& boundaries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open dataset for writing: " + path);
  const auto state_names = state_column_names(n_cells, n_slices, boundaries);
  const auto action_names = action_column_names(n_slices, boundaries);
  bool first = true;
  auto emit = [&](const std::string& name) {
    if (!first) out << ',';
    out << name;
    first = false;
  };
  for (const auto& n : state_names) emit(n);
  for (const auto& n : action_names) emit(n);
  for (const auto& n : state_names) emit("next_" + n);
  emit("reward");
  out << '\n';

  char buf[32];
  auto write_value = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << sep;
  };
  for (const auto& rec : records) {
    for (int i = 0; i < rec.state.size(); ++i) write_value(rec.state(i), ',');
    for (int i = 0; i < rec.action.size(); ++i) write_value(rec.action(i), ',');
    for (int i = 0; i < rec.next_state.size(); ++i) write_value(rec.next_state(i), ',');
    std::snprintf(buf, sizeof(buf), "%.17g", rec.reward);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("dataset write failed: " + path);
}

std::vector<TransitionRecord> load_dataset(const std::string& path, int state_dim,
                                           int action_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
  const int expected = 2 * state_dim + action_dim + 1;
  std::vector<TransitionRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TransitionRecord rec;
    rec.state.resize(state_dim);
    rec.action.resize(action_dim);
    rec.next_state.resize(state_dim);
    std::istringstream ls(line);
    std::string cell;
    int col = 0;
    while (std::getline(ls, cell, ',')) {
      const double v = std::stod(cell);
      if (col < state_dim) {
        rec.state(col) = v;
      } else if (col < state_dim + action_dim) {
        rec.action(col - state_dim) = v;
      } else if (col < 2 * state_dim + action_dim) {
        rec.next_state(col - state_dim - action_dim) = v;
      } else {
        rec.reward = v;
      }
      ++col;
    }
    if (col != expected) {
      throw std::runtime_error("dataset row has wrong column count in " + path);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace samro
