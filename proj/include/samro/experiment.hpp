#pragma once

#include <string>
#include <vector>

#include "samro/energy.hpp"
#include "samro/pipeline.hpp"
#include "samro/scenario.hpp"
#include "samro/td3.hpp"

namespace samro {

struct ExperimentConfig {
  ScenarioConfig scenario;
  Td3Config td3;
  EnergyConfig energy;
  PipelineConfig pipeline;
  std::uint64_t seed = 1;
  std::string preset = "desk";

  /// `desk` finishes a full pipeline in well under a minute; `paper` uses the
  /// full-scale step length, dataset size and training budget.
  static ExperimentConfig make_preset(const std::string& name);
  /// Scenario and experiment keys share one plain-text file.
  static ExperimentConfig from_file(const std::string& path);
  void apply_preset_sizes(const std::string& name);
};

struct RunReport {
  std::string variant;  // samro | mro | default
  std::vector<double> train_reward;
  std::vector<double> beta_trace;
  std::vector<double> test_reward;
  // Per test step, per (true) slice.
  std::vector<std::vector<SliceMetrics>> test_metrics;
  std::vector<double> offline_critic_loss;
  std::vector<double> offline_mean_q;
  long actor_updates = 0;
  long energy_refreshes = 0;
  long env_interactions = 0;
  double wall_seconds = 0.0;

  double mean_test_reward() const;
  std::vector<double> metric_trace(int slice, const std::string& metric) const;
};

/// Stable sub-streams for one experiment seed.
Rng stage_rng(std::uint64_t seed, int stage);
std::uint64_t stage_seed(std::uint64_t seed, int stage);

/// Fixed default parameters applied for the whole run; no learning.
RunReport run_baseline_default(const ExperimentConfig& cfg);
/// The full transfer pipeline without slice awareness.
RunReport run_baseline_mro(const ExperimentConfig& cfg);
/// The full slice-aware transfer pipeline.
RunReport run_samro(const ExperimentConfig& cfg);

/// Runs one variant by name and, when out_dir is non-empty, writes every
/// artifact (report, traces, CDFs, dataset, checkpoints) under it.
RunReport run_variant(const ExperimentConfig& cfg, const std::string& variant,
                      const std::string& out_dir);

/// Empirical CDF: sorted values with cumulative fractions ending at 1.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values);

void write_report_files(const RunReport& report, const ExperimentConfig& cfg,
                        const std::string& out_dir);
void export_cdfs(const RunReport& report, const std::string& out_dir);

struct SweepRow {
  std::uint64_t seed = 0;
  std::string variant;
  double mean_test_reward = 0.0;
  std::vector<SliceMetrics> mean_metrics;  // per slice, averaged over test steps
};

std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                            const std::vector<std::string>& variants,
                            const std::string& out_dir);
void write_sweep_summary(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace samro
