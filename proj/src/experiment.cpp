#include "samro/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "samro/keyvalues.hpp"

namespace samro {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// The desk preset shrinks every budget so a full paired comparison runs in
// minutes while keeping the method intact.
void apply_desk_sizes(PipelineConfig& p) {
  p.offline_samples = 500;
  p.energy_pretrain_batches = 1500;
  p.online_steps = 300;
  p.test_steps = 100;
}

}  // namespace

void ExperimentConfig::apply_preset_sizes(const std::string& name) {
  if (name == "desk") {
    scenario = ScenarioConfig::desk();
    apply_desk_sizes(pipeline);
  } else if (name == "paper") {
    scenario = ScenarioConfig::standard();
    pipeline = PipelineConfig{};
  } else {
    throw std::invalid_argument("unknown preset: " + name + " (expected desk or paper)");
  }
  preset = name;
}

ExperimentConfig ExperimentConfig::make_preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.apply_preset_sizes(name);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  KeyValues kv = KeyValues::from_file(path);
  ExperimentConfig cfg;
  cfg.apply_preset_sizes(kv.get_string("preset", "desk"));
  cfg.scenario = apply_scenario_keys(kv, cfg.scenario);

  cfg.seed = static_cast<std::uint64_t>(kv.get_long("seed", static_cast<long>(cfg.seed)));
  cfg.td3.gamma = kv.get_double("gamma", cfg.td3.gamma);
  cfg.td3.tau = kv.get_double("tau", cfg.td3.tau);
  cfg.td3.lr_actor = kv.get_double("lr_actor", cfg.td3.lr_actor);
  cfg.td3.lr_critic = kv.get_double("lr_critic", cfg.td3.lr_critic);
  cfg.td3.batch_size = static_cast<int>(kv.get_long("batch_size", cfg.td3.batch_size));
  cfg.td3.target_noise = kv.get_double("target_noise", cfg.td3.target_noise);
  cfg.td3.target_noise_clip = kv.get_double("target_noise_clip", cfg.td3.target_noise_clip);
  cfg.td3.explore_noise = kv.get_double("explore_noise", cfg.td3.explore_noise);
  cfg.td3.actor_period = static_cast<int>(kv.get_long("actor_period", cfg.td3.actor_period));
  cfg.td3.grad_clip = kv.get_double("grad_clip", cfg.td3.grad_clip);

  cfg.energy.noise_scale = kv.get_double("energy_noise_scale", cfg.energy.noise_scale);
  cfg.energy.batch_size = static_cast<int>(kv.get_long("energy_batch_size", cfg.energy.batch_size));
  cfg.energy.lr = kv.get_double("energy_lr", cfg.energy.lr);
  cfg.energy.input_scale = kv.get_double("energy_input_scale", cfg.energy.input_scale);
  cfg.energy.state_weight = kv.get_double("energy_state_weight", cfg.energy.state_weight);

  cfg.pipeline.offline_samples =
      static_cast<int>(kv.get_long("offline_samples", cfg.pipeline.offline_samples));
  cfg.pipeline.collect_margin_std_db =
      kv.get_double("collect_margin_std_db", cfg.pipeline.collect_margin_std_db);
  cfg.pipeline.collect_ttt_std_ms =
      kv.get_double("collect_ttt_std_ms", cfg.pipeline.collect_ttt_std_ms);
  cfg.pipeline.augment_k = static_cast<int>(kv.get_long("augment_k", cfg.pipeline.augment_k));
  cfg.pipeline.projection_k =
      static_cast<int>(kv.get_long("projection_k", cfg.pipeline.projection_k));
  cfg.pipeline.offline_epochs =
      static_cast<int>(kv.get_long("offline_epochs", cfg.pipeline.offline_epochs));
  cfg.pipeline.energy_pretrain_batches = static_cast<int>(
      kv.get_long("energy_pretrain_batches", cfg.pipeline.energy_pretrain_batches));
  cfg.pipeline.critic_warmup_batches = static_cast<int>(
      kv.get_long("critic_warmup_batches", cfg.pipeline.critic_warmup_batches));
  cfg.pipeline.actor_start_batch = static_cast<int>(
      kv.get_long("actor_start_batch", cfg.pipeline.actor_start_batch));
  cfg.pipeline.alpha = kv.get_double("alpha", cfg.pipeline.alpha);
  const std::string norm_name = kv.get_string(
      "energy_norm", cfg.pipeline.energy_norm == EnergyNorm::Center       ? "center"
                     : cfg.pipeline.energy_norm == EnergyNorm::Standardize ? "standardize"
                                                                           : "raw");
  if (norm_name == "center") cfg.pipeline.energy_norm = EnergyNorm::Center;
  else if (norm_name == "standardize") cfg.pipeline.energy_norm = EnergyNorm::Standardize;
  else if (norm_name == "raw") cfg.pipeline.energy_norm = EnergyNorm::Raw;
  else throw std::runtime_error("energy_norm must be center, standardize or raw");
  cfg.pipeline.online_steps =
      static_cast<int>(kv.get_long("online_steps", cfg.pipeline.online_steps));
  cfg.pipeline.test_steps = static_cast<int>(kv.get_long("test_steps", cfg.pipeline.test_steps));
  cfg.pipeline.online_capacity = static_cast<size_t>(
      kv.get_long("online_capacity", static_cast<long>(cfg.pipeline.online_capacity)));
  cfg.pipeline.energy_period =
      static_cast<int>(kv.get_long("energy_period", cfg.pipeline.energy_period));
  cfg.pipeline.energy_refresh_batches = static_cast<int>(
      kv.get_long("energy_refresh_batches", cfg.pipeline.energy_refresh_batches));
  cfg.pipeline.beta.beta0 = kv.get_double("beta0", cfg.pipeline.beta.beta0);
  cfg.pipeline.beta.delta = kv.get_double("beta_delta", cfg.pipeline.beta.delta);
  cfg.pipeline.beta.beta_max = kv.get_double("beta_max", cfg.pipeline.beta.beta_max);

  kv.check_all_consumed();
  return cfg;
}

double RunReport::mean_test_reward() const {
  if (test_reward.empty()) return 0.0;
  double s = 0.0;
  for (double r : test_reward) s += r;
  return s / static_cast<double>(test_reward.size());
}

std::vector<double> RunReport::metric_trace(int slice, const std::string& metric) const {
  std::vector<double> out;
  out.reserve(test_metrics.size());
  for (const auto& step : test_metrics) {
    const SliceMetrics& m = step.at(slice);
    if (metric == "hfr") out.push_back(m.hfr);
    else if (metric == "ppr") out.push_back(m.ppr);
    else if (metric == "tsl") out.push_back(m.tsl);
    else if (metric == "lsl") out.push_back(m.lsl);
    else throw std::invalid_argument("unknown metric: " + metric);
  }
  return out;
}

std::uint64_t stage_seed(std::uint64_t seed, int stage) {
  // splitmix64 of (seed, stage)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stage + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng stage_rng(std::uint64_t seed, int stage) { return Rng(stage_seed(seed, stage)); }

namespace {

constexpr int kStageCollectWorld = 0;
constexpr int kStageCollectDraws = 1;
constexpr int kStageAugment = 2;
constexpr int kStageAgentInit = 3;
constexpr int kStageEnergyInit = 4;
constexpr int kStageOfflineTrain = 5;
constexpr int kStageOnlineWorld = 6;
constexpr int kStageFinetune = 7;
constexpr int kStageEvaluate = 8;

void evaluate_policy(Env& env, const Td3Agent* agent, const Vec* fixed_action, int steps,
                     int projection_k, Rng& rng, RunReport& report) {
  for (int t = 0; t < steps; ++t) {
    Vec operating;
    if (agent) {
      const Vec raw_state = env.current_state();
      const Vec proto_norm = agent->policy(env.scale_state(raw_state));
      const Vec proto = denormalize_action(proto_norm, env.grid());
      operating = project_action(proto, projection_k, env.grid(),
                                 make_q_evaluator(*agent, env, raw_state), rng);
    } else {
      operating = *fixed_action;
    }
    const Env::StepOutcome outcome = env.step(operating);
    report.test_reward.push_back(outcome.reward);
    report.test_metrics.push_back(outcome.slice_metrics);
  }
}

RunReport run_pipeline(const ExperimentConfig& cfg, bool slice_aware,
                       const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.variant = slice_aware ? "samro" : "mro";

  // Offline collection on its own world.
  ScenarioConfig collect_scenario = cfg.scenario;
  collect_scenario.rng_seed = stage_seed(cfg.seed, kStageCollectWorld);
  Env collect_env(collect_scenario, slice_aware);
  Rng collect_rng = stage_rng(cfg.seed, kStageCollectDraws);
  const std::vector<TransitionRecord> dataset =
      collect_offline(collect_env, cfg.pipeline.offline_samples, cfg.pipeline, collect_rng);
  if (!out_dir.empty()) {
    save_dataset(out_dir + "/dataset.csv", dataset, collect_env.world().n_cells_count(),
                 slice_aware ? cfg.scenario.n_slices : 1,
                 collect_env.world().boundaries());
  }

  Rng augment_rng = stage_rng(cfg.seed, kStageAugment);
  const std::vector<TransitionRecord> augmented =
      augment_dataset(dataset, cfg.pipeline.augment_k, collect_env.grid(), augment_rng);

  Rng agent_rng = stage_rng(cfg.seed, kStageAgentInit);
  Td3Agent agent =
      Td3Agent::make(collect_env.state_dim(), collect_env.action_dim(), cfg.td3, agent_rng);
  // Start the policy at the default operating parameters: the network is in
  // that configuration when training begins, and it is where the data sits.
  agent.set_initial_policy(
      normalize_action(default_action(collect_env.grid()), collect_env.grid()));
  Rng energy_rng = stage_rng(cfg.seed, kStageEnergyInit);
  EnergyModel energy = EnergyModel::make(collect_env.state_dim() + collect_env.action_dim(),
                                         cfg.energy, energy_rng);
  EnergyStandardizer standardizer;

  Rng offline_rng = stage_rng(cfg.seed, kStageOfflineTrain);
  const OfflineTrainStats offline_stats =
      train_offline(agent, energy, augmented, collect_env, cfg.pipeline, offline_rng,
                    &standardizer);
  report.offline_critic_loss = offline_stats.critic_loss;
  report.offline_mean_q = offline_stats.mean_q;

  // Online fine-tuning on a fresh world, evaluation continues the same world.
  ScenarioConfig online_scenario = cfg.scenario;
  online_scenario.rng_seed = stage_seed(cfg.seed, kStageOnlineWorld);
  Env online_env(online_scenario, slice_aware);
  ReplayBuffers buffers;
  buffers.offline = augmented;
  buffers.online = RingBuffer(cfg.pipeline.online_capacity);
  Rng finetune_rng = stage_rng(cfg.seed, kStageFinetune);
  const FinetuneLog log = finetune_online(online_env, agent, energy, buffers, cfg.pipeline,
                                          finetune_rng, &standardizer);
  report.train_reward = log.reward;
  report.beta_trace = log.beta;
  report.actor_updates = log.actor_updates;
  report.energy_refreshes = log.energy_refreshes;

  Rng eval_rng = stage_rng(cfg.seed, kStageEvaluate);
  evaluate_policy(online_env, &agent, nullptr, cfg.pipeline.test_steps,
                  cfg.pipeline.projection_k, eval_rng, report);
  report.env_interactions = collect_env.interactions() + online_env.interactions();

  if (!out_dir.empty()) {
    agent.save(out_dir + "/checkpoint");
    energy.save(out_dir + "/checkpoint/energy.mlp");
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace

RunReport run_baseline_default(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.variant = "default";
  ScenarioConfig scenario = cfg.scenario;
  scenario.rng_seed = stage_seed(cfg.seed, kStageOnlineWorld);
  Env env(scenario, true);
  const Vec fixed = default_action(env.grid());
  for (int t = 0; t < cfg.pipeline.online_steps; ++t) {
    report.train_reward.push_back(env.step(fixed).reward);
  }
  Rng eval_rng = stage_rng(cfg.seed, kStageEvaluate);
  evaluate_policy(env, nullptr, &fixed, cfg.pipeline.test_steps, cfg.pipeline.projection_k,
                  eval_rng, report);
  report.env_interactions = env.interactions();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

RunReport run_baseline_mro(const ExperimentConfig& cfg) { return run_pipeline(cfg, false, ""); }

RunReport run_samro(const ExperimentConfig& cfg) { return run_pipeline(cfg, true, ""); }

RunReport run_variant(const ExperimentConfig& cfg, const std::string& variant,
                      const std::string& out_dir) {
  if (!out_dir.empty()) fs::create_directories(out_dir);
  RunReport report;
  if (variant == "samro") {
    report = out_dir.empty() ? run_samro(cfg) : run_pipeline(cfg, true, out_dir);
  } else if (variant == "mro") {
    report = out_dir.empty() ? run_baseline_mro(cfg) : run_pipeline(cfg, false, out_dir);
  } else if (variant == "default") {
    report = run_baseline_default(cfg);
  } else {
    throw std::invalid_argument("unknown variant: " + variant);
  }
  if (!out_dir.empty()) {
    write_report_files(report, cfg, out_dir);
    export_cdfs(report, out_dir);
  }
  return report;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empirical_cdf: no observations");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(values.size());
  const double n = static_cast<double>(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    cdf.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  return cdf;
}

void write_report_files(const RunReport& report, const ExperimentConfig& cfg,
                        const std::string& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/report.txt");
    out << "variant = " << report.variant << "\n";
    out << "preset = " << cfg.preset << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "gamma = " << fmt(cfg.td3.gamma) << "\n";
    out << "tau = " << fmt(cfg.td3.tau) << "\n";
    out << "lr_actor = " << fmt(cfg.td3.lr_actor) << "\n";
    out << "lr_critic = " << fmt(cfg.td3.lr_critic) << "\n";
    out << "batch_size = " << cfg.td3.batch_size << "\n";
    out << "actor_period = " << cfg.td3.actor_period << "\n";
    out << "alpha = " << fmt(cfg.pipeline.alpha) << "\n";
    out << "augment_k = " << cfg.pipeline.augment_k << "\n";
    out << "projection_k = " << cfg.pipeline.projection_k << "\n";
    out << "offline_samples = " << cfg.pipeline.offline_samples << "\n";
    out << "online_steps = " << cfg.pipeline.online_steps << "\n";
    out << "test_steps = " << cfg.pipeline.test_steps << "\n";
    out << "energy_period = " << cfg.pipeline.energy_period << "\n";
    out << "mean_test_reward = " << fmt(report.mean_test_reward()) << "\n";
    out << "actor_updates = " << report.actor_updates << "\n";
    out << "energy_refreshes = " << report.energy_refreshes << "\n";
    out << "env_interactions = " << report.env_interactions << "\n";
    // The boundary list documents the action/state layout of this scenario.
    World world(cfg.scenario);
    out << "boundaries = " << world.boundaries().size() << "\n";
    for (const auto& [n, m] : world.boundaries().directional) {
      out << "boundary = " << n << " " << m << "\n";
    }
  }
  {
    std::ofstream out(out_dir + "/finetune_trace.csv");
    out << "step,reward,beta\n";
    for (size_t i = 0; i < report.train_reward.size(); ++i) {
      out << (i + 1) << ',' << fmt(report.train_reward[i]) << ','
          << (i < report.beta_trace.size() ? fmt(report.beta_trace[i]) : "") << '\n';
    }
  }
  if (!report.offline_critic_loss.empty()) {
    std::ofstream out(out_dir + "/offline_trace.csv");
    out << "minibatch,critic_loss\n";
    for (size_t i = 0; i < report.offline_critic_loss.size(); ++i) {
      out << (i + 1) << ',' << fmt(report.offline_critic_loss[i]) << '\n';
    }
    std::ofstream aout(out_dir + "/offline_actor_trace.csv");
    aout << "update,mean_q\n";
    for (size_t i = 0; i < report.offline_mean_q.size(); ++i) {
      aout << (i + 1) << ',' << fmt(report.offline_mean_q[i]) << '\n';
    }
  }
  {
    std::ofstream out(out_dir + "/test_trace.csv");
    out << "step,reward";
    const int n_slices =
        report.test_metrics.empty() ? 0 : static_cast<int>(report.test_metrics[0].size());
    for (int s = 0; s < n_slices; ++s) {
      out << ",hfr_s" << s << ",ppr_s" << s << ",tsl_s" << s << ",lsl_s" << s;
    }
    out << '\n';
    for (size_t i = 0; i < report.test_reward.size(); ++i) {
      out << (i + 1) << ',' << fmt(report.test_reward[i]);
      for (int s = 0; s < n_slices; ++s) {
        const SliceMetrics& m = report.test_metrics[i][s];
        out << ',' << fmt(m.hfr) << ',' << fmt(m.ppr) << ',' << fmt(m.tsl) << ','
            << fmt(m.lsl);
      }
      out << '\n';
    }
  }
}

void export_cdfs(const RunReport& report, const std::string& out_dir) {
  if (report.test_metrics.empty()) {
    throw std::runtime_error("export_cdfs: the report has no test steps");
  }
  fs::create_directories(out_dir);
  const int n_slices = static_cast<int>(report.test_metrics[0].size());
  for (const std::string metric : {"hfr", "ppr", "tsl", "lsl"}) {
    for (int s = 0; s < n_slices; ++s) {
      const auto cdf = empirical_cdf(report.metric_trace(s, metric));
      std::ofstream out(out_dir + "/cdf_" + metric + "_slice" + std::to_string(s) + ".csv");
      out << "value,cum_fraction\n";
      for (const auto& [v, f] : cdf) out << fmt(v) << ',' << fmt(f) << '\n';
    }
  }
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                            const std::vector<std::string>& variants,
                            const std::string& out_dir) {
  std::vector<SweepRow> rows;
  for (std::uint64_t seed : seeds) {
    for (const std::string& variant : variants) {
      ExperimentConfig cfg = base;
      cfg.seed = seed;
      const std::string dir =
          out_dir.empty() ? "" : out_dir + "/seed" + std::to_string(seed) + "/" + variant;
      const RunReport report = run_variant(cfg, variant, dir);
      SweepRow row;
      row.seed = seed;
      row.variant = variant;
      row.mean_test_reward = report.mean_test_reward();
      const int n_slices =
          report.test_metrics.empty() ? 0 : static_cast<int>(report.test_metrics[0].size());
      row.mean_metrics.resize(n_slices);
      for (const auto& step : report.test_metrics) {
        for (int s = 0; s < n_slices; ++s) {
          row.mean_metrics[s].hfr += step[s].hfr;
          row.mean_metrics[s].ppr += step[s].ppr;
          row.mean_metrics[s].tsl += step[s].tsl;
          row.mean_metrics[s].lsl += step[s].lsl;
        }
      }
      const double n = std::max<size_t>(report.test_metrics.size(), 1);
      for (auto& m : row.mean_metrics) {
        m.hfr /= n;
        m.ppr /= n;
        m.tsl /= n;
        m.lsl /= n;
      }
      rows.push_back(std::move(row));
    }
  }
  if (!out_dir.empty()) write_sweep_summary(rows, out_dir + "/summary.csv");
  return rows;
}

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open sweep summary: " + path);
  int n_slices = 0;
  for (const auto& row : rows) {
    n_slices = std::max(n_slices, static_cast<int>(row.mean_metrics.size()));
  }
  out << "seed,variant,mean_test_reward";
  for (int s = 0; s < n_slices; ++s) {
    out << ",hfr_s" << s << ",ppr_s" << s << ",tsl_s" << s << ",lsl_s" << s;
  }
  out << '\n';
  for (const auto& row : rows) {
    out << row.seed << ',' << row.variant << ',' << fmt(row.mean_test_reward);
    for (int s = 0; s < n_slices; ++s) {
      if (s < static_cast<int>(row.mean_metrics.size())) {
        const auto& m = row.mean_metrics[s];
        out << ',' << fmt(m.hfr) << ',' << fmt(m.ppr) << ',' << fmt(m.tsl) << ',' << fmt(m.lsl);
      } else {
        out << ",,,,";
      }
    }
    out << '\n';
  }
}

}  // namespace samro
