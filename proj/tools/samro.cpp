// Command-line front end: offline collection, training, fine-tuning,
// evaluation, baselines, seed sweeps and CDF export.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "samro/experiment.hpp"

namespace fs = std::filesystem;
using namespace samro;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string preset = "desk";
  long seed = -1;
  double alpha = -1.0;
  int k = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file (key = value lines)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--preset", args.preset, "desk|paper")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", args.seed, "experiment seed");
  cmd->add_option("--alpha", args.alpha, "reward regularization weight");
  cmd->add_option("--k", args.k, "neighbor count for projection and augmentation");
}

ExperimentConfig build_config(const CommonArgs& args) {
  ExperimentConfig cfg = args.config_path.empty()
                             ? ExperimentConfig::make_preset(args.preset)
                             : ExperimentConfig::from_file(args.config_path);
  if (args.config_path.empty()) cfg.preset = args.preset;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.alpha >= 0.0) cfg.pipeline.alpha = args.alpha;
  if (args.k > 0) {
    cfg.pipeline.projection_k = args.k;
    cfg.pipeline.augment_k = args.k;
  }
  return cfg;
}

int fail(const std::string& stage, const std::exception& e) {
  std::cerr << "error [" << stage << "]: " << e.what() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slice-aware handover parameter optimization laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string baseline = "samro";
  std::vector<long> sweep_seeds;
  std::string report_dir;

  CLI::App* collect = app.add_subcommand("collect", "collect a biased offline dataset");
  add_common(collect, args);

  CLI::App* train = app.add_subcommand("train-offline",
                                       "train agent and energy model on a collected dataset");
  add_common(train, args);

  CLI::App* finetune =
      app.add_subcommand("finetune", "online fine-tuning from an offline checkpoint");
  add_common(finetune, args);

  CLI::App* evaluate = app.add_subcommand("evaluate", "run the frozen policy on test steps");
  add_common(evaluate, args);

  CLI::App* baseline_cmd = app.add_subcommand("baseline", "run one variant end to end");
  add_common(baseline_cmd, args);
  baseline_cmd->add_option("--baseline", baseline, "default|mro|samro")
      ->check(CLI::IsMember({"default", "mro", "samro"}));

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run all variants over a list of seeds");
  add_common(sweep_cmd, args);
  sweep_cmd->add_option("--seeds", sweep_seeds, "seed list")->expected(-1);

  CLI::App* export_cmd = app.add_subcommand("export", "recompute CDF files from a run directory");
  add_common(export_cmd, args);
  export_cmd->add_option("--report", report_dir, "directory containing test_trace.csv")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = build_config(args);
    fs::create_directories(args.out_dir);

    if (collect->parsed()) {
      ScenarioConfig scenario = cfg.scenario;
      scenario.rng_seed = stage_seed(cfg.seed, 0);
      Env env(scenario, true);
      Rng rng = stage_rng(cfg.seed, 1);
      const auto dataset = collect_offline(env, cfg.pipeline.offline_samples, cfg.pipeline, rng);
      save_dataset(args.out_dir + "/dataset.csv", dataset, env.world().n_cells_count(),
                   cfg.scenario.n_slices, env.world().boundaries());
      std::cout << "collected " << dataset.size() << " transitions into " << args.out_dir
                << "/dataset.csv\n";
      return 0;
    }

    if (train->parsed()) {
      const std::string dataset_path = args.out_dir + "/dataset.csv";
      if (!fs::exists(dataset_path)) {
        std::cerr << "error [train-offline]: missing " << dataset_path
                  << " (run `collect` first)\n";
        return 1;
      }
      ScenarioConfig scenario = cfg.scenario;
      scenario.rng_seed = stage_seed(cfg.seed, 0);
      Env env(scenario, true);
      auto dataset = load_dataset(dataset_path, env.state_dim(), env.action_dim());
      Rng augment_rng = stage_rng(cfg.seed, 2);
      const auto augmented =
          augment_dataset(dataset, cfg.pipeline.augment_k, env.grid(), augment_rng);
      Rng agent_rng = stage_rng(cfg.seed, 3);
      Td3Agent agent = Td3Agent::make(env.state_dim(), env.action_dim(), cfg.td3, agent_rng);
      agent.set_initial_policy(normalize_action(default_action(env.grid()), env.grid()));
      Rng energy_rng = stage_rng(cfg.seed, 4);
      EnergyModel energy =
          EnergyModel::make(env.state_dim() + env.action_dim(), cfg.energy, energy_rng);
      EnergyStandardizer standardizer;
      Rng train_rng = stage_rng(cfg.seed, 5);
      const auto stats =
          train_offline(agent, energy, augmented, env, cfg.pipeline, train_rng, &standardizer);
      agent.save(args.out_dir + "/checkpoint");
      energy.save(args.out_dir + "/checkpoint/energy.mlp");
      std::cout << "offline training done: " << stats.minibatches << " minibatches, "
                << stats.actor_loss.size() << " actor updates\n";
      return 0;
    }

    if (finetune->parsed() || evaluate->parsed()) {
      const std::string stage = finetune->parsed() ? "finetune" : "evaluate";
      const std::string checkpoint = args.out_dir + "/checkpoint";
      if (!fs::exists(checkpoint + "/actor.mlp")) {
        std::cerr << "error [" << stage << "]: missing checkpoint under " << checkpoint
                  << " (run `train-offline` first)\n";
        return 1;
      }
      ScenarioConfig scenario = cfg.scenario;
      scenario.rng_seed = stage_seed(cfg.seed, 6);
      Env env(scenario, true);
      Td3Agent agent = Td3Agent::load(checkpoint);
      agent.cfg = cfg.td3;
      RunReport report;
      report.variant = "samro";
      if (finetune->parsed()) {
        const std::string dataset_path = args.out_dir + "/dataset.csv";
        if (!fs::exists(dataset_path)) {
          std::cerr << "error [finetune]: missing " << dataset_path << " (run `collect` first)\n";
          return 1;
        }
        EnergyModel energy = EnergyModel::load(checkpoint + "/energy.mlp", cfg.energy);
        auto dataset = load_dataset(dataset_path, env.state_dim(), env.action_dim());
        Rng augment_rng = stage_rng(cfg.seed, 2);
        ReplayBuffers buffers;
        buffers.offline = augment_dataset(dataset, cfg.pipeline.augment_k, env.grid(), augment_rng);
        buffers.online = RingBuffer(cfg.pipeline.online_capacity);
        EnergyStandardizer standardizer;
        Rng rng = stage_rng(cfg.seed, 7);
        const FinetuneLog log =
            finetune_online(env, agent, energy, buffers, cfg.pipeline, rng, &standardizer);
        report.train_reward = log.reward;
        report.beta_trace = log.beta;
        report.actor_updates = log.actor_updates;
        report.energy_refreshes = log.energy_refreshes;
        agent.save(checkpoint);
        energy.save(checkpoint + "/energy.mlp");
      }
      Rng eval_rng = stage_rng(cfg.seed, 8);
      for (int t = 0; t < cfg.pipeline.test_steps; ++t) {
        const Vec raw_state = env.current_state();
        const Vec proto = denormalize_action(agent.policy(env.scale_state(raw_state)), env.grid());
        const Vec operating = project_action(proto, cfg.pipeline.projection_k, env.grid(),
                                             make_q_evaluator(agent, env, raw_state), eval_rng);
        const Env::StepOutcome outcome = env.step(operating);
        report.test_reward.push_back(outcome.reward);
        report.test_metrics.push_back(outcome.slice_metrics);
      }
      write_report_files(report, cfg, args.out_dir);
      export_cdfs(report, args.out_dir);
      std::cout << stage << " done: mean test reward " << report.mean_test_reward() << "\n";
      return 0;
    }

    if (baseline_cmd->parsed()) {
      const RunReport report = run_variant(cfg, baseline, args.out_dir);
      std::cout << baseline << " mean test reward " << report.mean_test_reward() << " ("
                << report.wall_seconds << " s)\n";
      return 0;
    }

    if (sweep_cmd->parsed()) {
      std::vector<std::uint64_t> seeds;
      for (long s : sweep_seeds) seeds.push_back(static_cast<std::uint64_t>(s));
      if (seeds.empty()) seeds = {1, 2, 3, 4, 5};
      const auto rows = sweep(cfg, seeds, {"default", "mro", "samro"}, args.out_dir);
      std::cout << "sweep finished, summary at " << args.out_dir << "/summary.csv\n";
      for (const auto& row : rows) {
        std::cout << "  seed " << row.seed << " " << row.variant << ": mean test reward "
                  << row.mean_test_reward << "\n";
      }
      return 0;
    }

    if (export_cmd->parsed()) {
      // Rebuild the CDFs from a previously written test trace.
      std::ifstream in(report_dir + "/test_trace.csv");
      if (!in) {
        std::cerr << "error [export]: cannot open " << report_dir << "/test_trace.csv\n";
        return 1;
      }
      std::string header;
      std::getline(in, header);
      int n_slices = 0;
      for (size_t pos = header.find("hfr_s"); pos != std::string::npos;
           pos = header.find("hfr_s", pos + 1)) {
        ++n_slices;
      }
      RunReport report;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(ls, cell, ',')) values.push_back(std::stod(cell));
        report.test_reward.push_back(values.at(1));
        std::vector<SliceMetrics> metrics(n_slices);
        for (int s = 0; s < n_slices; ++s) {
          metrics[s].hfr = values.at(2 + 4 * s);
          metrics[s].ppr = values.at(3 + 4 * s);
          metrics[s].tsl = values.at(4 + 4 * s);
          metrics[s].lsl = values.at(5 + 4 * s);
        }
        report.test_metrics.push_back(std::move(metrics));
      }
      export_cdfs(report, args.out_dir);
      std::cout << "CDFs written to " << args.out_dir << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    return fail(app.get_subcommands().empty() ? "cli" : app.get_subcommands()[0]->get_name(), e);
  }
  return 0;
}
