// tsebench: config-driven experiment runner for traffic-density
// reconstruction benchmarks.
//
//   tsebench gen      --config cfg.ini [--out DIR]          ring datasets
//   tsebench train    --config cfg.ini [--out DIR] [...]    PIDL scenario matrix
//   tsebench baseline --config cfg.ini [--out DIR]          Lax-Friedrichs baseline
//   tsebench sweep    --config cfg.ini [--out DIR] [...]    diffusion-coefficient sweep
//   tsebench plotdata --field field.csv --out heatmap.csv   plot-ready CSVs
//
// Exit codes: 0 success, 1 config error, 2 partial failures.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tse/experiment.hpp"
#include "tse/field_io.hpp"
#include "tse/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string seeds;
  int jobs = 0;
  CLI::Option* seeds_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* c = cmd->add_option("--config", args.config_path, "experiment config file");
  if (config_required) c->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides [run] out)");
  args.seeds_opt = cmd->add_option(
      "--seeds", args.seeds, "comma-separated seed list (overrides [run] seeds)");
  cmd->add_option("--jobs", args.jobs, "worker threads (overrides [run] jobs)");
}

tse::cli::ExperimentConfig load_config(const CommonArgs& args) {
  auto cfg = tse::cli::ExperimentConfig::load(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.jobs > 0) cfg.jobs = args.jobs;
  if (args.seeds_opt && args.seeds_opt->count() > 0) {
    cfg.seeds.clear();
    std::size_t start = 0;
    while (start <= args.seeds.size()) {
      const std::size_t pos = args.seeds.find(',', start);
      const std::string item = pos == std::string::npos
                                   ? args.seeds.substr(start)
                                   : args.seeds.substr(start, pos - start);
      if (!item.empty()) cfg.seeds.push_back(std::stoull(item));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (cfg.seeds.empty())
      throw tse::cli::ConfigError("--seeds", 0, "seed list must not be empty");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"traffic-density reconstruction benchmark toolkit"};
  app.set_version_flag("--version", std::string("tsebench ") + tse::kVersion);
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, baseline_args, sweep_args;
  auto* gen = app.add_subcommand("gen", "generate the ring-road datasets");
  add_common(gen, gen_args);
  auto* train = app.add_subcommand("train", "run the PIDL experiment matrix");
  add_common(train, train_args);
  auto* baseline = app.add_subcommand("baseline", "Lax-Friedrichs reconstruction");
  add_common(baseline, baseline_args);
  auto* sweep = app.add_subcommand("sweep", "diffusion-coefficient sweep");
  add_common(sweep, sweep_args);

  std::string field_path, plot_out;
  auto* plotdata = app.add_subcommand("plotdata", "emit plot-ready CSVs for a field");
  plotdata->add_option("--field", field_path, "field CSV to render")->required();
  plotdata->add_option("--out", plot_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return tse::cli::generate_datasets(load_config(gen_args), std::cout);
    if (train->parsed()) return tse::cli::run_experiment(load_config(train_args), std::cout);
    if (baseline->parsed())
      return tse::cli::run_baseline(load_config(baseline_args), std::cout);
    if (sweep->parsed()) return tse::cli::diffusion_sweep(load_config(sweep_args), std::cout);
    if (plotdata->parsed()) {
      tse::cli::emit_heatmap_data(tse::read_field_csv(field_path), plot_out);
      return tse::cli::kExitOk;
    }
  } catch (const tse::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return tse::cli::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tse::cli::kExitPartialFailure;
  }
  return tse::cli::kExitOk;
}
