#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wamlab/commands.hpp"
#include "wamlab/errors.hpp"

namespace {

struct CommonFlags {
  std::string config_path = "configs/default.cfg";
  wamlab::Overrides overrides;
};

void add_common_flags(CLI::App* app, CommonFlags& flags) {
  app->add_option("--config", flags.config_path, "Run configuration file")
      ->capture_default_str();
  app->add_option("--seed", flags.overrides.master_seed, "Master seed override");
  app->add_option("--seeds", flags.overrides.seeds, "Seeds per suite cell");
  app->add_option("--strategy", flags.overrides.strategy,
                  "Selection strategy (single|value|exploring|consensus|weighted)");
  app->add_option("--candidates", flags.overrides.candidates,
                  "Number of sampled branches N");
  app->add_option("--alpha", flags.overrides.alpha, "Consistency scale alpha");
  app->add_option("--tau", flags.overrides.tau, "Softmax temperature tau");
  app->add_option("--out", flags.overrides.output_dir, "Output directory");
  app->add_option("--jobs", flags.overrides.jobs, "Concurrent episodes");
}

wamlab::RunConfig load_config(const CommonFlags& flags) {
  wamlab::RunConfig cfg = wamlab::parse_config_file(flags.config_path);
  wamlab::apply_overrides(cfg, flags.overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wamlab: toy world-action-model rollouts, consistency "
               "diagnostics and test-time selection experiments"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonFlags run_flags, analyze_flags, exp_flags, report_flags;

  CLI::App* run = app.add_subcommand("run", "Roll the configured suite and write a dataset");
  add_common_flags(run, run_flags);

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Separability statistics over an existing dataset");
  std::string dataset_path;
  std::string analyze_out;
  analyze->add_option("dataset", dataset_path,
                      "Dataset directory or episodes.jsonl")->required();
  analyze->add_option("--out", analyze_out,
                      "Report directory (default: next to the dataset)");

  CLI::App* experiment = app.add_subcommand("experiment", "Run one named experiment");
  std::string experiment_name;
  experiment->add_option("name", experiment_name,
                         "separability|collapse|utility|scaling|mitigation")
      ->required();
  add_common_flags(experiment, exp_flags);

  CLI::App* report = app.add_subcommand(
      "report", "run + analyze + all enabled experiments + summary.txt");
  add_common_flags(report, report_flags);

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      return wamlab::cmd_run(load_config(run_flags), std::cout);
    }
    if (analyze->parsed()) {
      std::filesystem::path out_dir = analyze_out;
      if (analyze_out.empty()) {
        const std::filesystem::path p(dataset_path);
        out_dir = std::filesystem::is_directory(p) ? p : p.parent_path();
      }
      return wamlab::cmd_analyze(dataset_path, out_dir, std::cout);
    }
    if (experiment->parsed()) {
      return wamlab::cmd_experiment(experiment_name, load_config(exp_flags),
                                    std::cout);
    }
    if (report->parsed()) {
      return wamlab::cmd_report(load_config(report_flags), std::cout);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const wamlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
