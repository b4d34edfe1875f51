#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "wamlab/config.hpp"
#include "wamlab/harness.hpp"

namespace wamlab {

// Command entry points shared by the CLI binary and the tests. They throw
// ConfigError for usage/config problems (exit 2) and std::runtime_error for
// runtime failures (exit 1); a zero return is success.

// Runs the configured suite, writes the dataset (episodes.jsonl +
// run_meta.json) under cfg.output_dir and prints one summary line per
// (strategy, N).
int cmd_run(const RunConfig& cfg, std::ostream& out);

// Statistics over an existing dataset: zscores.csv, roc_points.csv,
// per_task.csv plus printed Cohen's d and AUC. A single-outcome dataset
// produces a partial report with a warning and still exits 0.
int cmd_analyze(const std::filesystem::path& dataset_path,
                const std::filesystem::path& out_dir, std::ostream& out);

// Dispatches one named experiment (separability, collapse, utility,
// scaling, mitigation) and writes its CSVs under cfg.output_dir/<name>/.
int cmd_experiment(const std::string& name, const RunConfig& cfg,
                   std::ostream& out);

// run + analyze + every experiment enabled in the config, plus a plain-text
// summary.txt bundling the headline numbers.
int cmd_report(const RunConfig& cfg, std::ostream& out);

// Analysis core shared by cmd_analyze, the separability experiment and
// cmd_report.
struct AnalysisSummary {
  bool both_classes = false;
  double cohens_d = 0.0;
  double auc = 0.0;
  int degenerate_tasks = 0;
};

AnalysisSummary write_analysis(const RunDataset& ds, uint64_t master_seed,
                               const std::filesystem::path& dir,
                               std::ostream& out);

// The suite plan cmd_run executes for a given config.
SuitePlan plan_from_config(const RunConfig& cfg);

}  // namespace wamlab
