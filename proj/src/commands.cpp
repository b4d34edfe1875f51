#include "wamlab/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "wamlab/errors.hpp"
#include "wamlab/log_io.hpp"
#include "wamlab/stats.hpp"

namespace wamlab {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kAnalysisLabel = 0x414E414CULL;  // fold-split stream label

SuitePlan base_plan(const RunConfig& cfg) {
  SuitePlan plan;
  plan.tasks = cfg.suite;
  plan.consistency = cfg.consistency;
  plan.seeds = cfg.seeds;
  plan.jobs = cfg.jobs;
  return plan;
}

SuitePlan single_strategy_plan(const RunConfig& cfg, const std::string& preset,
                               int seeds) {
  SuitePlan plan = base_plan(cfg);
  plan.presets = {{preset, preset_or_throw(cfg, preset)}};
  plan.selections = {SelectionConfig{Strategy::kSingle, 1, cfg.tau}};
  plan.seeds = seeds;
  return plan;
}

std::vector<LabeledScore> labeled_consistency(const RunDataset& ds) {
  std::vector<LabeledScore> scores;
  scores.reserve(ds.episodes.size());
  for (const auto& e : ds.episodes) {
    scores.push_back(LabeledScore{e.task_id, static_cast<int>(e.episode_seed),
                                  e.episode_consistency, e.success});
  }
  return scores;
}

void print_success_summary(const RunDataset& ds, std::ostream& out) {
  for (const auto& row : scaling_table(ds)) {
    out << "strategy=" << row.strategy << " N=" << row.n
        << " success_rate=" << fmt_double(row.success_rate)
        << " episodes=" << row.episodes << "\n";
  }
}

void write_collapse_csvs(const CollapseReport& rep, const fs::path& dir) {
  fs::create_directories(dir);
  std::size_t steps = 0;
  for (int a = 0; a < 2; ++a) {
    for (int o = 0; o < 2; ++o) {
      steps = std::max(steps, rep.delta_z_cells[a][o].mean.size());
    }
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (const auto& [a, o] : {std::pair{0, 0}, {0, 1}, {1, 0}, {1, 1}}) {
      const CellCurve& c = rep.delta_z_cells[a][o];
      row.push_back(t < c.mean.size() ? fmt_double(c.mean[t]) : "");
    }
    rows.push_back(std::move(row));
  }
  write_csv(dir / "collapse_dz.csv",
            {"step", "aligned_success", "aligned_failure", "misaligned_success",
             "misaligned_failure"},
            rows);

  write_csv(dir / "collapse_summary.csv",
            {"pearson_dz_c", "spearman_dz_c", "misaligned_tasks", "tasks"},
            {{fmt_double(rep.dz_vs_c.pearson), fmt_double(rep.dz_vs_c.spearman),
              std::to_string(rep.misaligned_tasks),
              std::to_string(rep.alignment.size())}});

  std::vector<std::vector<std::string>> alignment_rows;
  for (const auto& [task, a] : rep.alignment) {
    alignment_rows.push_back({task, alignment_name(a)});
  }
  write_csv(dir / "alignment.csv", {"task_id", "alignment"}, alignment_rows);
}

void write_gap_csv(const GapCurve& curve, const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < curve.gap.size(); ++t) {
    rows.push_back({std::to_string(t), fmt_double(curve.gap[t])});
  }
  write_csv(path, {"step", "gap"}, rows);
}

AnalysisSummary run_separability(const RunConfig& cfg, const fs::path& dir,
                                 std::ostream& out) {
  SuitePlan plan = single_strategy_plan(cfg, cfg.characterize_preset, cfg.seeds);
  RunDataset ds = run_suite(plan, cfg.master_seed);
  ds.config_fingerprint = config_fingerprint(cfg);
  fs::create_directories(dir);
  return write_analysis(ds, cfg.master_seed, dir, out);
}

CollapseReport run_collapse(const RunConfig& cfg, const fs::path& dir,
                            std::ostream& out) {
  SuitePlan plan =
      single_strategy_plan(cfg, cfg.collapse_preset, cfg.collapse_seeds);
  const CollapseReport rep = experiment_collapse(plan, cfg.master_seed);
  write_collapse_csvs(rep, dir);
  out << "collapse: misaligned_tasks=" << rep.misaligned_tasks << "/"
      << rep.alignment.size()
      << " spearman_dz_c=" << fmt_double(rep.dz_vs_c.spearman) << "\n";
  return rep;
}

UtilityGapReport run_utility(const RunConfig& cfg, const fs::path& dir,
                             std::ostream& out) {
  SuitePlan plan =
      single_strategy_plan(cfg, cfg.utility_preset, cfg.utility_seeds);
  const UtilityGapReport rep = experiment_utility_gap(plan, cfg.master_seed);
  fs::create_directories(dir);
  write_gap_csv(rep.value_gap, dir / "value_gap.csv");
  write_gap_csv(rep.consistency_gap, dir / "consistency_gap.csv");
  int shared_sign = 0;
  const std::size_t n =
      std::min(rep.value_gap.gap.size(), rep.consistency_gap.gap.size());
  for (std::size_t t = 0; t < n; ++t) {
    if ((rep.value_gap.gap[t] >= 0.0) == (rep.consistency_gap.gap[t] >= 0.0))
      ++shared_sign;
  }
  out << "utility: steps=" << n << " shared_sign_steps=" << shared_sign << "\n";
  return rep;
}

std::vector<ScalingRow> run_scaling(const RunConfig& cfg, const fs::path& dir,
                                    std::ostream& out) {
  if (std::find(cfg.strategies.begin(), cfg.strategies.end(),
                Strategy::kConsistencyConsensus) == cfg.strategies.end()) {
    throw ConfigError(
        "experiment scaling requires 'consensus' among [selection] strategies");
  }
  SuitePlan plan = base_plan(cfg);
  plan.presets = {{cfg.selection_preset, preset_or_throw(cfg, cfg.selection_preset)}};
  plan.seeds = cfg.scaling_seeds;
  for (Strategy s : cfg.strategies) {
    plan.selections.push_back(SelectionConfig{s, 1, cfg.tau});
  }
  const auto rows =
      experiment_scaling(plan, cfg.master_seed, cfg.scaling_candidates);
  fs::create_directories(dir);
  std::vector<std::vector<std::string>> csv_rows;
  for (const auto& r : rows) {
    csv_rows.push_back({r.strategy, std::to_string(r.n),
                        fmt_double(r.success_rate), std::to_string(r.episodes)});
    out << "scaling: strategy=" << r.strategy << " N=" << r.n
        << " success_rate=" << fmt_double(r.success_rate) << "\n";
  }
  write_csv(dir / "scaling.csv", {"strategy", "n", "success_rate", "episodes"},
            csv_rows);
  return rows;
}

MitigationReport run_mitigation(const RunConfig& cfg, const fs::path& dir,
                                std::ostream& out) {
  SuitePlan plan = base_plan(cfg);
  plan.presets = {{cfg.collapse_preset, preset_or_throw(cfg, cfg.collapse_preset)}};
  plan.seeds = cfg.mitigation_seeds;
  plan.selections = {
      SelectionConfig{Strategy::kConsistencyConsensus,
                      cfg.mitigation_candidates, cfg.tau}};
  const MitigationReport rep = experiment_mitigation(plan, cfg.master_seed);
  fs::create_directories(dir);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < rep.delta_z_diff.size(); ++t) {
    rows.push_back({std::to_string(t), fmt_double(rep.delta_z_diff[t]),
                    fmt_double(rep.c_diff[t]), std::to_string(rep.pairs[t])});
  }
  write_csv(dir / "mitigation_hl.csv",
            {"step", "delta_z_diff", "c_diff", "pairs"}, rows);
  int positive = 0, total = 0;
  for (std::size_t t = rep.delta_z_diff.size() * 2 / 3;
       t < rep.delta_z_diff.size(); ++t) {
    positive += rep.delta_z_diff[t] > 0.0 ? 1 : 0;
    ++total;
  }
  out << "mitigation: late_steps=" << total
      << " positive_dz_diff=" << positive << "\n";
  return rep;
}

}  // namespace

SuitePlan plan_from_config(const RunConfig& cfg) {
  SuitePlan plan = base_plan(cfg);
  for (const auto& name : cfg.run_presets) {
    plan.presets.emplace_back(name, preset_or_throw(cfg, name));
  }
  for (Strategy s : cfg.strategies) {
    for (int n : cfg.candidates) {
      plan.selections.push_back(SelectionConfig{s, n, cfg.tau});
    }
  }
  return plan;
}

int cmd_run(const RunConfig& cfg, std::ostream& out) {
  const SuitePlan plan = plan_from_config(cfg);
  RunDataset ds = run_suite(plan, cfg.master_seed);
  ds.config_fingerprint = config_fingerprint(cfg);
  save_dataset(cfg.output_dir, ds, canonical_config_text(cfg), cfg.master_seed,
               &plan);
  out << "dataset: " << (fs::path(cfg.output_dir) / "episodes.jsonl").string()
      << " episodes=" << ds.episodes.size()
      << " fingerprint=" << ds.config_fingerprint << "\n";
  print_success_summary(ds, out);
  return 0;
}

AnalysisSummary write_analysis(const RunDataset& ds, uint64_t master_seed,
                               const fs::path& dir, std::ostream& out) {
  const std::vector<LabeledScore> raw = labeled_consistency(ds);
  const ZscoreResult z = zscore_per_task(raw);

  std::vector<std::vector<std::string>> zrows;
  for (const auto& s : z.scores) {
    zrows.push_back({s.task_id, std::to_string(s.episode_id),
                     fmt_double(s.score), s.label ? "1" : "0"});
  }
  write_csv(dir / "zscores.csv", {"task_id", "episode_seed", "z", "success"},
            zrows);

  AnalysisSummary summary;
  summary.degenerate_tasks = static_cast<int>(z.degenerate_tasks.size());

  std::vector<double> z_succ, z_fail;
  for (const auto& s : z.scores) (s.label ? z_succ : z_fail).push_back(s.score);
  summary.both_classes = z_succ.size() >= 2 && z_fail.size() >= 2;
  if (summary.both_classes) {
    summary.cohens_d = cohens_d(z_succ, z_fail);
    const CvResult cv = roc_auc_cv(
        z.scores, 5, derive_stream(master_seed, kAnalysisLabel, 0, 0));
    summary.auc = cv.curve.auc;
    std::vector<std::vector<std::string>> roc_rows;
    for (const auto& [fpr, tpr] : cv.curve.points) {
      roc_rows.push_back({fmt_double(fpr), fmt_double(tpr)});
    }
    write_csv(dir / "roc_points.csv", {"fpr", "tpr"}, roc_rows);
    out << "cohens_d=" << fmt_double(summary.cohens_d)
        << " auc=" << fmt_double(summary.auc) << " (5-fold CV, pooled z)\n";
  } else {
    out << "warning: dataset has a single outcome class; skipping Cohen's d "
           "and ROC\n";
  }

  // Per-task breakdown on raw episode consistency.
  struct TaskAcc {
    std::vector<double> succ, fail;
  };
  std::map<std::string, TaskAcc> per_task;
  for (const auto& s : raw) {
    auto& acc = per_task[s.task_id];
    (s.label ? acc.succ : acc.fail).push_back(s.score);
  }
  std::vector<std::vector<std::string>> task_rows;
  for (const auto& [task, acc] : per_task) {
    const auto mean = [](const std::vector<double>& xs) {
      double m = 0.0;
      for (double x : xs) m += x;
      return xs.empty() ? 0.0 : m / static_cast<double>(xs.size());
    };
    std::string d_str, auc_str;
    if (acc.succ.size() >= 2 && acc.fail.size() >= 2) {
      try {
        d_str = fmt_double(cohens_d(acc.succ, acc.fail));
      } catch (const std::invalid_argument&) {
        d_str = "";  // zero pooled variance
      }
    }
    if (!acc.succ.empty() && !acc.fail.empty()) {
      std::vector<double> scores = acc.succ;
      scores.insert(scores.end(), acc.fail.begin(), acc.fail.end());
      std::vector<bool> labels(acc.succ.size(), true);
      labels.insert(labels.end(), acc.fail.size(), false);
      auc_str = fmt_double(auc_raw(scores, labels));
    }
    const auto align_it = ds.alignment.find(task);
    task_rows.push_back(
        {task, std::to_string(acc.succ.size()), std::to_string(acc.fail.size()),
         acc.succ.empty() ? "" : fmt_double(mean(acc.succ)),
         acc.fail.empty() ? "" : fmt_double(mean(acc.fail)), d_str, auc_str,
         align_it == ds.alignment.end() ? "undetermined"
                                        : alignment_name(align_it->second)});
  }
  write_csv(dir / "per_task.csv",
            {"task_id", "n_success", "n_failure", "mean_c_success",
             "mean_c_failure", "cohens_d", "auc", "alignment"},
            task_rows);
  return summary;
}

int cmd_analyze(const fs::path& dataset_path, const fs::path& out_dir,
                std::ostream& out) {
  const LoadedDataset loaded = load_dataset(dataset_path);
  fs::create_directories(out_dir);
  write_analysis(loaded.dataset, loaded.master_seed, out_dir, out);
  return 0;
}

int cmd_experiment(const std::string& name, const RunConfig& cfg,
                   std::ostream& out) {
  const fs::path dir = fs::path(cfg.output_dir) / name;
  if (name == "separability") {
    const AnalysisSummary s = run_separability(cfg, dir, out);
    (void)s;
  } else if (name == "collapse") {
    run_collapse(cfg, dir, out);
  } else if (name == "utility") {
    run_utility(cfg, dir, out);
  } else if (name == "scaling") {
    run_scaling(cfg, dir, out);
  } else if (name == "mitigation") {
    run_mitigation(cfg, dir, out);
  } else {
    throw ConfigError("unknown experiment '" + name +
                      "'; valid names: separability, collapse, utility, "
                      "scaling, mitigation");
  }
  return 0;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  cmd_run(cfg, out);
  const fs::path base = cfg.output_dir;
  const LoadedDataset loaded = load_dataset(base);
  const fs::path analysis_dir = base / "analysis";
  fs::create_directories(analysis_dir);
  const AnalysisSummary analysis =
      write_analysis(loaded.dataset, cfg.master_seed, analysis_dir, out);

  std::ostringstream summary;
  summary << "run fingerprint: " << loaded.dataset.config_fingerprint << "\n";
  for (const auto& row : scaling_table(loaded.dataset)) {
    summary << "success_rate strategy=" << row.strategy << " N=" << row.n
            << ": " << fmt_double(row.success_rate) << " (" << row.episodes
            << " episodes)\n";
  }
  if (analysis.both_classes) {
    summary << "pooled z-scored cohens_d: " << fmt_double(analysis.cohens_d)
            << "\n";
    summary << "5-fold CV AUC: " << fmt_double(analysis.auc) << "\n";
  }
  for (const auto& name : cfg.experiments) {
    cmd_experiment(name, cfg, out);
    summary << "experiment " << name << ": csv under "
            << (base / name).string() << "\n";
  }

  std::ofstream f(base / "summary.txt");
  if (!f) throw std::runtime_error("cannot write summary.txt");
  f << summary.str();
  out << "report: " << (base / "summary.txt").string() << "\n";
  return 0;
}

}  // namespace wamlab
