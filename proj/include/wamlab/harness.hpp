#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wamlab/consistency.hpp"
#include "wamlab/envs.hpp"
#include "wamlab/selection.hpp"
#include "wamlab/stats.hpp"
#include "wamlab/wam.hpp"

namespace wamlab {

// One rollout, the unit of analysis for every statistic.
struct EpisodeLog {
  std::string task_id;
  uint64_t episode_seed = 0;
  std::string wam_preset;
  std::string strategy;
  int n_candidates = 1;
  std::vector<StepDiagnostics> steps;
  bool success = false;
  double episode_consistency = 0.0;
  std::optional<int> stall_onset;
  int total_exploration_cost = 0;
};

enum class Alignment { kAligned, kMisaligned, kUndetermined };

std::string alignment_name(Alignment a);

struct RunDataset {
  std::string config_fingerprint;
  std::vector<EpisodeLog> episodes;
  std::map<std::string, Alignment> alignment;
};

// Grid of suite cells: tasks x presets x selections x seeds.
struct SuitePlan {
  std::vector<TaskSpec> tasks;
  std::vector<std::pair<std::string, WamSpec>> presets;
  std::vector<SelectionConfig> selections;
  ConsistencyConfig consistency;
  int seeds = 1;
  int jobs = 1;
  // Fixed-length mode for trace-difference experiments: episodes execute
  // every decision step and success latches if it ever holds.
  bool run_to_horizon = false;
};

// Rolls one episode: T decision steps of observe, sample N branches, select
// per strategy, execute, diagnose. True consistency (chosen prediction vs
// realized latent) and latent change are logged for every strategy; the
// episode terminates at the first success unless run_to_horizon is set.
// Pure function of (inputs, master_seed, episode_index).
EpisodeLog run_episode(const TaskSpec& spec, const WamSpec& wam,
                       const SelectionConfig& sel,
                       const ConsistencyConfig& ccfg, uint64_t master_seed,
                       uint64_t episode_index, bool run_to_horizon = false);

// Runs the full grid. Per-cell streams are derived from the cell content
// (task id, preset name, seed index), never from grid position, so
// permuting the plan's declaration order yields the identical dataset after
// the canonical sort. Strategy and N do not enter the derivation: cells at
// the same (task, preset, seed) share their sampled branches.
// Alignment labels come from Single-strategy episodes only.
RunDataset run_suite(const SuitePlan& plan, uint64_t master_seed);

std::map<std::string, Alignment> compute_alignment(
    const std::vector<EpisodeLog>& episodes);

// --- experiment analyses (pure functions of a dataset) ---

struct ScalingRow {
  std::string strategy;
  int n = 0;
  double success_rate = 0.0;
  int episodes = 0;
};

std::vector<ScalingRow> scaling_table(const RunDataset& ds);

// Per-step mean over episodes still alive at that step.
struct CellCurve {
  std::vector<double> mean;
  std::vector<int> alive;
  bool present = false;
};

struct CollapseReport {
  // cells[alignment][outcome]: 0 = Aligned/Success, Aligned/Failure,
  // Misaligned/Success, Misaligned/Failure. Undetermined tasks are omitted.
  std::array<std::array<CellCurve, 2>, 2> delta_z_cells;
  Correlation dz_vs_c;  // pooled over every logged step
  std::map<std::string, Alignment> alignment;
  int misaligned_tasks = 0;
};

CollapseReport collapse_report(const RunDataset& ds);

struct UtilityGapReport {
  GapCurve value_gap;
  GapCurve consistency_gap;
};

// Success-minus-failure gap curves for the value head and for consistency.
// Throws if episodes lack value predictions or a class is empty.
UtilityGapReport utility_gap_report(const RunDataset& ds);

struct MitigationReport {
  std::string strategy;
  std::string baseline;
  std::vector<double> delta_z_diff;  // per step, mean over pairs alive in both arms
  std::vector<double> c_diff;
  std::vector<int> pairs;
};

// H-L curves between a selection strategy and a baseline at matched
// (task, preset, seed) cells. Throws when the arms do not pair up exactly.
MitigationReport mitigation_report(const RunDataset& ds,
                                   const std::string& strategy,
                                   const std::string& baseline);

// --- experiment drivers ---

std::vector<ScalingRow> experiment_scaling(const SuitePlan& base,
                                           uint64_t master_seed,
                                           const std::vector<int>& n_values);

CollapseReport experiment_collapse(const SuitePlan& plan, uint64_t master_seed);

UtilityGapReport experiment_utility_gap(const SuitePlan& plan,
                                        uint64_t master_seed);

MitigationReport experiment_mitigation(SuitePlan plan, uint64_t master_seed);

}  // namespace wamlab
