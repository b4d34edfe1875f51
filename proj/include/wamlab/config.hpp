#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wamlab/consistency.hpp"
#include "wamlab/envs.hpp"
#include "wamlab/selection.hpp"
#include "wamlab/wam.hpp"

namespace wamlab {

// Parsed run configuration. The on-disk format is flat sectioned
// key = value text; see configs/default.cfg for the grammar.
struct RunConfig {
  int config_version = 1;
  uint64_t master_seed = 42;
  int seeds = 20;
  std::string output_dir;
  int jobs = 1;

  ConsistencyConfig consistency;

  std::vector<TaskSpec> suite;
  std::vector<std::pair<std::string, WamSpec>> wam_presets;
  std::vector<std::string> run_presets;  // presets rolled by `run`

  std::vector<Strategy> strategies;
  std::vector<int> candidates;  // N values rolled by `run`
  double tau = 1.0;

  std::set<std::string> experiments;  // enabled experiment names
  std::string characterize_preset = "noisy";
  std::string collapse_preset = "collapse";
  std::string utility_preset = "noisy";
  std::string selection_preset = "noisy";
  std::vector<int> scaling_candidates = {1, 2, 4, 8};
  int scaling_seeds = 25;
  int collapse_seeds = 50;
  int utility_seeds = 50;
  int mitigation_seeds = 50;
  int mitigation_candidates = 8;
};

// CLI flag overrides, applied after parsing.
struct Overrides {
  std::optional<uint64_t> master_seed;
  std::optional<int> seeds;
  std::optional<std::string> strategy;
  std::optional<int> candidates;
  std::optional<double> alpha;
  std::optional<double> tau;
  std::optional<std::string> output_dir;
  std::optional<int> jobs;
};

// Throws ConfigError with file:line diagnostics on malformed input.
RunConfig parse_config_text(const std::string& text,
                            const std::string& source_name);
RunConfig parse_config_file(const std::string& path);

void apply_overrides(RunConfig& cfg, const Overrides& ov);

// Cross-checks: referenced presets defined, strategies valid, tasks valid.
void validate_config(const RunConfig& cfg);

// Deterministic re-serialization of the effective config; the fingerprint
// is the FNV-1a hash of these bytes, so it is recomputable from the file.
std::string canonical_config_text(const RunConfig& cfg);
std::string config_fingerprint(const RunConfig& cfg);

const WamSpec& preset_or_throw(const RunConfig& cfg, const std::string& name);

// Default output dir: $WAMLAB_OUT if set, else "out".
std::string default_output_dir();

}  // namespace wamlab
