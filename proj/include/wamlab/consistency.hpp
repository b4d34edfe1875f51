#pragma once

#include <optional>
#include <vector>

#include "wamlab/core.hpp"

namespace wamlab {

enum class DistanceKind { kMse };

struct ConsistencyConfig {
  double alpha = 0.1;
  DistanceKind distance = DistanceKind::kMse;
};

// Per-decision diagnostics logged by the harness for every strategy.
struct StepDiagnostics {
  int t = 0;
  double c_t = 0.0;      // consistency of the chosen branch, (0, 1]
  double delta_z = 0.0;  // realized latent change over the decision step
  int chosen_branch = 0;
  std::vector<double> branch_scores;  // per-candidate selection scores
  std::optional<double> value_pred;
};

// c = exp(-alpha * mse(predicted, realized)); 1 iff the vectors coincide,
// strictly decreasing in the distance.
double consistency_score(const LatentVec& predicted, const LatentVec& realized,
                         const ConsistencyConfig& cfg);

// Motion-magnitude proxy: mse between the current and horizon latents.
double latent_change(const LatentVec& z_now, const LatentVec& z_future);

// Episode-level aggregate: arithmetic mean of per-step c_t.
double episode_consistency(const std::vector<StepDiagnostics>& steps);

}  // namespace wamlab
