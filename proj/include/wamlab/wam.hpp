#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wamlab/core.hpp"
#include "wamlab/envs.hpp"

namespace wamlab {

enum class Formulation { kJointPrediction, kInverseDynamics };
enum class CollapseMode { kOff, kOnStall };

std::string formulation_name(Formulation f);
Formulation formulation_from_name(const std::string& name);

// Synthetic world-action model: the true dynamics plus controllable error
// dials. Joint prediction samples an action and predicts its future;
// inverse dynamics samples a future and derives the action realizing it.
struct WamSpec {
  Formulation formulation = Formulation::kJointPrediction;
  double pred_noise_std = 0.0;      // sigma of Gaussian error on the predicted latent
  LatentVec bias;                   // systematic prediction offset; empty = zero
  CollapseMode collapse_mode = CollapseMode::kOff;
  double stall_threshold = 1e-3;    // theta_z on realized latent change
  int stall_persistence = 2;        // K consecutive low-motion decisions
  double policy_noise_std = 0.0;    // heading noise on sampled actions (rad)
  double value_noise_std = 0.0;
  double value_miscalibration = 1.0;
  double competence = 1.0;          // P(goal-directed action) per sampled action
  // Prediction-error multiplier on branches whose policy draw came out
  // perturbed; links prediction quality to action quality.
  double perturbed_noise_scale = 1.0;
  bool value_head = true;
};

void validate_wam(const WamSpec& wam, const std::string& name);

// One sampled candidate: action sequence over the control horizon, the
// latent the model claims it leads to, and an optional value estimate.
struct Branch {
  std::vector<ActionVec> actions;
  LatentVec predicted_future;
  std::optional<double> predicted_value;
  bool policy_perturbed = false;  // diagnostic: off-task policy draw
  bool action_clamped = false;    // diagnostic: inverse dynamics hit a bound
};

// Label shared by all branch streams of one decision step; branch index i
// completes the (master, episode, step, branch) derivation.
struct StreamLabel {
  uint64_t master = 0;
  uint64_t episode = 0;
  uint64_t step = 0;
};

RngStream branch_stream(const StreamLabel& label, uint64_t branch);

// Goal-directed scripted action with competence gating and heading noise.
// Returns the action and whether the perturbed (off-task) branch was taken.
ActionVec sample_policy_action(const EnvState& state, const TaskSpec& spec,
                               const WamSpec& wam, RngStream& rs,
                               bool* perturbed = nullptr);

// Samples n candidate branches from the current state. stall_run is the
// number of consecutive past decisions whose realized latent change stayed
// below stall_threshold; with collapse_mode == kOnStall and
// stall_run >= stall_persistence every branch predicts the current latent
// unchanged.
std::vector<Branch> sample_branches(const EnvState& state,
                                    const Observation& obs,
                                    const TaskSpec& spec, const WamSpec& wam,
                                    int n, int stall_run,
                                    const StreamLabel& label);

// Noisy, possibly miscalibrated readout of the analytic distance-to-goal
// potential.
double predict_value(const Observation& obs, const TaskSpec& spec,
                     const WamSpec& wam, RngStream& rs);

struct InverseResult {
  ActionVec action;
  bool clamped = false;
};

// Solves for the single action that, held over the control horizon in the
// noiseless dynamics, lands on the physical state implied by target_latent
// (pseudo-inverse of the encoder; contact linearized away for PushBlock).
// Unreachable targets saturate at the action bounds with clamped = true.
InverseResult invert_dynamics(const EnvState& current,
                              const LatentVec& target_latent,
                              const TaskSpec& spec);

}  // namespace wamlab
