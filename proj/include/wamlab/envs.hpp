#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "wamlab/core.hpp"

namespace wamlab {

enum class Family { kPointReach, kPushBlock, kStallTrap };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Task = environment family + geometry + horizons + encoder width.
// All positions live in a planar arena of nominal diameter `kArenaDiameter`.
struct TaskSpec {
  std::string task_id;
  Family family = Family::kPointReach;

  std::array<double, 2> goal = {1.2, 0.0};  // agent goal, or block goal for PushBlock
  double success_radius = 0.12;             // eps; success is strict `<`
  double dt = 0.25;                         // Euler sub-step length
  double max_speed = 0.6;                   // bound on the linear speed component
  double init_noise = 0.05;                 // std of the initial agent position draw
  double noise_std = 0.0;                   // transition noise on the physical state
  int episode_horizon = 30;                 // T decision steps
  int control_horizon = 1;                  // Delta env sub-steps per decision
  int latent_dim = 8;                       // D

  // PushBlock
  std::array<double, 2> block_start = {0.4, 0.0};
  double contact_radius = 0.18;

  // StallTrap: stall region is the band |y| >= stall_band_y; once entered,
  // all subsequent motion is scaled by stall_factor (absorbing).
  double stall_band_y = 0.45;
  double stall_factor = 0.03;

  int state_dim() const { return family == Family::kPushBlock ? 4 : 2; }
};

// Throws ConfigError (see config.hpp) on invalid parameters.
void validate_task(const TaskSpec& spec);

// Value-semantic environment state. The transition-noise stream is part of
// the state, so a restored snapshot replays the same noise draws.
struct EnvState {
  std::vector<double> physical;  // [ax, ay] or [ax, ay, bx, by]
  int step_count = 0;            // decision steps taken
  bool stalled = false;          // StallTrap absorbing flag
  RngStream noise;

  bool operator==(const EnvState&) const = default;
};

struct Observation {
  LatentVec latent;             // z_t = encode_latent(physical)
  std::vector<double> proprio;  // physical readout (agent pose + tracked object)
};

// Fixed per-task random linear map (seeded by task_id) followed by tanh
// squashing. Deterministic, Lipschitz, injective for D >= state_dim.
LatentVec encode_latent(std::span<const double> physical, const TaskSpec& spec);

// The encoder's linear map, row-major latent_dim x state_dim. Exposed so the
// inverse-dynamics model can pseudo-invert it.
std::vector<double> latent_map(const TaskSpec& spec);

Observation observe(const EnvState& state, const TaskSpec& spec);

EnvState reset(const TaskSpec& spec, RngStream& stream);

// Advances one decision step = control_horizon sub-steps holding `action`.
// Transition noise is drawn from state.noise.
void step(EnvState& state, const ActionVec& action, const TaskSpec& spec);

// One Euler sub-step. Set use_noise=false for noiseless model rollouts.
void substep(EnvState& state, const ActionVec& action, const TaskSpec& spec,
             bool use_noise = true);

// Executes a per-sub-step action sequence (one sub-step per action) and
// bumps step_count once; equivalent to step() when all entries are equal.
void execute_actions(EnvState& state, std::span<const ActionVec> actions,
                     const TaskSpec& spec);

// Value-semantic copies; any action sequence run from restore(snapshot(s))
// reproduces running it from s exactly, including noise draws.
inline EnvState snapshot(const EnvState& state) { return state; }
inline EnvState restore(const EnvState& saved) { return saved; }

// Terminal sparse success predicate: goal distance strictly below
// success_radius (agent for PointReach/StallTrap, block for PushBlock).
bool is_success(const EnvState& state, const TaskSpec& spec);

// Distance from the goal-relevant body to the goal.
double goal_distance(const EnvState& state, const TaskSpec& spec);

// Analytic distance-to-goal potential in [0, 1]: 1 at the goal, 0 at or
// beyond the nominal arena diameter.
double potential(const EnvState& state, const TaskSpec& spec);
double potential_from_physical(std::span<const double> physical,
                               const TaskSpec& spec);

bool in_stall_region(std::span<const double> physical, const TaskSpec& spec);

constexpr double kArenaDiameter = 3.0;

}  // namespace wamlab
