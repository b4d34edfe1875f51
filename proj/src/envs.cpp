#include "wamlab/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wamlab/errors.hpp"

namespace wamlab {

namespace {

constexpr double kEncoderGain = 0.8;
constexpr uint64_t kEncoderLabel = 0x454E434FULL;  // "ENCO"
constexpr uint64_t kNoiseKeyLabel = 0x4E4F4953ULL;

void check_action(const ActionVec& a, const TaskSpec& spec) {
  if (a.linear.size() != 1 || a.angular.size() != 1) {
    throw std::invalid_argument(
        "step: action dimension mismatch for task '" + spec.task_id +
        "' (expected 1 linear + 1 angular, got " +
        std::to_string(a.linear.size()) + " + " +
        std::to_string(a.angular.size()) + ")");
  }
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::kPointReach: return "point_reach";
    case Family::kPushBlock: return "push_block";
    case Family::kStallTrap: return "stall_trap";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  if (name == "point_reach") return Family::kPointReach;
  if (name == "push_block") return Family::kPushBlock;
  if (name == "stall_trap") return Family::kStallTrap;
  throw ConfigError("unknown environment family '" + name + "'");
}

void validate_task(const TaskSpec& spec) {
  auto fail = [&](const std::string& what) {
    throw ConfigError("task '" + spec.task_id + "': " + what);
  };
  if (spec.task_id.empty()) fail("task_id must be nonempty");
  if (!(spec.success_radius > 0.0)) fail("success_radius must be > 0");
  if (spec.episode_horizon < 1) fail("episode_horizon must be >= 1");
  if (spec.control_horizon < 1) fail("control_horizon must be >= 1");
  if (spec.latent_dim < spec.state_dim()) fail("latent_dim must be >= state dimension");
  if (!(spec.dt > 0.0)) fail("dt must be > 0");
  if (!(spec.max_speed > 0.0)) fail("max_speed must be > 0");
  if (spec.noise_std < 0.0) fail("noise_std must be >= 0");
  if (spec.init_noise < 0.0) fail("init_noise must be >= 0");
  if (!(spec.contact_radius > 0.0)) fail("contact_radius must be > 0");
  if (!(spec.stall_band_y > 0.0)) fail("stall_band_y must be > 0");
  if (spec.stall_factor < 0.0 || spec.stall_factor > 1.0) fail("stall_factor must be in [0, 1]");
}

std::vector<double> latent_map(const TaskSpec& spec) {
  const int rows = spec.latent_dim;
  const int cols = spec.state_dim();
  RngStream rs = derive_stream(fnv1a(spec.task_id), kEncoderLabel, 0, 0);
  const double scale = kEncoderGain / std::sqrt(static_cast<double>(cols));
  std::vector<double> m(static_cast<std::size_t>(rows) * cols);
  for (double& e : m) e = scale * rs.gaussian();
  return m;
}

LatentVec encode_latent(std::span<const double> physical, const TaskSpec& spec) {
  const auto m = latent_map(spec);
  const int rows = spec.latent_dim;
  const int cols = spec.state_dim();
  if (static_cast<int>(physical.size()) != cols) {
    throw std::invalid_argument("encode_latent: state dimension mismatch (" +
                                std::to_string(physical.size()) + " vs " +
                                std::to_string(cols) + ")");
  }
  LatentVec z(rows);
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += m[static_cast<std::size_t>(r) * cols + c] * physical[c];
    z[r] = std::tanh(acc);
  }
  return z;
}

Observation observe(const EnvState& state, const TaskSpec& spec) {
  return Observation{encode_latent(state.physical, spec), state.physical};
}

EnvState reset(const TaskSpec& spec, RngStream& stream) {
  validate_task(spec);
  EnvState state;
  state.physical.assign(static_cast<std::size_t>(spec.state_dim()), 0.0);
  state.physical[0] = spec.init_noise * stream.gaussian();
  state.physical[1] = spec.init_noise * stream.gaussian();
  if (spec.family == Family::kStallTrap) {
    // Documented initial region: strictly inside the corridor, at most half
    // way to the stall band.
    const double lim = 0.5 * spec.stall_band_y;
    state.physical[1] = std::clamp(state.physical[1], -lim, lim);
  }
  if (spec.family == Family::kPushBlock) {
    state.physical[2] = spec.block_start[0];
    state.physical[3] = spec.block_start[1];
  }
  state.noise = RngStream(hash_label(stream.next_u64(), kNoiseKeyLabel, 0, 0));
  return state;
}

void substep(EnvState& state, const ActionVec& action, const TaskSpec& spec,
             bool use_noise) {
  check_action(action, spec);
  const double speed = std::clamp(action.linear[0], 0.0, spec.max_speed);
  const double heading = wrap_angle(action.angular[0]);
  double dx = speed * spec.dt * std::cos(heading);
  double dy = speed * spec.dt * std::sin(heading);
  if (use_noise && spec.noise_std > 0.0) {
    dx += spec.noise_std * state.noise.gaussian();
    dy += spec.noise_std * state.noise.gaussian();
  }
  if (state.stalled) {
    dx *= spec.stall_factor;
    dy *= spec.stall_factor;
  }
  state.physical[0] += dx;
  state.physical[1] += dy;

  if (spec.family == Family::kPushBlock) {
    // Contact: the block cannot overlap the agent; it is pushed out along
    // the contact normal to the contact circle.
    double vx = state.physical[2] - state.physical[0];
    double vy = state.physical[3] - state.physical[1];
    double dist = std::hypot(vx, vy);
    if (dist < spec.contact_radius) {
      double nx, ny;
      if (dist < 1e-12) {
        double dm = std::hypot(dx, dy);
        nx = dm > 1e-12 ? dx / dm : 1.0;
        ny = dm > 1e-12 ? dy / dm : 0.0;
      } else {
        nx = vx / dist;
        ny = vy / dist;
      }
      state.physical[2] = state.physical[0] + spec.contact_radius * nx;
      state.physical[3] = state.physical[1] + spec.contact_radius * ny;
    }
  }
  if (spec.family == Family::kStallTrap && !state.stalled) {
    state.stalled = in_stall_region(state.physical, spec);
  }
}

void step(EnvState& state, const ActionVec& action, const TaskSpec& spec) {
  for (int k = 0; k < spec.control_horizon; ++k) substep(state, action, spec);
  state.step_count += 1;
}

void execute_actions(EnvState& state, std::span<const ActionVec> actions,
                     const TaskSpec& spec) {
  for (const ActionVec& a : actions) substep(state, a, spec);
  state.step_count += 1;
}

bool in_stall_region(std::span<const double> physical, const TaskSpec& spec) {
  if (spec.family != Family::kStallTrap) return false;
  return std::abs(physical[1]) >= spec.stall_band_y;
}

double goal_distance(const EnvState& state, const TaskSpec& spec) {
  const std::size_t base = spec.family == Family::kPushBlock ? 2 : 0;
  const double dx = state.physical[base] - spec.goal[0];
  const double dy = state.physical[base + 1] - spec.goal[1];
  return std::hypot(dx, dy);
}

bool is_success(const EnvState& state, const TaskSpec& spec) {
  return goal_distance(state, spec) < spec.success_radius;
}

double potential_from_physical(std::span<const double> physical,
                               const TaskSpec& spec) {
  const std::size_t base = spec.family == Family::kPushBlock ? 2 : 0;
  const double dx = physical[base] - spec.goal[0];
  const double dy = physical[base + 1] - spec.goal[1];
  const double dist = std::hypot(dx, dy);
  return 1.0 - std::min(dist, kArenaDiameter) / kArenaDiameter;
}

double potential(const EnvState& state, const TaskSpec& spec) {
  return potential_from_physical(state.physical, spec);
}

}  // namespace wamlab
