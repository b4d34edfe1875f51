#include "wamlab/wam.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wamlab/errors.hpp"

namespace wamlab {

namespace {

// Keep corrupted inverse-formulation targets strictly inside the encoder
// image so atanh stays finite.
constexpr double kLatentClamp = 1.0 - 1e-9;

struct Vec2 {
  double x = 0.0, y = 0.0;
};

Vec2 unit_or(const Vec2& v, const Vec2& fallback) {
  double n = std::hypot(v.x, v.y);
  if (n < 1e-12) return fallback;
  return {v.x / n, v.y / n};
}

// Least-squares solve of (M^T M) x = M^T y for the tall encoder map,
// Gaussian elimination with partial pivoting (cols <= 4).
std::vector<double> pinv_solve(const std::vector<double>& m, int rows,
                               int cols, const std::vector<double>& y) {
  std::vector<double> a(static_cast<std::size_t>(cols) * cols, 0.0);
  std::vector<double> b(cols, 0.0);
  for (int i = 0; i < cols; ++i) {
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int r = 0; r < rows; ++r)
        acc += m[static_cast<std::size_t>(r) * cols + i] *
               m[static_cast<std::size_t>(r) * cols + j];
      a[static_cast<std::size_t>(i) * cols + j] = acc;
    }
    double acc = 0.0;
    for (int r = 0; r < rows; ++r)
      acc += m[static_cast<std::size_t>(r) * cols + i] * y[r];
    b[i] = acc;
  }
  for (int p = 0; p < cols; ++p) {
    int pivot = p;
    for (int r = p + 1; r < cols; ++r) {
      if (std::abs(a[static_cast<std::size_t>(r) * cols + p]) >
          std::abs(a[static_cast<std::size_t>(pivot) * cols + p]))
        pivot = r;
    }
    if (pivot != p) {
      for (int c = 0; c < cols; ++c)
        std::swap(a[static_cast<std::size_t>(p) * cols + c],
                  a[static_cast<std::size_t>(pivot) * cols + c]);
      std::swap(b[p], b[pivot]);
    }
    double diag = a[static_cast<std::size_t>(p) * cols + p];
    if (std::abs(diag) < 1e-300) continue;  // rank-deficient map; leave zero
    for (int r = p + 1; r < cols; ++r) {
      double f = a[static_cast<std::size_t>(r) * cols + p] / diag;
      for (int c = p; c < cols; ++c)
        a[static_cast<std::size_t>(r) * cols + c] -=
            f * a[static_cast<std::size_t>(p) * cols + c];
      b[r] -= f * b[p];
    }
  }
  std::vector<double> x(cols, 0.0);
  for (int p = cols - 1; p >= 0; --p) {
    double acc = b[p];
    for (int c = p + 1; c < cols; ++c)
      acc -= a[static_cast<std::size_t>(p) * cols + c] * x[c];
    double diag = a[static_cast<std::size_t>(p) * cols + p];
    x[p] = std::abs(diag) < 1e-300 ? 0.0 : acc / diag;
  }
  return x;
}

Vec2 aim_target(const EnvState& state, const TaskSpec& spec) {
  const double ax = state.physical[0];
  const double ay = state.physical[1];
  if (spec.family != Family::kPushBlock) {
    return {spec.goal[0], spec.goal[1]};
  }
  const double bx = state.physical[2];
  const double by = state.physical[3];
  Vec2 to_goal = unit_or({spec.goal[0] - bx, spec.goal[1] - by}, {1.0, 0.0});
  Vec2 behind = {bx - 0.95 * spec.contact_radius * to_goal.x,
                 by - 0.95 * spec.contact_radius * to_goal.y};
  Vec2 to_block = unit_or({bx - ax, by - ay}, to_goal);
  const double aligned = to_block.x * to_goal.x + to_block.y * to_goal.y;
  const double d_behind = std::hypot(ax - behind.x, ay - behind.y);
  if (aligned > 0.9 || d_behind < 0.35 * spec.contact_radius) {
    // Push phase: drive through the block toward the goal.
    return {bx + to_goal.x, by + to_goal.y};
  }
  return behind;
}

double goal_directed_speed(const EnvState& state, const TaskSpec& spec,
                           const Vec2& target) {
  const double horizon = spec.dt * spec.control_horizon;
  if (spec.family == Family::kPushBlock) {
    const double block_dist = std::hypot(state.physical[2] - spec.goal[0],
                                         state.physical[3] - spec.goal[1]);
    const double approach = std::hypot(state.physical[0] - target.x,
                                       state.physical[1] - target.y);
    return std::min(spec.max_speed, std::max(block_dist, approach) / horizon);
  }
  const double dist = std::hypot(state.physical[0] - target.x,
                                 state.physical[1] - target.y);
  return std::min(spec.max_speed, dist / horizon);
}

}  // namespace

std::string formulation_name(Formulation f) {
  return f == Formulation::kJointPrediction ? "joint" : "inverse";
}

Formulation formulation_from_name(const std::string& name) {
  if (name == "joint") return Formulation::kJointPrediction;
  if (name == "inverse") return Formulation::kInverseDynamics;
  throw ConfigError("unknown WAM formulation '" + name + "'");
}

void validate_wam(const WamSpec& wam, const std::string& name) {
  auto fail = [&](const std::string& what) {
    throw ConfigError("wam '" + name + "': " + what);
  };
  if (wam.pred_noise_std < 0.0) fail("pred_noise_std must be >= 0");
  if (wam.policy_noise_std < 0.0) fail("policy_noise_std must be >= 0");
  if (wam.value_noise_std < 0.0) fail("value_noise_std must be >= 0");
  if (wam.competence < 0.0 || wam.competence > 1.0) fail("competence must be in [0, 1]");
  if (!(wam.stall_threshold > 0.0)) fail("stall_threshold must be > 0");
  if (wam.stall_persistence < 1) fail("stall_persistence must be >= 1");
  if (wam.perturbed_noise_scale < 0.0) fail("perturbed_noise_scale must be >= 0");
}

RngStream branch_stream(const StreamLabel& label, uint64_t branch) {
  return derive_stream(label.master, label.episode, label.step, branch);
}

ActionVec sample_policy_action(const EnvState& state, const TaskSpec& spec,
                               const WamSpec& wam, RngStream& rs,
                               bool* perturbed) {
  const bool off_task = rs.uniform() >= wam.competence;
  double heading;
  double speed;
  if (off_task) {
    // Perturbed branch: a full-speed step in a uniformly random heading.
    heading = -std::numbers::pi + 2.0 * std::numbers::pi * rs.uniform();
    speed = spec.max_speed;
  } else {
    const Vec2 target = aim_target(state, spec);
    heading = std::atan2(target.y - state.physical[1],
                         target.x - state.physical[0]);
    speed = goal_directed_speed(state, spec, target);
  }
  heading = wrap_angle(heading + wam.policy_noise_std * rs.gaussian());
  if (perturbed != nullptr) *perturbed = off_task;
  return ActionVec{{speed}, {heading}};
}

std::vector<Branch> sample_branches(const EnvState& state,
                                    const Observation& obs,
                                    const TaskSpec& spec, const WamSpec& wam,
                                    int n, int stall_run,
                                    const StreamLabel& label) {
  if (n < 1) throw std::invalid_argument("sample_branches: n must be >= 1");
  // Bias may be scalar (applied to every coordinate) or full latent_dim.
  if (!wam.bias.empty() && wam.bias.size() != 1 &&
      static_cast<int>(wam.bias.size()) != spec.latent_dim) {
    throw ConfigError("wam bias dimension does not match task latent_dim");
  }
  const bool collapsed = wam.collapse_mode == CollapseMode::kOnStall &&
                         stall_run >= wam.stall_persistence;

  std::vector<Branch> branches;
  branches.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RngStream rs = branch_stream(label, static_cast<uint64_t>(i));
    Branch br;
    ActionVec action = sample_policy_action(state, spec, wam, rs,
                                            &br.policy_perturbed);

    // Reachable future under the sampled action: true dynamics, no noise.
    EnvState rolled = state;
    for (int k = 0; k < spec.control_horizon; ++k)
      substep(rolled, action, spec, /*use_noise=*/false);
    LatentVec future = encode_latent(rolled.physical, spec);

    const double sigma =
        wam.pred_noise_std *
        (br.policy_perturbed ? wam.perturbed_noise_scale : 1.0);
    for (std::size_t k = 0; k < future.size(); ++k) {
      double e = sigma * rs.gaussian();
      if (!wam.bias.empty()) e += wam.bias[wam.bias.size() == 1 ? 0 : k];
      future[k] += e;
    }

    if (wam.formulation == Formulation::kInverseDynamics) {
      // The world-model half emits a valid latent; the action is whatever
      // realizes it, so the action-future coupling is explicit.
      for (double& z : future) z = std::clamp(z, -kLatentClamp, kLatentClamp);
      InverseResult inv = invert_dynamics(state, future, spec);
      action = inv.action;
      br.action_clamped = inv.clamped;
    }

    br.predicted_future = collapsed ? obs.latent : future;
    br.actions.assign(static_cast<std::size_t>(spec.control_horizon), action);
    if (wam.value_head) {
      const double v = potential_from_physical(rolled.physical, spec);
      br.predicted_value =
          wam.value_miscalibration * v + wam.value_noise_std * rs.gaussian();
    }
    branches.push_back(std::move(br));
  }
  return branches;
}

double predict_value(const Observation& obs, const TaskSpec& spec,
                     const WamSpec& wam, RngStream& rs) {
  const double v = potential_from_physical(obs.proprio, spec);
  return wam.value_miscalibration * v + wam.value_noise_std * rs.gaussian();
}

InverseResult invert_dynamics(const EnvState& current,
                              const LatentVec& target_latent,
                              const TaskSpec& spec) {
  if (static_cast<int>(target_latent.size()) != spec.latent_dim) {
    throw std::invalid_argument(
        "invert_dynamics: latent dimension mismatch (" +
        std::to_string(target_latent.size()) + " vs " +
        std::to_string(spec.latent_dim) + ")");
  }
  InverseResult out;
  std::vector<double> pre(target_latent.size());
  for (std::size_t k = 0; k < target_latent.size(); ++k) {
    double z = target_latent[k];
    if (std::abs(z) >= kLatentClamp) {
      z = std::clamp(z, -kLatentClamp, kLatentClamp);
      out.clamped = true;
    }
    pre[k] = std::atanh(z);
  }
  const auto m = latent_map(spec);
  const std::vector<double> target_phys =
      pinv_solve(m, spec.latent_dim, spec.state_dim(), pre);

  // Only the agent coordinates respond to the action in the linearized
  // dynamics, so the least-squares action matches the agent part exactly.
  const double dx = target_phys[0] - current.physical[0];
  const double dy = target_phys[1] - current.physical[1];
  const double dist = std::hypot(dx, dy);

  double attenuation = 1.0;
  if (spec.family == Family::kStallTrap && current.stalled)
    attenuation = spec.stall_factor;

  double speed;
  if (dist < 1e-12) {
    speed = 0.0;
  } else if (attenuation <= 0.0) {
    speed = spec.max_speed;  // no action moves a fully stalled agent
    out.clamped = true;
  } else {
    speed = dist / (attenuation * spec.dt * spec.control_horizon);
  }
  if (speed > spec.max_speed) {
    speed = spec.max_speed;
    out.clamped = true;
  }
  const double heading = dist < 1e-12 ? 0.0 : std::atan2(dy, dx);
  out.action = ActionVec{{speed}, {wrap_angle(heading)}};
  return out;
}

}  // namespace wamlab
