#include "wamlab/consistency.hpp"

#include <cmath>
#include <stdexcept>

namespace wamlab {

double consistency_score(const LatentVec& predicted, const LatentVec& realized,
                         const ConsistencyConfig& cfg) {
  if (!(cfg.alpha > 0.0)) {
    throw std::invalid_argument("consistency_score: alpha must be > 0");
  }
  return std::exp(-cfg.alpha * mse_distance(predicted, realized));
}

double latent_change(const LatentVec& z_now, const LatentVec& z_future) {
  return mse_distance(z_now, z_future);
}

double episode_consistency(const std::vector<StepDiagnostics>& steps) {
  if (steps.empty()) {
    throw std::invalid_argument("episode_consistency: empty step list");
  }
  double sum = 0.0;
  for (const auto& s : steps) sum += s.c_t;
  return sum / static_cast<double>(steps.size());
}

}  // namespace wamlab
