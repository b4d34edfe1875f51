#include "wamlab/core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wamlab {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Per-word absorption constants (wyhash secrets); distinct so that swapping
// two label words changes the derived key.
constexpr uint64_t kSecret[4] = {
    0xA0761D6478BD642FULL,
    0xE7037ED1A0B428DBULL,
    0x8EBC6AF09C88C6E3ULL,
    0x589965CC75374CC3ULL,
};

}  // namespace

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  return w - std::numbers::pi;
}

uint64_t mix64(uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

uint64_t hash_label(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  uint64_t h = kGolden;
  h = mix64(h ^ (a + kSecret[0]));
  h = mix64(h ^ (b + kSecret[1]));
  h = mix64(h ^ (c + kSecret[2]));
  h = mix64(h ^ (d + kSecret[3]));
  return h;
}

RngStream derive_stream(uint64_t master_seed, uint64_t episode, uint64_t step,
                        uint64_t branch) {
  return RngStream(hash_label(master_seed, episode, step, branch));
}

uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
  // Cosine half of Box-Muller; u1 shifted into (0, 1] to keep log finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::gaussian(double mean, double std) {
  return mean + std * gaussian();
}

RngStream RngStream::split() { return RngStream(next_u64()); }

double mse_distance(const LatentVec& a, const LatentVec& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("mse_distance: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

LatentVec mean_latent(const std::vector<LatentVec>& vs) {
  if (vs.empty()) {
    throw std::invalid_argument("mean_latent: empty list");
  }
  const std::size_t dim = vs.front().size();
  LatentVec mean(dim, 0.0);
  for (const auto& v : vs) {
    if (v.size() != dim) {
      throw std::invalid_argument("mean_latent: dimension mismatch (" +
                                  std::to_string(dim) + " vs " +
                                  std::to_string(v.size()) + ")");
    }
    for (std::size_t k = 0; k < dim; ++k) mean[k] += v[k];
  }
  for (double& m : mean) m /= static_cast<double>(vs.size());
  return mean;
}

}  // namespace wamlab
