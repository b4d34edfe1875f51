#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace wamlab {

// Latent observation embedding z. Dimension is fixed per task; entries are
// finite real coordinates.
using LatentVec = std::vector<double>;

// Control command split into linear components and angular components.
// Angular entries are radians, wrapped to [-pi, pi).
struct ActionVec {
  std::vector<double> linear;
  std::vector<double> angular;

  std::size_t dim() const { return linear.size() + angular.size(); }
  bool operator==(const ActionVec&) const = default;
};

// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

// Counter-based random stream. The key is derived from a
// (master seed, episode, step, branch) label; an identical (key, cursor)
// replays the identical draw sequence, so streams can be stored inside
// value-semantic state and snapshot/restored.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(uint64_t key) : key_(key) {}

  uint64_t next_u64();
  double uniform();                        // [0, 1), 53-bit
  double gaussian();                       // N(0, 1), Box-Muller (two draws)
  double gaussian(double mean, double std);

  // Derives an independent child stream by consuming one draw.
  RngStream split();

  uint64_t key() const { return key_; }
  uint64_t cursor() const { return counter_; }

  bool operator==(const RngStream&) const = default;

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

// 64-bit avalanche finalizer (Stafford mix13). Changing any input bit
// flips each output bit with probability ~1/2.
uint64_t mix64(uint64_t x);

// FNV-1a over bytes; used to turn task/preset names into stream labels.
uint64_t fnv1a(std::string_view s);

// Order-sensitive combination of four 64-bit labels into one stream key.
uint64_t hash_label(uint64_t a, uint64_t b, uint64_t c, uint64_t d);

// Splittable derivation: same 4-tuple -> same stream, any change -> an
// independent-appearing stream.
RngStream derive_stream(uint64_t master_seed, uint64_t episode, uint64_t step,
                        uint64_t branch);

// Mean squared difference (1/D) * sum_k (a_k - b_k)^2. Symmetric, zero iff
// the vectors are elementwise equal. Throws std::invalid_argument on
// dimension mismatch, naming both dimensions.
double mse_distance(const LatentVec& a, const LatentVec& b);

// Componentwise arithmetic mean of a nonempty list of equal-dimension
// vectors. Throws std::invalid_argument on an empty list or mismatch.
LatentVec mean_latent(const std::vector<LatentVec>& vs);

}  // namespace wamlab
