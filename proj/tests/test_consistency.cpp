#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "wamlab/consistency.hpp"

using namespace wamlab;

TEST_SUITE_BEGIN("consistency");

TEST_CASE("identical latents score exactly 1") {
  const LatentVec z{0.4, -0.9, 0.02};
  CHECK(consistency_score(z, z, {}) == 1.0);
}

TEST_CASE("alpha=0.1, mse=5 -> exp(-0.5), checked against long double") {
  // (1 + 9) / 2 = 5 exactly in binary floating point.
  const LatentVec a{0.0, 0.0};
  const LatentVec b{1.0, 3.0};
  const double c = consistency_score(a, b, {});
  const long double oracle = expl(-0.1L * 5.0L);
  CHECK(std::abs(c - static_cast<double>(oracle)) < 1e-12);
  CHECK(c == doctest::Approx(0.6065307).epsilon(1e-7));
}

TEST_CASE("default alpha is 0.1") {
  CHECK(ConsistencyConfig{}.alpha == 0.1);
}

TEST_CASE("doubling alpha squares the score") {
  RngStream rs(21);
  for (int trial = 0; trial < 100; ++trial) {
    LatentVec a(6), b(6);
    for (int k = 0; k < 6; ++k) {
      a[k] = rs.gaussian();
      b[k] = rs.gaussian();
    }
    const double c1 = consistency_score(a, b, {0.1, DistanceKind::kMse});
    const double c2 = consistency_score(a, b, {0.2, DistanceKind::kMse});
    CHECK(std::abs(c2 - c1 * c1) < 1e-12);
  }
}

TEST_CASE("score lies in (0, 1] and decreases along rays") {
  RngStream rs(22);
  for (int ray = 0; ray < 100; ++ray) {
    LatentVec realized(4), dir(4);
    for (int k = 0; k < 4; ++k) {
      realized[k] = rs.gaussian();
      dir[k] = rs.gaussian();
    }
    double prev = 1.0;
    for (double t : {0.1, 0.3, 0.9, 2.7, 8.1}) {
      LatentVec predicted = realized;
      for (int k = 0; k < 4; ++k) predicted[k] += t * dir[k];
      const double c = consistency_score(predicted, realized, {});
      CHECK(c > 0.0);
      CHECK(c <= 1.0);
      CHECK(c < prev);
      prev = c;
    }
  }
}

TEST_CASE("latent_change equals mse_distance") {
  CHECK(latent_change({0.5, 0.5}, {0.5, 0.5}) == 0.0);
  CHECK(latent_change({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(12.5).epsilon(1e-15));
  RngStream rs(23);
  for (int trial = 0; trial < 50; ++trial) {
    LatentVec a(3), b(3);
    for (int k = 0; k < 3; ++k) {
      a[k] = rs.gaussian();
      b[k] = rs.gaussian();
    }
    CHECK(latent_change(a, b) == mse_distance(a, b));
  }
}

TEST_CASE("episode_consistency is the mean of per-step scores") {
  auto step = [](double c) {
    StepDiagnostics s;
    s.c_t = c;
    return s;
  };
  CHECK(episode_consistency({step(1.0), step(1.0), step(1.0)}) == 1.0);
  CHECK(episode_consistency({step(0.2), step(0.4), step(0.6)}) ==
        doctest::Approx(0.4).epsilon(1e-15));
  CHECK(episode_consistency({step(0.37)}) == 0.37);
  CHECK_THROWS_AS(episode_consistency({}), std::invalid_argument);
}

TEST_CASE("alpha must be positive") {
  CHECK_THROWS_AS(consistency_score({0.0}, {1.0}, {0.0, DistanceKind::kMse}),
                  std::invalid_argument);
}

TEST_SUITE_END();
