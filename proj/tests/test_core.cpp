#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wamlab/core.hpp"

using namespace wamlab;

TEST_SUITE_BEGIN("core");

TEST_CASE("mse_distance basics") {
  CHECK(mse_distance({1.0, -2.0, 0.5}, {1.0, -2.0, 0.5}) == 0.0);
  // (9 + 16) / 2
  CHECK(mse_distance({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(12.5).epsilon(1e-15));
  // (2)^2 / 1
  CHECK(mse_distance({1.0}, {-1.0}) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("mse_distance dimension mismatch names both dimensions") {
  try {
    mse_distance({1.0, 2.0}, {1.0, 2.0, 3.0});
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find('2') != std::string::npos);
    CHECK(msg.find('3') != std::string::npos);
  }
}

TEST_CASE("mse_distance symmetry and zero-iff-equal") {
  RngStream rs(101);
  for (int trial = 0; trial < 200; ++trial) {
    LatentVec a(5), b(5);
    for (int k = 0; k < 5; ++k) {
      a[k] = rs.gaussian();
      b[k] = rs.gaussian();
    }
    CHECK(mse_distance(a, b) == mse_distance(b, a));
    CHECK(mse_distance(a, b) > 0.0);  // distinct gaussians: equal has measure 0
    CHECK(mse_distance(a, a) == 0.0);
  }
}

TEST_CASE("mean_latent examples") {
  const LatentVec v{0.3, -1.7, 2.2};
  CHECK(mean_latent({v, v, v}) == v);
  CHECK(mean_latent({{0.0, 0.0}, {2.0, 4.0}}) == LatentVec{1.0, 2.0});
  CHECK(mean_latent({{1.0}, {2.0}, {6.0}}) == LatentVec{3.0});
  CHECK_THROWS_AS(mean_latent({}), std::invalid_argument);
  CHECK_THROWS_AS(mean_latent({{1.0}, {1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("mean_latent minimizes the summed mse over candidates") {
  RngStream rs(7);
  std::vector<LatentVec> vs;
  for (int i = 0; i < 9; ++i) {
    LatentVec v(4);
    for (auto& x : v) x = rs.gaussian();
    vs.push_back(v);
  }
  const LatentVec mean = mean_latent(vs);
  auto objective = [&](const LatentVec& c) {
    double sum = 0.0;
    for (const auto& v : vs) sum += mse_distance(c, v);
    return sum;
  };
  const double at_mean = objective(mean);
  for (std::size_t k = 0; k < mean.size(); ++k) {
    for (double delta : {-0.37, -1e-3, 1e-3, 0.37}) {
      LatentVec perturbed = mean;
      perturbed[k] += delta;
      CHECK(objective(perturbed) >= at_mean);
    }
  }
}

TEST_CASE("derive_stream determinism and label sensitivity") {
  RngStream a = derive_stream(9, 8, 7, 6);
  RngStream b = derive_stream(9, 8, 7, 6);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream base = derive_stream(1, 2, 3, 0);
  RngStream branch1 = derive_stream(1, 2, 3, 1);
  int differing = 0;
  for (int i = 0; i < 64; ++i) {
    if (base.next_u64() != branch1.next_u64()) ++differing;
  }
  CHECK(differing == 64);

  // Every label word matters.
  const uint64_t k0 = derive_stream(1, 2, 3, 4).key();
  CHECK(k0 != derive_stream(2, 2, 3, 4).key());
  CHECK(k0 != derive_stream(1, 3, 3, 4).key());
  CHECK(k0 != derive_stream(1, 2, 4, 4).key());
  CHECK(k0 != derive_stream(1, 2, 3, 5).key());
  // Swapping words changes the stream (order-sensitive absorption).
  CHECK(derive_stream(1, 2, 3, 4).key() != derive_stream(4, 3, 2, 1).key());
}

TEST_CASE("derive_stream golden value") {
  // Frozen on first run; any change to the derivation breaks replay of
  // recorded datasets.
  RngStream rs = derive_stream(1, 2, 3, 4);
  CHECK(rs.key() == 15780836028373372126ULL);
  CHECK(rs.next_u64() == 3579812253222992947ULL);
  CHECK(rs.next_u64() == 17497121976946928050ULL);
}

TEST_CASE("uniform range and gaussian moments") {
  RngStream rs(424242);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rs.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double g = rs.gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("stream state replays after copy") {
  RngStream rs(5);
  rs.next_u64();
  RngStream copy = rs;
  CHECK(copy.uniform() == rs.uniform());
  CHECK(copy.gaussian() == rs.gaussian());
}

TEST_CASE("wrap_angle") {
  const double pi = std::numbers::pi;
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(pi) == doctest::Approx(-pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(-pi));
  CHECK(wrap_angle(1.5 * pi) == doctest::Approx(-0.5 * pi));
  CHECK(wrap_angle(-2.5 * pi) == doctest::Approx(-0.5 * pi));
  CHECK(wrap_angle(3.0) == 3.0);
  RngStream rs(11);
  for (int i = 0; i < 100; ++i) {
    const double w = wrap_angle(20.0 * rs.gaussian());
    CHECK(w >= -pi);
    CHECK(w < pi);
  }
}

TEST_SUITE_END();
