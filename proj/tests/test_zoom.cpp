#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "retarget/zoom.hpp"

using namespace retarget;

namespace {

DispersionSeries series(std::vector<double> sigma) {
  DispersionSeries ds;
  ds.defined_mask.assign(sigma.size(), true);
  ds.sigma = std::move(sigma);
  return ds;
}

}  // namespace

TEST_CASE("ratio examples") {
  CHECK(zoom_ratio(40, 40) == 1.0);
  CHECK(zoom_ratio(0, 40) == doctest::Approx(0.7));
  CHECK(zoom_ratio(20, 40) == doctest::Approx(0.85));
  CHECK(zoom_ratio(5, 0) == 1.0);
  CHECK(zoom_ratio(80, 40) == 1.0);
}

TEST_CASE("per-segment normalizer") {
  const auto zt = compute_zoom_targets(series({10, 20, 40, 5, 5, 10}), {4});
  CHECK(zt.sigma_max == std::vector<double>{40, 40, 40, 10, 10, 10});
  CHECK(zt.rho[0] == doctest::Approx(0.775));
  CHECK(zt.rho[2] == doctest::Approx(1.0));
  CHECK(zt.rho[3] == doctest::Approx(0.85));
  CHECK(zt.rho[5] == doctest::Approx(1.0));
}

TEST_CASE("zero dispersion segment is fully wide") {
  const auto zt = compute_zoom_targets(series({0, 0, 0, 3, 6}), {4});
  CHECK(zt.rho[0] == 1.0);
  CHECK(zt.rho[2] == 1.0);
  CHECK(zt.rho[3] == doctest::Approx(0.85));
}

TEST_CASE("single-frame segment inherits the previous value") {
  const auto zt = compute_zoom_targets(series({2, 4, 100, 1, 1}), {3, 4});
  CHECK(zt.rho[2] == zt.rho[1]);
  CHECK(zt.sigma_max[2] == 4);
  const auto first = compute_zoom_targets(series({7, 1, 2}), {2});
  CHECK(first.rho[0] == 1.0);  // a leading single frame is its own maximum
}

TEST_CASE("range and monotonicity on random input") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> s(200);
  for (double& v : s) v = u(rng);
  const auto zt = compute_zoom_targets(series(s), {50, 120, 121, 180});
  for (double r : zt.rho) {
    CHECK(r >= 0.7);
    CHECK(r <= 1.0);
  }
  double prev = -1;
  for (double sigma = 0; sigma <= 50; sigma += 0.5) {
    const double r = zoom_ratio(sigma, 50);
    CHECK(r >= prev);
    prev = r;
  }
  const auto zero = compute_zoom_targets(series(std::vector<double>(10, 0.0)), {});
  for (double r : zero.rho) CHECK(r == 1.0);
}
