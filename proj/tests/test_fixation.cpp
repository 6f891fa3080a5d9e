#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "retarget/error.hpp"
#include "retarget/fixation.hpp"

using namespace retarget;

namespace {

GazeSet make(const std::vector<GazeSample>& s, int width, int frames, double fps = 30.0) {
  return GazeSet(s, {width, 400, fps, frames});
}

double pop_sd(const std::vector<double>& v) {
  double m = 0, ss = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("min duration frames") {
  CHECK(min_duration_frames(200, 30) == 6);
  CHECK(min_duration_frames(200, 25) == 5);
  CHECK(min_duration_frames(200, 24) == 5);
  const auto p = FixationParams::for_width(1000);
  CHECK(p.t1 == 40);
  CHECK(p.t2 == 20);
}

TEST_CASE("stationary gaze gives one fixation") {
  std::vector<GazeSample> s;
  for (int t = 1; t <= 60; ++t) s.push_back({1, t, 100, 100, true});
  const auto fx = detect_fixations(make(s, 1000, 60), {40, 20, 200});
  REQUIRE(fx.size() == 1);
  CHECK(fx[0].start_frame == 1);
  CHECK(fx[0].end_frame == 60);
  CHECK(fx[0].centroid_x == 100);
  CHECK(fx[0].centroid_y == 100);
}

TEST_CASE("alternating gaze has no fixation") {
  std::vector<GazeSample> s;
  for (int t = 1; t <= 60; ++t) s.push_back({1, t, t % 2 ? 0.0 : 500.0, 100, true});
  CHECK(detect_fixations(make(s, 1000, 60), {40, 20, 200}).empty());
}

TEST_CASE("outlier is rejected in step 2") {
  // t1 wide enough to admit the outlier into the cluster, t2 tight enough to drop it.
  const double t1 = 250, t2 = 50;
  std::vector<GazeSample> s;
  std::vector<double> xs;
  for (int t = 1; t <= 30; ++t) {
    const double x = t == 15 ? 300.0 : 100.0 + 2.0 * std::sin(t);
    s.push_back({1, t, x, 100, true});
    xs.push_back(x);
  }
  // Hand-run: step 1 keeps every sample (running centroid never drifts past t1).
  double cx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) REQUIRE(std::abs(xs[i] - cx) <= t1);
    cx += (xs[i] - cx) / static_cast<double>(i + 1);
  }
  double kept = 0;
  int n = 0;
  for (double x : xs)
    if (std::abs(x - cx) <= t2) {
      kept += x;
      ++n;
    }
  REQUIRE(n == 29);
  const auto fx = detect_fixations(make(s, 1000, 30), {t1, t2, 200});
  REQUIRE(fx.size() == 1);
  CHECK(fx[0].centroid_x == doctest::Approx(kept / n).epsilon(1e-12));
  CHECK(std::abs(fx[0].centroid_x - 100) < 2);
  CHECK(fx[0].start_frame == 1);
  CHECK(fx[0].end_frame == 30);
}

TEST_CASE("short clusters are dropped") {
  std::vector<GazeSample> s;
  for (int t = 1; t <= 5; ++t) s.push_back({1, t, 100, 100, true});
  for (int t = 6; t <= 20; ++t) s.push_back({1, t, 600, 100, true});
  const auto fx = detect_fixations(make(s, 1000, 20), {40, 20, 200});
  REQUIRE(fx.size() == 1);
  CHECK(fx[0].start_frame == 6);
}

TEST_CASE("fixation invariants on noisy multi-user gaze") {
  std::mt19937 rng(11);
  std::normal_distribution<double> noise(0, 6);
  std::vector<GazeSample> s;
  const double t1 = 40, t2 = 20;
  for (int u = 1; u <= 4; ++u) {
    double anchor = 100.0 * u;
    for (int t = 1; t <= 300; ++t) {
      if (t % 37 == 0) anchor = 100 + static_cast<double>(rng() % 700);
      if (rng() % 10 == 0) continue;
      s.push_back({u, t, std::clamp(anchor + noise(rng), 0.0, 999.0), 200 + noise(rng), true});
    }
  }
  const GazeSet gs = make(s, 1000, 300);
  const auto fx = detect_fixations(gs, {t1, t2, 200});
  CHECK(fx.size() > 10);
  for (std::size_t i = 0; i < fx.size(); ++i) {
    CHECK(fx[i].duration_frames() >= min_duration_frames(200, 30));
    if (i > 0 && fx[i - 1].user_id == fx[i].user_id) CHECK(fx[i - 1].end_frame < fx[i].start_frame);
    // the samples at the span ends are retained members
    for (const auto& g : gs.samples()) {
      if (g.user_id != fx[i].user_id || (g.frame != fx[i].start_frame && g.frame != fx[i].end_frame)) continue;
      CHECK(std::hypot(g.x - fx[i].centroid_x, g.y - fx[i].centroid_y) <= t1);
    }
  }
  const auto ds = dispersion_series(fx, gs);
  for (double v : ds.sigma) CHECK(v >= 0);
}

TEST_CASE("dispersion examples") {
  std::vector<GazeSample> s;
  for (int u = 1; u <= 5; ++u)
    for (int t = 1; t <= 20; ++t) s.push_back({u, t, 200, 100, true});
  const GazeSet same = make(s, 1000, 20);
  const auto ds = dispersion_series(detect_fixations(same, {40, 20, 200}), same);
  for (double v : ds.sigma) CHECK(v == 0);

  std::vector<Fixation> two{{1, 1, 10, 100, 0}, {2, 1, 10, 300, 0}};
  const GazeSet g2 = make({{1, 1, 100, 1, true}}, 1000, 10);
  const auto d2 = dispersion_series(two, g2);
  for (double v : d2.sigma) CHECK(v == doctest::Approx(100));
  CHECK_FALSE(d2.used_raw_fallback);
}

TEST_CASE("mixed availability matches a per-frame oracle with fill") {
  std::vector<Fixation> fx{{1, 2, 6, 100, 0}, {2, 3, 8, 160, 0}, {3, 5, 10, 400, 0}, {1, 8, 9, 50, 0}};
  const GazeSet gs = make({{1, 1, 1, 1, true}}, 1000, 10);
  const auto ds = dispersion_series(fx, gs);
  std::vector<double> expect(10, 0);
  std::vector<bool> mask(10, false);
  for (int t = 1; t <= 10; ++t) {
    std::vector<double> active;
    for (const auto& f : fx)
      if (t >= f.start_frame && t <= f.end_frame) active.push_back(f.centroid_x);
    if (active.size() >= 2) {
      expect[static_cast<std::size_t>(t - 1)] = pop_sd(active);
      mask[static_cast<std::size_t>(t - 1)] = true;
    }
  }
  CHECK(ds.defined_mask == mask);
  // frames 1-2 back-filled from frame 3; frame 10 forward-filled from 9
  expect[0] = expect[1] = expect[2];
  expect[9] = expect[8];
  for (int t = 0; t < 10; ++t) CHECK(ds.sigma[static_cast<std::size_t>(t)] == doctest::Approx(expect[static_cast<std::size_t>(t)]));
}

TEST_CASE("fallbacks") {
  // single user: no two concurrent fixations, raw dispersion also undefined
  std::vector<GazeSample> s;
  for (int t = 1; t <= 20; ++t) s.push_back({1, t, 100, 100, true});
  const GazeSet one = make(s, 1000, 20);
  const auto ds = dispersion_series(detect_fixations(one, {40, 20, 200}), one);
  CHECK(ds.used_raw_fallback);
  CHECK(ds.warnings.size() == 2);
  for (double v : ds.sigma) CHECK(v == 0);

  // two users, fixations never overlap: raw gaze dispersion is used
  std::vector<GazeSample> r{{1, 1, 100, 1, true}, {2, 1, 300, 1, true}, {1, 2, 100, 1, true}};
  const GazeSet raw = make(r, 1000, 2);
  const auto d2 = dispersion_series({}, raw);
  CHECK(d2.used_raw_fallback);
  CHECK(d2.sigma[0] == doctest::Approx(100));
  CHECK(d2.sigma[1] == doctest::Approx(100));
}

TEST_CASE("parameter validation") {
  const GazeSet gs = make({{1, 1, 1, 1, true}}, 100, 1);
  CHECK_THROWS_AS(detect_fixations(gs, {10, 20, 200}), Error);
  CHECK_THROWS_AS(detect_fixations(gs, {40, 20, 0}), Error);
}
