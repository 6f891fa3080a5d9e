#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "retarget/error.hpp"
#include "retarget/metrics.hpp"

using namespace retarget;

namespace {

Trajectory window(int n, double left, double width) {
  Trajectory tr;
  for (int t = 0; t < n; ++t) {
    tr.x_star.push_back(left + width / 2);
    tr.z.push_back(1.0);
    tr.crop_rects.push_back({left, 0, width, 100});
  }
  return tr;
}

}  // namespace

TEST_CASE("centred gaze is fully included") {
  std::vector<GazeSample> s;
  for (int t = 1; t <= 10; ++t)
    for (int u = 1; u <= 3; ++u) s.push_back({u, t, 500, 50, true});
  const GazeSet gs(s, {1000, 100, 25, 10});
  const auto rep = included_gaze(gs, centered_window(gs, 300));
  CHECK(rep.included_pct == 100.0);
  CHECK(rep.n_samples == 30);
}

TEST_CASE("two points, one covered") {
  std::vector<GazeSample> s;
  for (int t = 1; t <= 10; ++t) {
    s.push_back({1, t, 100, 50, true});
    s.push_back({2, t, 900, 50, true});
  }
  s.push_back({3, 1, 950, 50, false});
  const GazeSet gs(s, {1000, 100, 25, 10});
  const auto rep = included_gaze(gs, window(10, 0, 300));
  CHECK(rep.included_pct == 50.0);
  CHECK(rep.n_samples == 20);
  for (double f : rep.per_frame_included) CHECK(f == 0.5);
}

TEST_CASE("window edges are half open") {
  const GazeSet gs({{1, 1, 100, 1, true}, {2, 1, 400, 1, true}}, {1000, 100, 25, 1});
  CHECK(included_gaze(gs, window(1, 100, 300)).n_included == 1);
}

TEST_CASE("sample-weighted mean and full frame") {
  const SynthSpec spec{Regime::Saccade, 4, 300, {1600, 360, 25, 0}, 40, 500, 180, 0, 150, 800};
  const GazeSet gs = generate(spec, 9);
  const auto rep = included_gaze(gs, centered_window(gs, 480));
  double weighted = 0;
  for (std::size_t t = 0; t < rep.per_frame_included.size(); ++t) weighted += rep.per_frame_included[t] * rep.per_frame_samples[t];
  CHECK(rep.included_pct == doctest::Approx(100.0 * weighted / static_cast<double>(rep.n_samples)));
  CHECK(rep.included_pct >= 0);
  CHECK(rep.included_pct <= 100);
  CHECK(included_gaze(gs, centered_window(gs, 1600)).included_pct == 100.0);
  // wider never includes less
  double prev = 0;
  for (double w = 200; w <= 1600; w += 200) {
    const double pct = included_gaze(gs, centered_window(gs, w)).included_pct;
    CHECK(pct >= prev);
    prev = pct;
  }
}

TEST_CASE("errors") {
  const GazeSet gs({{1, 1, 100, 1, true}}, {1000, 100, 25, 2});
  CHECK_THROWS_AS(included_gaze(gs, window(3, 0, 100)), Error);
  const GazeSet none({{1, 1, 100, 1, false}}, {1000, 100, 25, 1});
  try {
    included_gaze(none, window(1, 0, 100));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInput);
  }
}

TEST_CASE("fixation generator without noise sits on the anchor") {
  SynthSpec spec;
  spec.noise_sd = 0;
  spec.anchor_x = 612.5;
  const GazeSet gs = generate(spec, 1);
  CHECK(gs.samples().size() == 2500);
  for (const auto& s : gs.samples()) {
    CHECK(s.x == 612.5);
    CHECK(s.valid);
  }
}

TEST_CASE("saccade generator jumps by the requested amount") {
  SynthSpec spec;
  spec.regime = Regime::Saccade;
  spec.n_frames = 200;
  spec.jump_frame = 100;
  spec.jump = 400;
  spec.anchor_x = 500;
  const GazeSet gs = generate(spec, 2);
  for (int u = 1; u <= spec.n_users; ++u) {
    double before = 0, after = 0;
    for (const auto& s : gs.samples()) {
      if (s.user_id != u) continue;
      (s.frame < 100 ? before : after) += s.x;
    }
    CHECK(after / 101 - before / 99 == doctest::Approx(400).epsilon(0.02));
  }
}

TEST_CASE("pursuit slope matches the requested velocity") {
  SynthSpec spec;
  spec.regime = Regime::Pursuit;
  spec.anchor_x = 300;
  spec.velocity = 2.5;
  spec.n_frames = 400;
  const GazeSet gs = generate(spec, 3);
  double st = 0, sx = 0, stt = 0, stx = 0, n = 0;
  for (const auto& s : gs.samples()) {
    st += s.frame;
    sx += s.x;
    stt += static_cast<double>(s.frame) * s.frame;
    stx += s.frame * s.x;
    ++n;
  }
  const double slope = (n * stx - st * sx) / (n * stt - st * st);
  CHECK(std::abs(slope - 2.5) <= 3 * spec.noise_sd / std::sqrt(spec.n_frames));
}

TEST_CASE("generator is deterministic and round-trips through CSV") {
  SynthSpec spec;
  spec.regime = Regime::Mixed;
  spec.n_frames = 700;
  const GazeSet a = generate(spec, 42);
  CHECK(a == generate(spec, 42));
  CHECK_FALSE(a == generate(spec, 43));
  std::ostringstream out;
  write_gaze_csv(out, a);
  std::istringstream in(out.str());
  FrameGeometry g = spec.geometry;
  g.n_frames = spec.n_frames;
  CHECK(load_gaze(in, g).gaze == a);
}

TEST_CASE("spec validation and regime names") {
  SynthSpec spec;
  spec.regime = Regime::Pursuit;
  spec.velocity = 10;
  CHECK_THROWS_AS(generate(spec, 1), Error);
  spec = SynthSpec{};
  spec.noise_sd = -1;
  CHECK_THROWS_AS(generate(spec, 1), Error);
  CHECK(parse_regime("saccade") == Regime::Saccade);
  CHECK(std::string(to_string(Regime::Pursuit)) == "pursuit");
  CHECK_THROWS_AS(parse_regime("wander"), Error);
}

TEST_CASE("report JSON") {
  const GazeSet gs({{1, 1, 100, 1, true}, {2, 1, 700, 1, true}}, {1000, 100, 25, 1});
  const auto j = to_json(included_gaze(gs, window(1, 0, 300)), true);
  CHECK(j["included_pct"].get<double>() == 50.0);
  CHECK(j["n_samples"].get<int>() == 2);
  CHECK(j.contains("per_frame_included"));
}
