#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "retarget/error.hpp"
#include "retarget/gaze.hpp"

using namespace retarget;

namespace {

const FrameGeometry kGeom{200, 100, 30.0, 0};

LoadResult load(const std::string& text, FrameGeometry g = kGeom) {
  std::istringstream in(text);
  return load_gaze(in, g);
}

}  // namespace

TEST_CASE("single record maps directly") {
  const auto r = load("user,frame,x,y\n1,3,100.0,50.0\n");
  REQUIRE(r.gaze.samples().size() == 1);
  const GazeSample& s = r.gaze.samples()[0];
  CHECK(s == GazeSample{1, 3, 100.0, 50.0, true});
  CHECK(r.gaze.n_frames() == 3);
  CHECK(r.gaze.frame_samples(3).size() == 1);
  CHECK(r.gaze.frame_samples(1).empty());
  CHECK(r.warnings.total() == 0);
}

TEST_CASE("out-of-bounds sample is invalid, not clamped") {
  const auto r = load("user,frame,x,y\n1,1,-5,50\n2,1,30,40\n");
  CHECK(r.warnings.invalid_samples == 1);
  REQUIRE(r.gaze.samples().size() == 2);
  CHECK_FALSE(r.gaze.samples()[0].valid);
  CHECK(r.gaze.samples()[0].x == -5.0);
  CHECK(r.gaze.gaze_column(1) == std::vector<double>{30});
  CHECK(r.gaze.valid_count() == 1);
}

TEST_CASE("5 users x 100 frames") {
  std::ostringstream text;
  text << "user,frame,x,y\n";
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> ux(0, 199), uy(0, 99);
  for (int u = 1; u <= 5; ++u)
    for (int t = 1; t <= 100; ++t) text << u << ',' << t << ',' << ux(rng) << ',' << uy(rng) << '\n';
  const auto r = load(text.str());
  CHECK(r.gaze.samples().size() == 500);
  CHECK(r.gaze.n_users() == 5);
  CHECK(r.gaze.n_frames() == 100);
  CHECK(r.records == 500);
}

TEST_CASE("gaze_column ordering and filtering") {
  const auto r = load("user,frame,x,y\n2,1,20,5\n1,1,10,5\n2,2,500,5\n1,2,10,5\n1,3,7,5\n2,3,8,500\n", {200, 100, 30.0, 4});
  CHECK(r.gaze.gaze_column(1) == std::vector<double>{10, 20});
  CHECK(r.gaze.gaze_column(2) == std::vector<double>{10});
  CHECK(r.gaze.gaze_column(3) == std::vector<double>{7});
  CHECK(r.gaze.gaze_column(4).empty());
  CHECK_THROWS_AS(r.gaze.gaze_column(0), Error);
  try {
    r.gaze.gaze_column(5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Index);
  }
}

TEST_CASE("time stamps map to frames") {
  const auto r = load("user,time_s,x,y\n1,0.0,10,10\n1,0.0333,11,10\n1,0.034,12,10\n1,1.0,13,10\n");
  std::vector<int> frames;
  for (const auto& s : r.gaze.samples()) frames.push_back(s.frame);
  // floor(t * 30) + 1; 0.0333 * 30 = 0.999 and 0.034 * 30 = 1.02
  CHECK(frames == std::vector<int>{1, 2, 31});
  CHECK(r.warnings.rejected_records == 1);  // second sample in frame 1
}

TEST_CASE("frames beyond N are rejected and counted") {
  FrameGeometry g = kGeom;
  g.n_frames = 5;
  const auto r = load("user,frame,x,y\n1,1,1,1\n1,6,1,1\n1,0,1,1\n1,1,2,2\n", g);
  CHECK(r.gaze.samples().size() == 1);
  CHECK(r.warnings.rejected_records == 3);
  CHECK(r.records - r.gaze.samples().size() == r.warnings.rejected_records);
}

TEST_CASE("record count bookkeeping") {
  FrameGeometry g = kGeom;
  g.n_frames = 10;
  const auto r = load("user,frame,x,y\n1,1,1,1\n1,11,1,1\n1,2,-1,1\n1,1,5,5\n2,2,3,3\n", g);
  CHECK(r.gaze.samples().size() <= r.records);
  CHECK(r.records - r.gaze.samples().size() == r.warnings.rejected_records);
  CHECK(r.records - r.gaze.valid_count() == r.warnings.total());
}

TEST_CASE("malformed records report their line") {
  try {
    load("user,frame,x,y\n1,1,1,1\n1,2,abc,1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(load("user,frame,x,y\n1,1,1\n"), ParseError);
  CHECK_THROWS_AS(load("a,b,c,d\n1,1,1,1\n"), ParseError);
  CHECK_THROWS_AS(load(""), ParseError);
}

TEST_CASE("no valid samples is an empty-input error") {
  try {
    load("user,frame,x,y\n1,1,-1,1\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInput);
  }
}

TEST_CASE("JSON input") {
  const auto r = load(R"([{"user": 1, "frame": 2, "x": 10.5, "y": 3}, {"user": 2, "time_s": 0.0, "x": 4, "y": 4}])");
  REQUIRE(r.gaze.samples().size() == 2);
  CHECK(r.gaze.gaze_column(1) == std::vector<double>{4});
  CHECK(r.gaze.gaze_column(2) == std::vector<double>{10.5});
  CHECK_THROWS_AS(load(R"([{"user": 1, "x": 1, "y": 1}])"), ParseError);
  CHECK_THROWS_AS(load(R"({"user": 1})"), ParseError);
}

TEST_CASE("CSV round trip is exact") {
  std::ostringstream text;
  text << "user,frame,x,y\n";
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> ux(-10, 210), uy(0, 99.999);
  for (int u = 3; u >= 1; --u)
    for (int t = 1; t <= 40; ++t)
      if ((t + u) % 7) text << u << ',' << t << ',' << ux(rng) / 3.0 << ',' << uy(rng) / 7.0 << '\n';
  const auto a = load(text.str());
  std::ostringstream out;
  write_gaze_csv(out, a.gaze);
  FrameGeometry g = kGeom;
  g.n_frames = a.gaze.n_frames();
  const auto b = load(out.str(), g);
  CHECK(a.gaze == b.gaze);
  CHECK(b.warnings.invalid_samples == a.warnings.invalid_samples);
}

TEST_CASE("GazeSet validation") {
  CHECK_THROWS_AS(GazeSet({{1, 1, 1, 1, true}, {1, 1, 2, 2, true}}, {10, 10, 30, 2}), Error);
  CHECK_THROWS_AS(GazeSet({{1, 3, 1, 1, true}}, {10, 10, 30, 2}), Error);
  CHECK_THROWS_AS(GazeSet({{1, 1, 11, 1, true}}, {10, 10, 30, 2}), Error);
  CHECK_NOTHROW(GazeSet({{1, 1, 11, 1, false}}, {10, 10, 30, 2}));
}
