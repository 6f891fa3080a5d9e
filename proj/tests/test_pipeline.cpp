#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "retarget/error.hpp"
#include "retarget/pipeline.hpp"
#include "retarget/report.hpp"

using namespace retarget;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("retarget_test_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig synth_config(const fs::path& dir, const SynthSpec& spec, std::uint64_t seed) {
  const GazeSet gs = generate(spec, seed);
  {
    std::ofstream out(dir / "gaze.csv");
    write_gaze_csv(out, gs);
  }
  std::ostringstream toml;
  toml << "gaze = \"gaze.csv\"\noutput_dir = \"out\"\n"
       << "[geometry]\nwidth = " << spec.geometry.width << "\nheight = " << spec.geometry.height
       << "\nfps = " << spec.geometry.fps << "\nframes = " << spec.n_frames << "\n"
       << "[target]\naspect = \"4:3\"\n";
  {
    std::ofstream out(dir / "run.toml");
    out << toml.str();
  }
  return load_config(dir / "run.toml");
}

}  // namespace

TEST_CASE("aspect parsing") {
  CHECK(parse_aspect("4:3") == std::pair<double, double>{4, 3});
  CHECK(parse_aspect("2.35:1") == std::pair<double, double>{2.35, 1});
  CHECK(parse_aspect("1.5").first / parse_aspect("1.5").second == 1.5);
  CHECK_THROWS_AS(parse_aspect("4:"), Error);
  CHECK_THROWS_AS(parse_aspect("0:1"), Error);
}

TEST_CASE("config parsing and derived parameters") {
  const RunConfig c = parse_config(R"(
gaze = "g.csv"
cuts = "/abs/cuts.txt"
[geometry]
width = 1600
height = 360
fps = 25
[target]
aspect = "4:3"
[params]
lambda1 = 100
tau = 7
[solver]
max_iters = 50
)",
                                   "/base");
  CHECK(c.gaze_path == fs::path("/base/g.csv"));
  CHECK(*c.cuts_path == fs::path("/abs/cuts.txt"));
  CHECK(c.target_width() == doctest::Approx(480));
  const OptParams op = c.opt_params();
  CHECK(op.lambda1 == 100);
  CHECK(op.zoom_lambda1 == 100);  // follows lambda1 unless set
  CHECK(op.zoom_lambda2 == 500);
  CHECK(op.tau == 7);
  CHECK(op.pan_speed_max == doctest::Approx(12.8));
  const DpParams dp = c.dp_params();
  CHECK(dp.jump_width == doctest::Approx(360));
  CHECK(dp.lambda == 2.0);
  CHECK(dp.cut_rhythm == 200);
  const FixationParams fp = c.fixation_params();
  CHECK(fp.t1 == doctest::Approx(64));
  CHECK(fp.t2 == doctest::Approx(32));
  CHECK(c.params.max_iters == 50);
  CHECK(effective_params(c)["tau"].get<double>() == 7);
  CHECK(parse_config("gaze = \"g\"\n[geometry]\nwidth=1600\nheight=360\nfps=25\n").opt_params().tau ==
        doctest::Approx(48));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("gaze = \"g\"\nbogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("gaze = \"g\"\n[params]\nlambda = \"x\"\n"), Error);
  CHECK_THROWS_AS(parse_config("[geometry]\nwidth = 3\n"), Error);
  CHECK_THROWS_AS(parse_config("gaze = \n"), ParseError);
  RunConfig c = parse_config("gaze = \"g\"\n[geometry]\nwidth=400\nheight=360\nfps=25\n");
  try {
    c.validate();
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/run.toml"), Error);
}

TEST_CASE("W_r > W_o fails before any output") {
  const fs::path dir = scratch("wide");
  SynthSpec spec;
  spec.n_frames = 50;
  RunConfig cfg = synth_config(dir, spec, 1);
  cfg.geometry.width = 400;
  CHECK_THROWS_AS(run(cfg), Error);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("synthetic fixation run gives a constant crop path") {
  const fs::path dir = scratch("fixation");
  SynthSpec spec;
  spec.n_frames = 200;
  const RunConfig cfg = synth_config(dir, spec, 7);
  const RunResult res = run(cfg);
  const auto& x = res.trajectory.x_star;
  for (double v : x) CHECK(std::abs(v - x[0]) < 1e-3);
  CHECK(res.trajectory.cuts_all.empty());
  CHECK(res.inclusion.included_pct > 99);
  for (const char* f : {"crop_path.csv", "crop_path.json", "inclusion.json", "dp_path.csv", "plot.svg", "crop_script.sh"})
    CHECK(fs::exists(cfg.output_dir / f));

  std::ifstream csv(cfg.output_dir / "crop_path.csv");
  const Trajectory back = read_crop_csv(csv);
  std::ifstream script(cfg.output_dir / "crop_script.sh");
  const auto rects = read_crop_script_rects(script);
  REQUIRE(rects.size() == back.size());
  for (std::size_t t = 0; t < rects.size(); ++t) {
    CHECK(rects[t].left == back.crop_rects[t].left);
    CHECK(rects[t].top == back.crop_rects[t].top);
    CHECK(rects[t].width == back.crop_rects[t].width);
    CHECK(rects[t].height == back.crop_rects[t].height);
  }
}

TEST_CASE("identical inputs give byte-identical outputs") {
  const fs::path dir = scratch("determinism");
  SynthSpec spec;
  spec.regime = Regime::Saccade;
  spec.n_frames = 300;
  spec.jump_frame = 150;
  spec.anchor_x = 500;
  RunConfig cfg = synth_config(dir, spec, 3);
  cfg.emit_debug = true;
  run(cfg);
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(cfg.output_dir)) first[e.path().filename().string()] = slurp(e.path());
  fs::remove_all(cfg.output_dir);
  run(cfg);
  for (const auto& [name, bytes] : first) CHECK_MESSAGE(slurp(cfg.output_dir / name) == bytes, name);
  CHECK(first.count("saliency.pgm") == 1);
}

TEST_CASE("saccade produces a cut and a script segment per shot") {
  SynthSpec spec;
  spec.regime = Regime::Saccade;
  spec.n_frames = 300;
  spec.jump_frame = 150;
  spec.anchor_x = 500;
  const GazeSet gs = generate(spec, 5);
  RunConfig cfg;
  cfg.gaze_path = "unused.csv";
  cfg.geometry = {1600, 360, 25, 300};
  const RunResult res = execute(cfg, gs, {});
  REQUIRE(res.trajectory.cuts_all.size() == 1);
  CHECK(std::abs(res.trajectory.cuts_all[0] - 150) <= 2);
  std::ostringstream script;
  write_crop_script(script, res.trajectory, 25, 480, 360);
  std::size_t segments = 0;
  for (std::size_t pos = 0; (pos = script.str().find("ffmpeg ", pos)) != std::string::npos; ++pos) ++segments;
  CHECK(segments == 2);
}

TEST_CASE("stage errors carry the stage name") {
  SynthSpec spec;
  spec.n_frames = 40;
  const GazeSet gs = generate(spec, 1);
  RunConfig cfg;
  cfg.gaze_path = "unused.csv";
  cfg.geometry = {1600, 360, 25, 40};
  try {
    execute(cfg, gs, {41});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("cuts: ", 0) == 0);
    CHECK(e.kind() == ErrorKind::Validation);
  }
  cfg.params.max_iters = 1;
  try {
    execute(cfg, gs, {});
    FAIL("expected a solver error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("trajectory-opt: ", 0) == 0);
    CHECK(e.kind() == ErrorKind::Solver);
  }
}

TEST_CASE("failed run removes partial outputs") {
  const fs::path dir = scratch("partial");
  SynthSpec spec;
  spec.n_frames = 60;
  RunConfig cfg = synth_config(dir, spec, 1);
  // a directory squatting on a later output name makes that write fail
  fs::create_directories(cfg.output_dir / "plot.svg");
  CHECK_THROWS_AS(run(cfg), Error);
  CHECK_FALSE(fs::exists(cfg.output_dir / "crop_path.csv"));
  CHECK_FALSE(fs::exists(cfg.output_dir / "crop_path.json"));
  CHECK_FALSE(fs::exists(cfg.output_dir / "dp_path.csv"));
}

TEST_CASE("plot SVG") {
  Trajectory tr;
  std::ostringstream out;
  write_plot_svg(out, 100, nullptr, {}, tr);
  CHECK(out.str().find("<svg") != std::string::npos);
  CHECK(out.str().find("</svg>") != std::string::npos);
}
