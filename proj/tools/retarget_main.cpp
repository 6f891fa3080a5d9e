// retarget: gaze-driven crop-path editing for a smaller aspect ratio.
//
//   retarget run <config.toml>
//   retarget synth <spec.toml> -o gaze.csv [--seed N]
//   retarget score <gaze.csv> <croppath.csv> --width W --height H [--fps F]
//   retarget plot <run-dir>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <toml.hpp>

#include "retarget/error.hpp"
#include "retarget/metrics.hpp"
#include "retarget/pipeline.hpp"
#include "retarget/report.hpp"

namespace fs = std::filesystem;
using namespace retarget;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Solver: return 3;
    case ErrorKind::Io: return 4;
    default: return 2;
  }
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorKind::Io, "cannot open '" + p.string() + "'");
  return in;
}

SynthSpec load_synth_spec(const fs::path& path, std::uint64_t& seed) {
  toml::table t;
  try {
    t = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ParseError(e.source().begin.line, std::string(e.description()));
  }
  SynthSpec s;
  if (auto r = t["regime"].value<std::string>()) s.regime = parse_regime(*r);
  s.n_users = t["users"].value_or(s.n_users);
  s.n_frames = t["frames"].value_or(s.n_frames);
  s.noise_sd = t["noise_sd"].value_or(s.noise_sd);
  s.geometry.width = t["geometry"]["width"].value_or(s.geometry.width);
  s.geometry.height = t["geometry"]["height"].value_or(s.geometry.height);
  s.geometry.fps = t["geometry"]["fps"].value_or(s.geometry.fps);
  s.anchor_x = t["anchor_x"].value_or(s.geometry.width / 2.0);
  s.anchor_y = t["anchor_y"].value_or(s.geometry.height / 2.0);
  s.velocity = t["velocity"].value_or(s.velocity);
  s.jump_frame = t["jump_frame"].value_or(s.jump_frame);
  s.jump = t["jump"].value_or(s.jump);
  s.segment_frames = t["segment_frames"].value_or(s.segment_frames);
  seed = t["seed"].value_or<std::int64_t>(static_cast<std::int64_t>(seed));
  return s;
}

int cmd_run(const fs::path& config_path) {
  const RunConfig cfg = load_config(config_path);
  const RunResult res = run(cfg);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "frames " << res.trajectory.size() << ", cuts " << res.trajectory.cuts_all.size() << " ("
            << res.path.cuts.size() << " introduced), included gaze " << res.inclusion.included_pct << "%\n";
  for (const auto& p : res.written) std::cout << "wrote " << p.string() << '\n';
  return 0;
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_path, std::uint64_t seed, bool seed_given) {
  std::uint64_t file_seed = seed;
  SynthSpec spec = load_synth_spec(spec_path, file_seed);
  if (!seed_given) seed = file_seed;
  const GazeSet gaze = generate(spec, seed);
  std::ofstream out(out_path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + out_path.string() + "'");
  write_gaze_csv(out, gaze);
  if (!out) fail(ErrorKind::Io, "failed writing '" + out_path.string() + "'");
  return 0;
}

int cmd_score(const fs::path& gaze_path, const fs::path& crop_path, int width, int height, double fps) {
  auto crop_in = open_in(crop_path);
  const Trajectory traj = read_crop_csv(crop_in);
  const LoadResult load =
      load_gaze_file(gaze_path.string(), FrameGeometry{width, height, fps, static_cast<int>(traj.size())});
  const GazeInclusionReport rep = included_gaze(load.gaze, traj);
  std::cout << to_json(rep).dump(2) << '\n';
  return 0;
}

int cmd_plot(const fs::path& dir) {
  auto meta_in = open_in(dir / "crop_path.json");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("crop_path.json: ") + e.what());
  }
  auto crop_in = open_in(dir / "crop_path.csv");
  Trajectory traj = read_crop_csv(crop_in);

  std::vector<int> r;
  if (fs::exists(dir / "dp_path.csv")) {
    auto in = open_in(dir / "dp_path.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      int frame = 0, x = 0, cut = 0;
      char c1 = 0, c2 = 0;
      std::istringstream ss(line);
      if (ss >> frame >> c1 >> x >> c2 >> cut) r.push_back(x);
    }
  }

  const auto& g = meta.at("geometry");
  const int width = g.at("width").get<int>();
  std::optional<GazeSet> gaze;
  const std::string gaze_file = meta.value("gaze_file", "");
  if (!gaze_file.empty() && fs::exists(gaze_file))
    gaze = load_gaze_file(gaze_file, FrameGeometry{width, g.at("height").get<int>(), g.at("fps").get<double>(),
                                                   static_cast<int>(traj.size())})
               .gaze;

  std::ofstream out(dir / "plot.svg");
  if (!out) fail(ErrorKind::Io, "cannot write plot.svg");
  write_plot_svg(out, width, gaze ? &*gaze : nullptr, r, traj);
  std::cout << "wrote " << (dir / "plot.svg").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze-driven video retargeting: crop paths, zoom and new cuts from multi-user gaze."};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline from a TOML config");
  run_cmd->add_option("config", config_path, "Config file")->required();

  std::string spec_path, synth_out = "gaze.csv";
  std::uint64_t seed = 1;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic gaze (fixation, pursuit, saccade, mixed)");
  synth_cmd->add_option("spec", spec_path, "Synthetic spec (TOML)")->required();
  synth_cmd->add_option("-o,--output", synth_out, "Output gaze CSV");
  auto* seed_opt = synth_cmd->add_option("--seed", seed, "RNG seed (overrides the spec)");

  std::string score_gaze, score_crop;
  int width = 0, height = 0;
  double fps = 25.0;
  auto* score_cmd = app.add_subcommand("score", "Included-gaze percentage of a crop path");
  score_cmd->add_option("gaze", score_gaze, "Gaze CSV/JSON")->required();
  score_cmd->add_option("croppath", score_crop, "Crop-path CSV")->required();
  score_cmd->add_option("--width", width, "Original frame width W_o")->required();
  score_cmd->add_option("--height", height, "Original frame height H_o")->required();
  score_cmd->add_option("--fps", fps, "Frame rate, for time-stamped gaze");

  std::string plot_dir;
  auto* plot_cmd = app.add_subcommand("plot", "Redraw plot.svg for a run directory");
  plot_cmd->add_option("run_dir", plot_dir, "Output directory of a previous run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(config_path);
    if (*synth_cmd) return cmd_synth(spec_path, synth_out, seed, seed_opt->count() > 0);
    if (*score_cmd) return cmd_score(score_gaze, score_crop, width, height, fps);
    if (*plot_cmd) return cmd_plot(plot_dir);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
