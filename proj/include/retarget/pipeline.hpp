#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retarget/dp_path.hpp"
#include "retarget/fixation.hpp"
#include "retarget/gaze.hpp"
#include "retarget/metrics.hpp"
#include "retarget/trajectory.hpp"

namespace retarget {

// Tunables with their defaults. Pixel quantities left unset are derived
// from the target width W_r (W = 0.75 W_r, tau = 0.1 W_r) or the frame
// width (fixation thresholds, pan speed).
struct Params {
  double lambda = 2.0;
  double sigma = 15.0;
  double D = 200.0;
  std::optional<double> W;
  double W_ratio = 0.75;
  double lambda1 = 5000.0;
  double lambda2 = 500.0;
  double lambda3 = 3000.0;
  std::optional<double> zoom_lambda1, zoom_lambda2, zoom_lambda3;
  std::optional<double> tau;
  double tau_ratio = 0.1;
  int p = 5;
  int delay = 10;
  double z_min = 0.7;
  std::optional<double> pan_speed_max;
  double pan_seconds = 5.0;
  int state_stride = 4;
  bool exact_d = false;
  std::optional<double> fixation_t1, fixation_t2;
  double fixation_min_ms = 200.0;
  double cut_threshold = 0.5;
  double eps_abs = 1e-6;
  int max_iters = 20000;
};

struct RunConfig {
  std::filesystem::path gaze_path;
  std::optional<std::filesystem::path> cuts_path;
  std::optional<std::filesystem::path> histograms_path;
  std::filesystem::path output_dir = "out";
  FrameGeometry geometry;
  double aspect_num = 4.0;
  double aspect_den = 3.0;
  Params params;
  bool emit_plot = true;
  bool emit_script = true;
  bool emit_debug = false;

  double target_width() const { return geometry.height * aspect_num / aspect_den; }
  RetargetGeometry retarget_geometry() const { return {geometry.width, geometry.height, target_width()}; }
  DpParams dp_params() const;
  OptParams opt_params() const;
  FixationParams fixation_params() const;

  // Checks geometry and parameter ranges; throws Validation.
  void validate() const;
};

// Relative paths in the file resolve against the config's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& toml_text, const std::filesystem::path& base_dir = {});

// Parses "4:3", "1:1", "2.35:1" or a bare ratio like "1.333".
std::pair<double, double> parse_aspect(const std::string& text);

// Values of every tunable after defaults and derivations.
nlohmann::json effective_params(const RunConfig& config);

struct RunResult {
  GazeSet gaze;
  std::vector<int> original_cuts;
  PathEstimate path;
  DispersionSeries dispersion;
  ZoomTargets zoom;
  Trajectory trajectory;
  GazeInclusionReport inclusion;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> written;
};

// In-memory pipeline: ingest, fixation, saliency, DP path, zoom, trajectory, metrics.
RunResult execute(const RunConfig& config, const GazeSet& gaze, std::vector<int> original_cuts);

// Full run including file I/O. On failure every file written so far is removed
// and the error is rethrown with the failing stage prefixed.
RunResult run(const RunConfig& config);

}  // namespace retarget
