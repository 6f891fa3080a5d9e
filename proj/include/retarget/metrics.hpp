#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "retarget/gaze.hpp"
#include "retarget/trajectory.hpp"

namespace retarget {

struct GazeInclusionReport {
  double included_pct = 0.0;
  std::vector<double> per_frame_included;  // fraction; 0 where a frame has no valid samples
  std::vector<int> per_frame_samples;
  std::size_t n_samples = 0;
  std::size_t n_included = 0;
};

// A valid sample counts when left <= x < left + width at its frame; y is ignored.
GazeInclusionReport included_gaze(const GazeSet& gaze, const Trajectory& traj);

nlohmann::json to_json(const GazeInclusionReport& report, bool per_frame = false);

// Fixed window of width W_r centred in the frame, z = 1, no cuts.
Trajectory centered_window(const GazeSet& gaze, double target_width);

enum class Regime { Fixation, Pursuit, Saccade, Mixed };

Regime parse_regime(const std::string& name);
const char* to_string(Regime r) noexcept;

// Synthetic multi-user gaze for the three viewing regimes:
//   fixation: anchor + noise
//   pursuit:  anchor + velocity * (t - 1) + noise
//   saccade:  anchor before jump_frame, anchor + jump after, + noise
// Mixed cycles fixation / pursuit / saccade blocks of `segment_frames`
// inside the frame and is meant for long runtime workloads.
struct SynthSpec {
  Regime regime = Regime::Fixation;
  int n_users = 5;
  int n_frames = 500;
  FrameGeometry geometry{1600, 360, 25.0, 0};
  double noise_sd = 15.0;
  double anchor_x = 800.0;
  double anchor_y = 180.0;
  double velocity = 3.0;   // px/frame (pursuit)
  int jump_frame = 250;    // first frame after the jump (saccade)
  double jump = 400.0;     // px (saccade)
  int segment_frames = 300;  // mixed

  void validate() const;
};

// The noise-free gaze position of every user at frame t.
double synth_base_x(const SynthSpec& spec, int t);

GazeSet generate(const SynthSpec& spec, std::uint64_t seed);

}  // namespace retarget
