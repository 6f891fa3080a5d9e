#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "retarget/gaze.hpp"

namespace retarget {

struct Fixation {
  int user_id = 0;
  int start_frame = 0;
  int end_frame = 0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;

  int duration_frames() const { return end_frame - start_frame + 1; }
};

struct FixationParams {
  double t1 = 0.0;  // step-1 cluster radius, pixels
  double t2 = 0.0;  // step-2 rejection radius, pixels
  double min_duration_ms = 200.0;

  // t1 = 0.04 W_o, t2 = 0.02 W_o.
  static FixationParams for_width(int frame_width);
};

// Smallest frame count that spans `ms` at `fps`.
int min_duration_frames(double ms, double fps);

// Two-step dispersion clustering, run independently per user over the
// time-ordered valid samples:
//   1. grow a cluster while each new sample lies within t1 of the running
//      centroid;
//   2. drop members farther than t2 from that centroid and recompute it.
// Clusters whose retained span covers min_duration are emitted.
std::vector<Fixation> detect_fixations(const GazeSet& gaze, const FixationParams& params);

struct DispersionSeries {
  std::vector<double> sigma;       // per frame, pixels, filled
  std::vector<bool> defined_mask;  // true where >= 2 users had an active fixation
  bool used_raw_fallback = false;
  std::vector<std::string> warnings;
};

// Population SD of active fixation centroids per frame. Masked frames are
// forward-filled, then leading gaps back-filled.
DispersionSeries dispersion_series(const std::vector<Fixation>& fixations, const GazeSet& gaze);

void write_fixations_csv(std::ostream& out, const std::vector<Fixation>& fixations);

}  // namespace retarget
