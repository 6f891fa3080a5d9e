#pragma once

#include <iosfwd>
#include <vector>

#include "retarget/saliency.hpp"

namespace retarget {

enum class CutTracking {
  // Each node keeps the frames-since-cut of its best incoming path; O(W_o^2 N).
  BestPath,
  // Augmented (x, d) state with d capped at 4D. Exact for paths whose d
  // never reaches the cap; meant for small instances.
  Exact,
};

struct DpParams {
  double lambda = 2.0;    // transition weight
  double jump_width = 0;  // W, pixels; transitions wider than this are cuts
  double cut_rhythm = 200.0;  // D, frames
  int state_stride = 4;
  CutTracking tracking = CutTracking::BestPath;

  void validate(int frame_width) const;
};

struct PathEstimate {
  std::vector<int> r;     // window centre per frame (0-based pixel)
  std::vector<int> cuts;  // 1-based frames t where r jumps from t-1 to t
  double total_cost = 0.0;
};

// Pairwise cost of moving the window centre by |delta| pixels when the last
// cut happened `frames_since_cut` frames ago. Unweighted (no lambda).
double transition_cost(double delta, double frames_since_cut, const DpParams& params);

// DP state positions for a given stride: k*stride + stride/2, clamped to the frame.
std::vector<int> state_positions(int frame_width, int stride);

// Minimizes sum_t E_s(r_t) + lambda * sum_t E_t(r_{t-1}, r_t, d). The count
// d starts at D on frame 1, resets to 1 on a cut, otherwise increments. Ties
// go to the lowest-x predecessor.
PathEstimate optimize_path(const SaliencyMatrix& sm, const DpParams& params);

// Evaluates the energy of an explicit path, tracking d along it.
double path_cost(const std::vector<int>& r, const SaliencyMatrix& sm, const DpParams& params);

void write_path_csv(std::ostream& out, const PathEstimate& path);

}  // namespace retarget
