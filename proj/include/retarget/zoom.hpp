#pragma once

#include <iosfwd>
#include <vector>

#include "retarget/fixation.hpp"

namespace retarget {

struct ZoomTargets {
  std::vector<double> rho;        // per frame, in [0.7, 1]; 1 is the widest window
  std::vector<double> sigma_max;  // per frame: the normalizer of its shot segment
};

// rho = 1 - 0.3 (1 - sigma / sigma_max), clamped into [0.7, 1].
double zoom_ratio(double sigma, double sigma_max);

// `shot_bounds` are 1-based frames that start a new segment (original and new
// cuts, any order). The normalizer is the largest sigma within each segment.
ZoomTargets compute_zoom_targets(const DispersionSeries& ds, const std::vector<int>& shot_bounds);

void write_zoom_csv(std::ostream& out, const DispersionSeries& ds, const ZoomTargets& zt);

}  // namespace retarget
