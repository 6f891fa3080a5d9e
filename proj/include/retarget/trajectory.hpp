#pragma once

#include <iosfwd>
#include <vector>

#include "retarget/dp_path.hpp"
#include "retarget/qp.hpp"
#include "retarget/zoom.hpp"

namespace retarget {

struct RetargetGeometry {
  int frame_width = 0;   // W_o
  int frame_height = 0;  // H_o
  double target_width = 0.0;  // W_r = H_o * target aspect

  double target_aspect() const { return target_width / frame_height; }
  void validate() const;
};

struct OptParams {
  double lambda1 = 5000.0;
  double lambda2 = 500.0;
  double lambda3 = 3000.0;
  double zoom_lambda1 = 5000.0;
  double zoom_lambda2 = 500.0;
  double zoom_lambda3 = 3000.0;
  double tau = 0.0;            // data-term deadzone, pixels
  double pan_speed_max = 6.0;  // pixels per frame
  int relax_frames = 5;        // p
  int delay = 10;              // frames
  double z_min = 0.7;

  void validate() const;
};

// Velocity cap: crossing the full frame width takes at least `seconds`.
double pan_speed_for(int frame_width, double fps, double seconds = 5.0);

struct CropRect {
  double left = 0, top = 0, width = 0, height = 0;
};

struct Trajectory {
  std::vector<double> x_star;
  std::vector<double> z;
  std::vector<CropRect> crop_rects;
  std::vector<int> cuts_all;   // merged original + new cuts, sorted
  std::vector<double> reference;  // delayed r the data term tracked
  double objective = 0.0;
  qp::Status solver_status = qp::Status::Solved;
  int solver_iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;

  std::size_t size() const { return x_star.size(); }
};

// Which terms of the trajectory program are active at each frame/stencil.
struct TermMask {
  std::vector<int> cuts;                 // merged, sorted
  std::vector<bool> data;                // per frame t (0-based)
  std::vector<bool> velocity;            // index t: constraint between t-1 and t; [0] unused
  std::vector<std::vector<bool>> diff;   // diff[o-1][t]: stencil t..t+o for order o = 1..3
};

TermMask term_mask(int n_frames, const std::vector<int>& cuts, int relax_frames);

// Reference r shifted later by `delay` frames within each shot segment.
std::vector<double> delayed_reference(const std::vector<int>& r, const std::vector<int>& cuts, int delay);

std::vector<int> merge_cuts(const std::vector<int>& original, const std::vector<int>& introduced, int n_frames);

struct TrajectoryProgram {
  qp::ConvexProgram program;
  int n_frames = 0;
  int x_offset = 0;
  int z_offset = 0;
  TermMask mask;
  std::vector<double> reference;
};

// Variables: x*_t, z_t, one slack per active data frame, and one bound
// variable per active L1 difference term.
TrajectoryProgram build_program(const PathEstimate& path, const std::vector<int>& original_cuts,
                                const ZoomTargets& zoom, const OptParams& params, const RetargetGeometry& geom);

CropRect crop_rect(double x, double z, const RetargetGeometry& geom);

Trajectory optimize_trajectory(const PathEstimate& path, const std::vector<int>& original_cuts,
                               const ZoomTargets& zoom, const OptParams& params, const RetargetGeometry& geom,
                               const qp::SolveOptions& solver = {});

struct ConstraintReport {
  double max_inclusion_violation = 0;
  double max_velocity_violation = 0;
  double max_zoom_violation = 0;

  double worst() const;
};

ConstraintReport check_constraints(const Trajectory& traj, const OptParams& params, const RetargetGeometry& geom);

// Crop-path CSV: frame,x,z,left,top,width,height,is_cut (3 decimals, z with 6).
void write_crop_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_crop_csv(std::istream& in);

}  // namespace retarget
