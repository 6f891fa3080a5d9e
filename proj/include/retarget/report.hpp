#pragma once

#include <iosfwd>
#include <vector>

#include "retarget/gaze.hpp"
#include "retarget/trajectory.hpp"

namespace retarget {

// Static SVG: gaze x per frame as dots, DP path r_t, optimized x*_t with the
// crop extent as a band, and cut markers. Any input may be empty.
void write_plot_svg(std::ostream& out, int frame_width, const GazeSet* gaze, const std::vector<int>& path_r,
                    const Trajectory& traj);

// POSIX shell script driving ffmpeg: one crop-filter line per cut segment,
// with the per-frame rectangles in a sendcmd block that mirrors the
// crop-path CSV (same rounding).
void write_crop_script(std::ostream& out, const Trajectory& traj, double fps, int out_width, int out_height);

// Rectangles listed in a script written by write_crop_script, in frame order.
std::vector<CropRect> read_crop_script_rects(std::istream& in);

}  // namespace retarget
