#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "retarget/gaze.hpp"

namespace retarget {

// W_o x N matrix of negated, Gaussian-filtered gaze impulses. Low values
// mark positions many users looked at. Stored frame-contiguous: column t
// (1-based) occupies values[(t-1)*width, t*width).
class SaliencyMatrix {
 public:
  SaliencyMatrix() = default;
  SaliencyMatrix(int width, int n_frames, std::vector<double> values, double sigma_px);

  int width() const { return width_; }
  int n_frames() const { return n_frames_; }
  double sigma_px() const { return sigma_px_; }

  std::span<const double> column(int t) const;
  // E_s(x) at frame t; x is a 0-based pixel column.
  double unary_cost(int x, int t) const;
  std::span<const double> values() const { return values_; }

 private:
  int width_ = 0;
  int n_frames_ = 0;
  std::vector<double> values_;
  double sigma_px_ = 0.0;
};

// Normalized 1-D Gaussian truncated at +-ceil(4 sigma); index `radius` is the centre.
std::vector<double> gaussian_kernel(double sigma_px);

SaliencyMatrix build_saliency(const GazeSet& gaze, double sigma_px);

// Binary PGM (P5): one row per frame, darker where gaze is denser.
void write_saliency_pgm(std::ostream& out, const SaliencyMatrix& sm);

}  // namespace retarget
