#include "retarget/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "retarget/error.hpp"

namespace retarget {

SaliencyMatrix::SaliencyMatrix(int width, int n_frames, std::vector<double> values, double sigma_px)
    : width_(width), n_frames_(n_frames), values_(std::move(values)), sigma_px_(sigma_px) {
  require(width > 0 && n_frames > 0, "saliency matrix needs positive dimensions");
  require(values_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(n_frames),
          "saliency value count does not match dimensions");
}

std::span<const double> SaliencyMatrix::column(int t) const {
  if (t < 1 || t > n_frames_) fail(ErrorKind::Index, "saliency frame " + std::to_string(t) + " out of range");
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(width_),
                                                  static_cast<std::size_t>(width_));
}

double SaliencyMatrix::unary_cost(int x, int t) const {
  if (x < 0 || x >= width_) fail(ErrorKind::Index, "saliency x " + std::to_string(x) + " out of range");
  return column(t)[static_cast<std::size_t>(x)];
}

std::vector<double> gaussian_kernel(double sigma_px) {
  require(sigma_px > 0, "Gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma_px));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma_px * sigma_px));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

SaliencyMatrix build_saliency(const GazeSet& gaze, double sigma_px) {
  const std::vector<double> kernel = gaussian_kernel(sigma_px);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int width = gaze.frame_width();
  const int n = gaze.n_frames();
  std::vector<double> values(static_cast<std::size_t>(width) * static_cast<std::size_t>(n), 0.0);

  // Convolving a sum of impulses is the sum of shifted kernels; mass past
  // the frame edges is dropped.
  for (int t = 1; t <= n; ++t) {
    double* col = values.data() + static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(width);
    for (const GazeSample& s : gaze.frame_samples(t)) {
      if (!s.valid) continue;
      const int cx = std::clamp(static_cast<int>(std::lround(s.x)), 0, width - 1);
      const int lo = std::max(0, cx - radius);
      const int hi = std::min(width - 1, cx + radius);
      for (int x = lo; x <= hi; ++x) col[x] -= kernel[static_cast<std::size_t>(x - cx + radius)];
    }
  }
  return SaliencyMatrix(width, n, std::move(values), sigma_px);
}

void write_saliency_pgm(std::ostream& out, const SaliencyMatrix& sm) {
  const auto values = sm.values();
  double lo = 0;
  for (double v : values) lo = std::min(lo, v);
  out << "P5\n" << sm.width() << ' ' << sm.n_frames() << "\n255\n";
  for (double v : values) {
    const double shade = lo < 0 ? 1.0 - v / lo : 1.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * shade))));
  }
}

}  // namespace retarget
