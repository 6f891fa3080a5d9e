#include "retarget/fixation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>

#include "retarget/error.hpp"
#include "retarget/format.hpp"

namespace retarget {

FixationParams FixationParams::for_width(int frame_width) {
  return {0.04 * frame_width, 0.02 * frame_width, 200.0};
}

int min_duration_frames(double ms, double fps) {
  // Guard against 200 ms * 25 fps landing a hair above 5.
  return std::max(1, static_cast<int>(std::ceil(ms * fps / 1000.0 - 1e-9)));
}

namespace {

struct Point {
  int frame;
  double x;
  double y;
};

std::optional<Fixation> finish_cluster(int user, const std::vector<Point>& members, double cx, double cy,
                                       double t2, int min_frames) {
  double sx = 0, sy = 0;
  int n = 0, first = 0, last = 0;
  for (const Point& p : members) {
    if (std::hypot(p.x - cx, p.y - cy) > t2) continue;
    if (n == 0) first = p.frame;
    last = p.frame;
    sx += p.x;
    sy += p.y;
    ++n;
  }
  if (n == 0 || last - first + 1 < min_frames) return std::nullopt;
  return Fixation{user, first, last, sx / n, sy / n};
}

}  // namespace

std::vector<Fixation> detect_fixations(const GazeSet& gaze, const FixationParams& params) {
  require(params.t1 > params.t2 && params.t2 > 0, "fixation thresholds need t1 > t2 > 0");
  require(params.min_duration_ms > 0, "fixation minimum duration must be positive");
  const int min_frames = min_duration_frames(params.min_duration_ms, gaze.fps() > 0 ? gaze.fps() : 1.0);

  std::map<int, std::vector<Point>> per_user;
  for (const GazeSample& s : gaze.samples())
    if (s.valid) per_user[s.user_id].push_back({s.frame, s.x, s.y});

  std::vector<Fixation> out;
  for (auto& [user, points] : per_user) {
    // samples() is frame-sorted already
    std::vector<Point> cluster;
    double cx = 0, cy = 0;
    auto flush = [&] {
      if (!cluster.empty())
        if (auto f = finish_cluster(user, cluster, cx, cy, params.t2, min_frames)) out.push_back(*f);
      cluster.clear();
    };
    for (const Point& p : points) {
      if (!cluster.empty() && std::hypot(p.x - cx, p.y - cy) > params.t1) flush();
      cluster.push_back(p);
      const double n = static_cast<double>(cluster.size());
      cx += (p.x - cx) / n;
      cy += (p.y - cy) / n;
    }
    flush();
  }
  std::sort(out.begin(), out.end(), [](const Fixation& a, const Fixation& b) {
    return a.user_id != b.user_id ? a.user_id < b.user_id : a.start_frame < b.start_frame;
  });
  return out;
}

namespace {

double population_sd(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// Returns false when nothing was defined.
bool fill_gaps(std::vector<double>& sigma, const std::vector<bool>& mask) {
  const auto first = std::find(mask.begin(), mask.end(), true);
  if (first == mask.end()) return false;
  double carry = sigma[static_cast<std::size_t>(first - mask.begin())];
  for (std::size_t t = 0; t < sigma.size(); ++t) {
    if (mask[t])
      carry = sigma[t];
    else
      sigma[t] = carry;
  }
  return true;
}

}  // namespace

DispersionSeries dispersion_series(const std::vector<Fixation>& fixations, const GazeSet& gaze) {
  const auto n = static_cast<std::size_t>(gaze.n_frames());
  std::vector<std::vector<double>> active(n);
  for (const Fixation& f : fixations) {
    const int lo = std::max(1, f.start_frame);
    const int hi = std::min(gaze.n_frames(), f.end_frame);
    for (int t = lo; t <= hi; ++t) active[static_cast<std::size_t>(t - 1)].push_back(f.centroid_x);
  }

  DispersionSeries ds;
  ds.sigma.assign(n, 0.0);
  ds.defined_mask.assign(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    if (active[t].size() >= 2) {
      ds.sigma[t] = population_sd(active[t]);
      ds.defined_mask[t] = true;
    }
  }
  if (fill_gaps(ds.sigma, ds.defined_mask)) return ds;

  ds.used_raw_fallback = true;
  ds.warnings.emplace_back("no frame has two concurrent fixations; using raw gaze dispersion");
  std::vector<bool> raw_mask(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    const auto xs = gaze.gaze_column(static_cast<int>(t) + 1);
    if (xs.size() >= 2) {
      ds.sigma[t] = population_sd(xs);
      raw_mask[t] = true;
    }
  }
  if (!fill_gaps(ds.sigma, raw_mask)) {
    std::fill(ds.sigma.begin(), ds.sigma.end(), 0.0);
    ds.warnings.emplace_back("gaze dispersion undefined everywhere; sigma set to 0");
  }
  return ds;
}

void write_fixations_csv(std::ostream& out, const std::vector<Fixation>& fixations) {
  out << "user,start_frame,end_frame,cx,cy\n";
  for (const Fixation& f : fixations)
    out << f.user_id << ',' << f.start_frame << ',' << f.end_frame << ',' << fixed(f.centroid_x) << ','
        << fixed(f.centroid_y) << '\n';
}

}  // namespace retarget
