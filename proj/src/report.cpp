#include "retarget/report.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "retarget/error.hpp"
#include "retarget/format.hpp"

namespace retarget {

namespace {

constexpr double kPlotW = 1200.0;
constexpr double kPlotH = 600.0;
constexpr double kMargin = 50.0;
constexpr std::size_t kMaxDots = 40000;

struct Axes {
  double n_frames;
  double frame_width;

  double px(double frame) const {
    return kMargin + (n_frames > 1 ? (frame - 1) / (n_frames - 1) : 0.5) * (kPlotW - 2 * kMargin);
  }
  // Image x grows downward in the plot, matching a frame-by-x matrix view.
  double py(double x) const { return kMargin + (x / frame_width) * (kPlotH - 2 * kMargin); }
};

std::string polyline(const Axes& ax, const std::vector<double>& ys) {
  std::ostringstream s;
  for (std::size_t t = 0; t < ys.size(); ++t)
    s << (t ? " " : "") << fixed(ax.px(static_cast<double>(t) + 1), 2) << ',' << fixed(ax.py(ys[t]), 2);
  return s.str();
}

}  // namespace

void write_plot_svg(std::ostream& out, int frame_width, const GazeSet* gaze, const std::vector<int>& path_r,
                    const Trajectory& traj) {
  const std::size_t n = std::max({traj.size(), path_r.size(), gaze ? static_cast<std::size_t>(gaze->n_frames()) : 0});
  const Axes ax{static_cast<double>(std::max<std::size_t>(n, 1)), static_cast<double>(frame_width)};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotW << "\" height=\"" << kPlotH
      << "\" viewBox=\"0 0 " << kPlotW << ' ' << kPlotH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kPlotW - 2 * kMargin << "\" height=\""
      << kPlotH - 2 * kMargin << "\" fill=\"none\" stroke=\"#888\"/>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 15 << "\" font-family=\"sans-serif\" font-size=\"14\">"
      << "x position (0.." << frame_width << ") vs frame (1.." << n << ")</text>\n";

  if (!traj.crop_rects.empty()) {
    std::vector<double> lo, hi;
    for (const CropRect& r : traj.crop_rects) {
      lo.push_back(r.left);
      hi.push_back(r.left + r.width);
    }
    std::reverse(hi.begin(), hi.end());
    std::ostringstream pts;
    pts << polyline(ax, lo);
    for (std::size_t i = 0; i < hi.size(); ++i)
      pts << ' ' << fixed(ax.px(static_cast<double>(hi.size() - i)), 2) << ',' << fixed(ax.py(hi[i]), 2);
    out << "<polygon points=\"" << pts.str() << "\" fill=\"#9ecae1\" fill-opacity=\"0.35\" stroke=\"none\"/>\n";
  }

  if (gaze) {
    const std::size_t total = gaze->samples().size();
    const std::size_t stride = std::max<std::size_t>(1, (total + kMaxDots - 1) / kMaxDots);
    out << "<g fill=\"#d62728\" fill-opacity=\"0.5\">\n";
    for (std::size_t i = 0; i < total; i += stride) {
      const GazeSample& s = gaze->samples()[i];
      if (!s.valid) continue;
      out << "<circle cx=\"" << fixed(ax.px(s.frame), 2) << "\" cy=\"" << fixed(ax.py(s.x), 2) << "\" r=\"1.2\"/>\n";
    }
    out << "</g>\n";
  }

  if (!path_r.empty()) {
    std::vector<double> r(path_r.begin(), path_r.end());
    out << "<polyline points=\"" << polyline(ax, r) << "\" fill=\"none\" stroke=\"#555\" stroke-width=\"1\"/>\n";
  }
  if (!traj.x_star.empty())
    out << "<polyline points=\"" << polyline(ax, traj.x_star)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  for (int c : traj.cuts_all)
    out << "<line x1=\"" << fixed(ax.px(c), 2) << "\" y1=\"" << kMargin << "\" x2=\"" << fixed(ax.px(c), 2)
        << "\" y2=\"" << kPlotH - kMargin << "\" stroke=\"#2ca02c\" stroke-dasharray=\"4 3\"/>\n";
  out << "</svg>\n";
}

void write_crop_script(std::ostream& out, const Trajectory& traj, double fps, int out_width, int out_height) {
  require(fps > 0, "crop script needs a positive fps");
  out << "#!/bin/sh\n"
         "# usage: crop_script.sh INPUT [OUTPUT_PREFIX]\n"
         "# Writes one clip per cut segment. Rectangles match crop_path.csv row for row.\n"
         "set -e\n"
         "IN=\"$1\"\n"
         "OUT=\"${2:-retargeted}\"\n"
         "CMDS=\"$(mktemp -d)\"\n"
         "trap 'rm -rf \"$CMDS\"' EXIT\n";

  std::vector<int> starts{1};
  for (int c : traj.cuts_all) starts.push_back(c);
  starts.push_back(static_cast<int>(traj.size()) + 1);

  for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
    const int first = starts[s];
    const int last = starts[s + 1] - 1;
    if (last < first) continue;
    char name[32];
    std::snprintf(name, sizeof name, "seg%03zu", s + 1);
    out << "cat > \"$CMDS/" << name << ".cmd\" <<'EOF'\n";
    for (int f = first; f <= last; ++f) {
      const CropRect& r = traj.crop_rects[static_cast<std::size_t>(f - 1)];
      out << fixed((f - first) / fps, 6) << " crop w " << fixed(r.width) << ", crop h " << fixed(r.height)
          << ", crop x " << fixed(r.left) << ", crop y " << fixed(r.top) << ";\n";
    }
    out << "EOF\n";
    const CropRect& r0 = traj.crop_rects[static_cast<std::size_t>(first - 1)];
    out << "ffmpeg -y -i \"$IN\" -an -vf \"trim=start_frame=" << first - 1 << ":end_frame=" << last
        << ",setpts=PTS-STARTPTS,sendcmd=f=$CMDS/" << name << ".cmd,crop=w=" << fixed(r0.width)
        << ":h=" << fixed(r0.height) << ":x=" << fixed(r0.left) << ":y=" << fixed(r0.top) << ",scale=" << out_width
        << ':' << out_height << "\" \"${OUT}_" << name << ".mp4\"\n";
  }
}

std::vector<CropRect> read_crop_script_rects(std::istream& in) {
  std::vector<CropRect> rects;
  std::string line;
  while (std::getline(in, line)) {
    double t = 0;
    CropRect r;
    if (std::sscanf(line.c_str(), "%lf crop w %lf, crop h %lf, crop x %lf, crop y %lf;", &t, &r.width, &r.height,
                    &r.left, &r.top) == 5)
      rects.push_back(r);
  }
  return rects;
}

}  // namespace retarget
