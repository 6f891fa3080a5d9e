#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace retarget {

// Normalized histogram intersection, in [0, 1].
double histogram_intersection(const std::vector<double>& a, const std::vector<double>& b);

// Fallback shot detector over per-frame luma histograms. A cut is placed at
// frame t (1-based) when the intersection of frames t-1 and t drops below
// `threshold`; a detection at t-1 suppresses one at t.
std::vector<int> detect_cuts_naive(const std::vector<std::vector<double>>& histograms, double threshold = 0.5);

// One 1-based frame index per line; blank lines and '#' comments ignored.
std::vector<int> read_cut_list(std::istream& in);
std::vector<int> read_cut_list_file(const std::string& path);

// One histogram per line, comma separated bin counts.
std::vector<std::vector<double>> read_histograms(std::istream& in);

}  // namespace retarget
