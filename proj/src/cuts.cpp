#include "retarget/cuts.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "retarget/error.hpp"

namespace retarget {

double histogram_intersection(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorKind::Validation, "histograms have different bin counts");
  const double sa = std::accumulate(a.begin(), a.end(), 0.0);
  const double sb = std::accumulate(b.begin(), b.end(), 0.0);
  if (sa <= 0 || sb <= 0) return sa == sb ? 1.0 : 0.0;
  double inter = 0;
  for (std::size_t i = 0; i < a.size(); ++i) inter += std::min(a[i] / sa, b[i] / sb);
  return inter;
}

std::vector<int> detect_cuts_naive(const std::vector<std::vector<double>>& histograms, double threshold) {
  std::vector<int> cuts;
  for (std::size_t t = 1; t < histograms.size(); ++t) {
    if (histograms[t].size() != histograms[0].size())
      fail(ErrorKind::Validation, "histogram at frame " + std::to_string(t + 1) + " has a different bin count");
    if (histogram_intersection(histograms[t - 1], histograms[t]) >= threshold) continue;
    const int frame = static_cast<int>(t) + 1;
    if (!cuts.empty() && cuts.back() == frame - 1) continue;
    cuts.push_back(frame);
  }
  return cuts;
}

namespace {

std::string strip(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  const auto b = line.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = line.find_last_not_of(" \t\r");
  return line.substr(b, e - b + 1);
}

}  // namespace

std::vector<int> read_cut_list(std::istream& in) {
  std::vector<int> cuts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = strip(line);
    if (s.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(lineno, "bad cut frame '" + s + "'");
    cuts.push_back(v);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

std::vector<int> read_cut_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open cut list '" + path + "'");
  return read_cut_list(in);
}

std::vector<std::vector<double>> read_histograms(std::istream& in) {
  std::vector<std::vector<double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = strip(line);
    if (s.empty()) continue;
    std::vector<double> bins;
    std::stringstream ss(s);
    std::string f;
    while (std::getline(ss, f, ',')) {
      double v = 0;
      const auto b = f.find_first_not_of(' ');
      const char* first = f.data() + (b == std::string::npos ? f.size() : b);
      const auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), v);
      if (ec != std::errc() || v < 0) throw ParseError(lineno, "bad histogram bin '" + f + "'");
      bins.push_back(v);
    }
    out.push_back(std::move(bins));
  }
  return out;
}

}  // namespace retarget
