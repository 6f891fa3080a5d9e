#include "retarget/zoom.hpp"

#include <algorithm>
#include <ostream>

#include "retarget/format.hpp"

namespace retarget {

double zoom_ratio(double sigma, double sigma_max) {
  if (!(sigma_max > 0)) return 1.0;
  const double rho = 1.0 - 0.3 * (1.0 - sigma / sigma_max);
  return std::clamp(rho, 0.7, 1.0);
}

ZoomTargets compute_zoom_targets(const DispersionSeries& ds, const std::vector<int>& shot_bounds) {
  const int n = static_cast<int>(ds.sigma.size());
  std::vector<int> starts{1};
  for (int b : shot_bounds)
    if (b > 1 && b <= n) starts.push_back(b);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  starts.push_back(n + 1);

  ZoomTargets zt;
  zt.rho.assign(static_cast<std::size_t>(n), 1.0);
  zt.sigma_max.assign(static_cast<std::size_t>(n), 0.0);
  for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
    const auto begin = static_cast<std::size_t>(starts[s] - 1);
    const auto end = static_cast<std::size_t>(starts[s + 1] - 1);
    if (end - begin == 1 && begin > 0) {
      zt.rho[begin] = zt.rho[begin - 1];
      zt.sigma_max[begin] = zt.sigma_max[begin - 1];
      continue;
    }
    const double smax = *std::max_element(ds.sigma.begin() + static_cast<std::ptrdiff_t>(begin),
                                          ds.sigma.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t t = begin; t < end; ++t) {
      zt.sigma_max[t] = smax;
      zt.rho[t] = zoom_ratio(ds.sigma[t], smax);
    }
  }
  return zt;
}

void write_zoom_csv(std::ostream& out, const DispersionSeries& ds, const ZoomTargets& zt) {
  out << "frame,sigma,rho\n";
  for (std::size_t t = 0; t < zt.rho.size(); ++t)
    out << t + 1 << ',' << fixed(ds.sigma[t]) << ',' << fixed(zt.rho[t], 6) << '\n';
}

}  // namespace retarget
