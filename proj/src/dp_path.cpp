#include "retarget/dp_path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>

#include "retarget/error.hpp"

namespace retarget {

void DpParams::validate(int frame_width) const {
  require(lambda > 0, "DP lambda must be positive");
  require(jump_width > 0 && jump_width < frame_width, "jump width W must lie in (0, W_o)");
  require(cut_rhythm > 0, "cut rhythm D must be positive");
  require(state_stride >= 1, "state stride must be >= 1");
}

double transition_cost(double delta, double frames_since_cut, const DpParams& params) {
  const double a = std::abs(delta);
  if (a <= params.jump_width) return 1.0 - std::exp(-4.0 * a / params.jump_width);
  return 1.0 + std::exp(-frames_since_cut / params.cut_rhythm);
}

std::vector<int> state_positions(int frame_width, int stride) {
  require(stride >= 1 && frame_width >= 1, "invalid state grid");
  std::vector<int> pos;
  for (int k = 0; k * stride < frame_width; ++k) pos.push_back(std::min(k * stride + stride / 2, frame_width - 1));
  return pos;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int initial_frames_since_cut(const DpParams& p) {
  return std::max(1, static_cast<int>(std::lround(p.cut_rhythm)));
}

std::vector<int> collect_cuts(const std::vector<int>& r, double jump_width) {
  std::vector<int> cuts;
  for (std::size_t t = 1; t < r.size(); ++t)
    if (std::abs(r[t] - r[t - 1]) > jump_width) cuts.push_back(static_cast<int>(t) + 1);
  return cuts;
}

// Contiguous range of states within W of each state (positions are sorted).
void no_cut_ranges(const std::vector<int>& pos, double w, std::vector<int>& lo, std::vector<int>& hi) {
  const int k_count = static_cast<int>(pos.size());
  lo.assign(pos.size(), 0);
  hi.assign(pos.size(), 0);
  int a = 0, b = 0;
  for (int k = 0; k < k_count; ++k) {
    while (pos[k] - pos[a] > w) ++a;
    b = std::max(b, k);
    while (b + 1 < k_count && pos[b + 1] - pos[k] <= w) ++b;
    lo[k] = a;
    hi[k] = b;
  }
}

PathEstimate best_path_dp(const SaliencyMatrix& sm, const DpParams& p) {
  const std::vector<int> pos = state_positions(sm.width(), p.state_stride);
  const int K = static_cast<int>(pos.size());
  const int N = sm.n_frames();

  std::vector<double> move_cost(static_cast<std::size_t>(sm.width()));
  for (std::size_t delta = 0; delta < move_cost.size(); ++delta)
    move_cost[delta] = p.lambda * transition_cost(static_cast<double>(delta), 1.0, p);

  std::vector<int> lo, hi;
  no_cut_ranges(pos, p.jump_width, lo, hi);

  std::vector<double> cost(K), next_cost(K), cut_cost(K);
  std::vector<int> since(K), next_since(K);
  std::vector<double> prefix_val(K + 1), suffix_val(K + 1);
  std::vector<int> prefix_idx(K + 1), suffix_idx(K + 1);
  std::vector<std::int32_t> pred(static_cast<std::size_t>(K) * static_cast<std::size_t>(N), -1);

  auto col = sm.column(1);
  for (int k = 0; k < K; ++k) {
    cost[k] = col[pos[k]];
    since[k] = initial_frames_since_cut(p);
  }

  for (int t = 2; t <= N; ++t) {
    col = sm.column(t);
    for (int k = 0; k < K; ++k) cut_cost[k] = cost[k] + p.lambda * (1.0 + std::exp(-since[k] / p.cut_rhythm));
    // prefix_*[i]: best over [0, i); suffix_*[i]: best over [i, K). Lowest index wins ties.
    prefix_val[0] = kInf;
    prefix_idx[0] = -1;
    for (int k = 0; k < K; ++k) {
      const bool take = cut_cost[k] < prefix_val[k];
      prefix_val[k + 1] = take ? cut_cost[k] : prefix_val[k];
      prefix_idx[k + 1] = take ? k : prefix_idx[k];
    }
    suffix_val[K] = kInf;
    suffix_idx[K] = -1;
    for (int k = K - 1; k >= 0; --k) {
      const bool take = cut_cost[k] <= suffix_val[k + 1];
      suffix_val[k] = take ? cut_cost[k] : suffix_val[k + 1];
      suffix_idx[k] = take ? k : suffix_idx[k + 1];
    }

    std::int32_t* pred_t = pred.data() + static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(K);
    for (int k = 0; k < K; ++k) {
      // Candidates are visited in increasing predecessor index, so a strict
      // comparison keeps the lowest index among equal costs.
      double best = prefix_val[lo[k]];
      int arg = prefix_idx[lo[k]];
      bool is_cut = arg >= 0;
      const int pk = pos[k];
      for (int j = lo[k]; j <= hi[k]; ++j) {
        const double c = cost[j] + move_cost[static_cast<std::size_t>(std::abs(pk - pos[j]))];
        if (c < best) {
          best = c;
          arg = j;
          is_cut = false;
        }
      }
      if (hi[k] + 1 < K && suffix_val[hi[k] + 1] < best) {
        best = suffix_val[hi[k] + 1];
        arg = suffix_idx[hi[k] + 1];
        is_cut = true;
      }
      next_cost[k] = col[pk] + best;
      next_since[k] = is_cut ? 1 : since[arg] + 1;
      pred_t[k] = arg;
    }
    cost.swap(next_cost);
    since.swap(next_since);
  }

  int end = 0;
  for (int k = 1; k < K; ++k)
    if (cost[k] < cost[end]) end = k;

  PathEstimate out;
  out.total_cost = cost[end];
  out.r.resize(static_cast<std::size_t>(N));
  int k = end;
  for (int t = N; t >= 1; --t) {
    out.r[static_cast<std::size_t>(t - 1)] = pos[k];
    if (t > 1) k = pred[static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)];
  }
  out.cuts = collect_cuts(out.r, p.jump_width);
  return out;
}

PathEstimate exact_dp(const SaliencyMatrix& sm, const DpParams& p) {
  const std::vector<int> pos = state_positions(sm.width(), p.state_stride);
  const int K = static_cast<int>(pos.size());
  const int N = sm.n_frames();
  const int d0 = initial_frames_since_cut(p);
  const int d_max = std::max(d0, static_cast<int>(std::lround(4.0 * p.cut_rhythm)));
  const int S = K * d_max;  // state (k, d) -> k * d_max + (d - 1)

  std::vector<int> lo, hi;
  no_cut_ranges(pos, p.jump_width, lo, hi);

  std::vector<double> cost(S, kInf), next(S);
  std::vector<double> cut_val(K);
  std::vector<int> cut_arg(K);
  std::vector<int> active;
  std::vector<std::int32_t> pred(static_cast<std::size_t>(S) * static_cast<std::size_t>(N), -1);

  auto col = sm.column(1);
  for (int k = 0; k < K; ++k) cost[k * d_max + d0 - 1] = col[pos[k]];

  for (int t = 2; t <= N; ++t) {
    col = sm.column(t);
    std::fill(next.begin(), next.end(), kInf);
    std::int32_t* pred_t = pred.data() + static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(S);

    // d values with at least one finite state, ascending
    active.clear();
    for (int d = 1; d <= d_max; ++d)
      for (int k = 0; k < K; ++k)
        if (cost[k * d_max + d - 1] != kInf) {
          active.push_back(d);
          break;
        }

    for (int k = 0; k < K; ++k) {
      cut_val[k] = kInf;
      cut_arg[k] = -1;
      for (int d : active) {
        const double c = cost[k * d_max + d - 1];
        if (c == kInf) continue;
        const double v = c + p.lambda * (1.0 + std::exp(-d / p.cut_rhythm));
        if (v < cut_val[k]) {
          cut_val[k] = v;
          cut_arg[k] = k * d_max + d - 1;
        }
      }
    }

    for (int k = 0; k < K; ++k) {
      const double unary = col[pos[k]];
      // Arriving through a cut: d = 1.
      double best = kInf;
      int arg = -1;
      for (int j = 0; j < K; ++j) {
        if (j >= lo[k] && j <= hi[k]) continue;
        if (cut_val[j] < best) {
          best = cut_val[j];
          arg = cut_arg[j];
        }
      }
      if (arg >= 0) {
        next[k * d_max] = unary + best;
        pred_t[k * d_max] = arg;
      }
      // Arriving without a cut: d = d' + 1, saturating at d_max.
      double* row = next.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(d_max);
      std::int32_t* row_pred = pred_t + static_cast<std::size_t>(k) * static_cast<std::size_t>(d_max);
      for (int j = lo[k]; j <= hi[k]; ++j) {
        const double step = p.lambda * transition_cost(pos[k] - pos[j], 1.0, p);
        for (int dp : active) {
          const double c = cost[j * d_max + dp - 1];
          if (c == kInf) continue;
          const int d = std::min(dp + 1, d_max);
          if (c + step < row[d - 1]) {
            row[d - 1] = c + step;
            row_pred[d - 1] = j * d_max + dp - 1;
          }
        }
      }
      for (int d = 2; d <= d_max; ++d)
        if (row[d - 1] != kInf) row[d - 1] += unary;
    }
    cost.swap(next);
  }

  int end = 0;
  for (int s = 1; s < S; ++s)
    if (cost[s] < cost[end]) end = s;

  PathEstimate out;
  out.total_cost = cost[end];
  out.r.resize(static_cast<std::size_t>(N));
  int s = end;
  for (int t = N; t >= 1; --t) {
    out.r[static_cast<std::size_t>(t - 1)] = pos[s / d_max];
    if (t > 1) s = pred[static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(S) + static_cast<std::size_t>(s)];
  }
  out.cuts = collect_cuts(out.r, p.jump_width);
  return out;
}

}  // namespace

PathEstimate optimize_path(const SaliencyMatrix& sm, const DpParams& params) {
  params.validate(sm.width());
  return params.tracking == CutTracking::Exact ? exact_dp(sm, params) : best_path_dp(sm, params);
}

double path_cost(const std::vector<int>& r, const SaliencyMatrix& sm, const DpParams& params) {
  require(static_cast<int>(r.size()) == sm.n_frames(), "path length must equal the frame count");
  if (r.empty()) return 0.0;
  double total = sm.unary_cost(r[0], 1);
  int since = initial_frames_since_cut(params);
  for (std::size_t t = 1; t < r.size(); ++t) {
    const double delta = r[t] - r[t - 1];
    // Same association order as the forward pass: E_s + (lambda E_t + C).
    total = sm.unary_cost(r[t], static_cast<int>(t) + 1) + (params.lambda * transition_cost(delta, since, params) + total);
    since = std::abs(delta) > params.jump_width ? 1 : since + 1;
  }
  return total;
}

void write_path_csv(std::ostream& out, const PathEstimate& path) {
  out << "frame,r,is_cut\n";
  std::size_t c = 0;
  for (std::size_t t = 0; t < path.r.size(); ++t) {
    const int frame = static_cast<int>(t) + 1;
    const bool cut = c < path.cuts.size() && path.cuts[c] == frame;
    if (cut) ++c;
    out << frame << ',' << path.r[t] << ',' << (cut ? 1 : 0) << '\n';
  }
}

}  // namespace retarget
