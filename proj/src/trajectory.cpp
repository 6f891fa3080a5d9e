#include "retarget/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "retarget/error.hpp"
#include "retarget/format.hpp"

namespace retarget {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void RetargetGeometry::validate() const {
  require(frame_width > 0 && frame_height > 0, "frame dimensions must be positive");
  require(target_width > 0, "target width must be positive");
  require(target_width <= frame_width, "target width W_r exceeds the frame width W_o");
}

void OptParams::validate() const {
  require(lambda1 >= 0 && lambda2 >= 0 && lambda3 >= 0, "L1 weights must be non-negative");
  require(zoom_lambda1 >= 0 && zoom_lambda2 >= 0 && zoom_lambda3 >= 0, "zoom L1 weights must be non-negative");
  require(tau >= 0, "tau must be non-negative");
  require(pan_speed_max > 0, "pan speed cap must be positive");
  require(relax_frames >= 0, "cut relaxation width p must be non-negative");
  require(delay >= 0, "delay must be non-negative");
  require(z_min > 0 && z_min <= 1, "z_min must lie in (0, 1]");
}

double pan_speed_for(int frame_width, double fps, double seconds) {
  require(fps > 0 && seconds > 0, "pan speed needs positive fps and duration");
  return frame_width / (seconds * fps);
}

std::vector<int> merge_cuts(const std::vector<int>& original, const std::vector<int>& introduced, int n_frames) {
  std::vector<int> all;
  for (int c : original) {
    require(c >= 2 && c <= n_frames, "cut at frame " + std::to_string(c) + " outside [2, N]");
    all.push_back(c);
  }
  for (int c : introduced) {
    require(c >= 2 && c <= n_frames, "introduced cut at frame " + std::to_string(c) + " outside [2, N]");
    all.push_back(c);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

TermMask term_mask(int n_frames, const std::vector<int>& cuts, int relax_frames) {
  const auto n = static_cast<std::size_t>(n_frames);
  TermMask mask;
  mask.cuts = cuts;
  mask.data.assign(n, true);
  mask.velocity.assign(n, true);
  std::vector<bool> relaxed(n, false);  // inside some [k - p, k + p]
  std::vector<bool> cut_at(n + 1, false);
  for (int k : cuts) {
    cut_at[static_cast<std::size_t>(k - 1)] = true;
    mask.velocity[static_cast<std::size_t>(k - 1)] = false;
    for (int t = std::max(1, k - relax_frames); t <= std::min(n_frames, k + relax_frames); ++t)
      relaxed[static_cast<std::size_t>(t - 1)] = true;
  }
  mask.data = relaxed;
  mask.data.flip();

  mask.diff.resize(3);
  for (int order = 1; order <= 3; ++order) {
    auto& d = mask.diff[static_cast<std::size_t>(order - 1)];
    d.assign(n_frames > order ? n - static_cast<std::size_t>(order) : 0, true);
    for (std::size_t t = 0; t < d.size(); ++t) {
      bool crosses = false, touches = false;
      for (std::size_t j = t; j <= t + static_cast<std::size_t>(order); ++j) {
        if (j > t && cut_at[j]) crosses = true;
        if (relaxed[j]) touches = true;
      }
      d[t] = !(crosses || (order >= 2 && touches));
    }
  }
  return mask;
}

std::vector<double> delayed_reference(const std::vector<int>& r, const std::vector<int>& cuts, int delay) {
  std::vector<double> ref(r.size());
  std::size_t next_cut = 0;
  std::size_t seg_start = 0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    while (next_cut < cuts.size() && static_cast<std::size_t>(cuts[next_cut] - 1) <= t) {
      seg_start = static_cast<std::size_t>(cuts[next_cut] - 1);
      ++next_cut;
    }
    const std::size_t src = t >= seg_start + static_cast<std::size_t>(delay) ? t - static_cast<std::size_t>(delay) : seg_start;
    ref[t] = r[src];
  }
  return ref;
}

namespace {

const std::array<std::array<double, 4>, 3> kStencils = {{
    {-1.0, 1.0, 0.0, 0.0},
    {1.0, -2.0, 1.0, 0.0},
    {-1.0, 3.0, -3.0, 1.0},
}};

// Adds lambda * sum |D_order v| over active stencils through bound variables.
void add_l1_terms(qp::ProgramBuilder& b, int offset, const TermMask& mask, int order, double lambda) {
  if (lambda <= 0) return;
  const auto& active = mask.diff[static_cast<std::size_t>(order - 1)];
  const auto& coef = kStencils[static_cast<std::size_t>(order - 1)];
  std::vector<qp::ProgramBuilder::Term> plus, minus;
  for (std::size_t t = 0; t < active.size(); ++t) {
    if (!active[t]) continue;
    const int u = b.add_variables(1);
    b.add_linear(u, lambda);
    plus.assign({{u, 1.0}});
    minus.assign({{u, 1.0}});
    for (int j = 0; j <= order; ++j) {
      const int v = offset + static_cast<int>(t) + j;
      plus.push_back({v, coef[static_cast<std::size_t>(j)]});
      minus.push_back({v, -coef[static_cast<std::size_t>(j)]});
    }
    b.add_constraint(plus, 0.0, kInf);
    b.add_constraint(minus, 0.0, kInf);
  }
}

}  // namespace

TrajectoryProgram build_program(const PathEstimate& path, const std::vector<int>& original_cuts,
                                const ZoomTargets& zoom, const OptParams& params, const RetargetGeometry& geom) {
  geom.validate();
  params.validate();
  const int n = static_cast<int>(path.r.size());
  require(n >= 1, "path must not be empty");
  require(zoom.rho.size() == path.r.size(), "zoom targets and path differ in length");

  TrajectoryProgram tp;
  tp.n_frames = n;
  tp.mask = term_mask(n, merge_cuts(original_cuts, path.cuts, n), params.relax_frames);
  tp.reference = delayed_reference(path.r, tp.mask.cuts, params.delay);

  qp::ProgramBuilder b;
  tp.x_offset = b.add_variables(n);
  tp.z_offset = b.add_variables(n);
  const double x_lo = geom.target_width / 2.0;
  const double x_hi = geom.frame_width - geom.target_width / 2.0;

  for (int t = 0; t < n; ++t) {
    const int x = tp.x_offset + t;
    const int z = tp.z_offset + t;
    b.add_constraint({{x, 1.0}}, x_lo, x_hi);
    b.add_constraint({{z, 1.0}}, params.z_min, 1.0);
    if (t > 0 && tp.mask.velocity[static_cast<std::size_t>(t)])
      b.add_constraint({{x, 1.0}, {x - 1, -1.0}}, -params.pan_speed_max, params.pan_speed_max);

    // (z - rho)^2
    const double rho = zoom.rho[static_cast<std::size_t>(t)];
    b.add_quadratic(z, z, 2.0);
    b.add_linear(z, -2.0 * rho);
    b.add_constant(rho * rho);

    // max(|x - r| - tau, 0)^2 via s >= |x - r| - tau
    if (tp.mask.data[static_cast<std::size_t>(t)]) {
      const double r = tp.reference[static_cast<std::size_t>(t)];
      const int s = b.add_variables(1);
      b.add_quadratic(s, s, 2.0);
      b.add_constraint({{s, 1.0}, {x, -1.0}}, -r - params.tau, kInf);
      b.add_constraint({{s, 1.0}, {x, 1.0}}, r - params.tau, kInf);
    }
  }

  const double x_weights[3] = {params.lambda1, params.lambda2, params.lambda3};
  const double z_weights[3] = {params.zoom_lambda1, params.zoom_lambda2, params.zoom_lambda3};
  for (int order = 1; order <= 3; ++order) {
    add_l1_terms(b, tp.x_offset, tp.mask, order, x_weights[order - 1]);
    add_l1_terms(b, tp.z_offset, tp.mask, order, z_weights[order - 1]);
  }
  tp.program = b.build();
  return tp;
}

CropRect crop_rect(double x, double z, const RetargetGeometry& geom) {
  CropRect rect;
  rect.height = z * geom.frame_height;
  rect.width = z * geom.target_width;
  rect.top = (geom.frame_height - rect.height) / 2.0;
  rect.left = std::clamp(x - rect.width / 2.0, 0.0, geom.frame_width - rect.width);
  return rect;
}

Trajectory optimize_trajectory(const PathEstimate& path, const std::vector<int>& original_cuts,
                               const ZoomTargets& zoom, const OptParams& params, const RetargetGeometry& geom,
                               const qp::SolveOptions& solver) {
  const TrajectoryProgram tp = build_program(path, original_cuts, zoom, params, geom);
  const qp::Solution sol = qp::solve(tp.program, solver);
  if (sol.status != qp::Status::Solved) {
    std::ostringstream msg;
    msg << "trajectory solve ended " << qp::to_string(sol.status) << " after " << sol.iterations
        << " iterations (primal residual " << sol.primal_residual << ", dual residual " << sol.dual_residual << ")";
    fail(ErrorKind::Solver, msg.str());
  }

  const auto n = static_cast<std::size_t>(tp.n_frames);
  Trajectory traj;
  traj.x_star.resize(n);
  traj.z.resize(n);
  traj.crop_rects.resize(n);
  const double x_lo = geom.target_width / 2.0;
  const double x_hi = geom.frame_width - geom.target_width / 2.0;
  for (std::size_t t = 0; t < n; ++t) {
    // Interior-point iterates sit within eps of the box; snap onto it.
    traj.x_star[t] = std::clamp(sol.x[tp.x_offset + static_cast<Eigen::Index>(t)], x_lo, x_hi);
    traj.z[t] = std::clamp(sol.x[tp.z_offset + static_cast<Eigen::Index>(t)], params.z_min, 1.0);
    traj.crop_rects[t] = crop_rect(traj.x_star[t], traj.z[t], geom);
  }
  traj.cuts_all = tp.mask.cuts;
  traj.reference = tp.reference;
  traj.objective = sol.objective_value;
  traj.solver_status = sol.status;
  traj.solver_iterations = sol.iterations;
  traj.primal_residual = sol.primal_residual;
  traj.dual_residual = sol.dual_residual;

  const ConstraintReport report = check_constraints(traj, params, geom);
  if (report.worst() > 1e-6)
    fail(ErrorKind::Solver, "solver returned a trajectory violating its constraints by " + std::to_string(report.worst()));
  return traj;
}

double ConstraintReport::worst() const {
  return std::max({max_inclusion_violation, max_velocity_violation, max_zoom_violation});
}

ConstraintReport check_constraints(const Trajectory& traj, const OptParams& params, const RetargetGeometry& geom) {
  ConstraintReport rep;
  const double x_lo = geom.target_width / 2.0;
  const double x_hi = geom.frame_width - geom.target_width / 2.0;
  std::size_t c = 0;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const double x = traj.x_star[t];
    rep.max_inclusion_violation = std::max({rep.max_inclusion_violation, x_lo - x, x - x_hi});
    rep.max_zoom_violation = std::max({rep.max_zoom_violation, params.z_min - traj.z[t], traj.z[t] - 1.0});
    const int frame = static_cast<int>(t) + 1;
    while (c < traj.cuts_all.size() && traj.cuts_all[c] < frame) ++c;
    const bool at_cut = c < traj.cuts_all.size() && traj.cuts_all[c] == frame;
    if (t > 0 && !at_cut)
      rep.max_velocity_violation =
          std::max(rep.max_velocity_violation, std::abs(x - traj.x_star[t - 1]) - params.pan_speed_max);
  }
  return rep;
}

void write_crop_csv(std::ostream& out, const Trajectory& traj) {
  out << "frame,x,z,left,top,width,height,is_cut\n";
  std::size_t c = 0;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const int frame = static_cast<int>(t) + 1;
    const bool cut = c < traj.cuts_all.size() && traj.cuts_all[c] == frame;
    if (cut) ++c;
    const CropRect& r = traj.crop_rects[t];
    out << frame << ',' << fixed(traj.x_star[t]) << ',' << fixed(traj.z[t], 6) << ',' << fixed(r.left) << ','
        << fixed(r.top) << ',' << fixed(r.width) << ',' << fixed(r.height) << ',' << (cut ? 1 : 0) << '\n';
  }
}

Trajectory read_crop_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty crop-path file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame,x,z,left,top,width,height,is_cut") throw ParseError(1, "unexpected crop-path header");
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f;
    std::vector<double> v;
    while (std::getline(ss, f, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(f, &used));
        if (used != f.size()) throw std::invalid_argument(f);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad number '" + f + "'");
      }
    }
    if (v.size() != 8) throw ParseError(lineno, "expected 8 fields");
    if (static_cast<std::size_t>(v[0]) != traj.size() + 1) throw ParseError(lineno, "frames must be consecutive from 1");
    traj.x_star.push_back(v[1]);
    traj.z.push_back(v[2]);
    traj.crop_rects.push_back({v[3], v[4], v[5], v[6]});
    if (v[7] != 0) traj.cuts_all.push_back(static_cast<int>(v[0]));
  }
  return traj;
}

}  // namespace retarget
