#include "retarget/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "retarget/cuts.hpp"
#include "retarget/error.hpp"
#include "retarget/report.hpp"
#include "retarget/saliency.hpp"
#include "retarget/zoom.hpp"

namespace retarget {

namespace fs = std::filesystem;

DpParams RunConfig::dp_params() const {
  DpParams dp;
  dp.lambda = params.lambda;
  dp.jump_width = params.W.value_or(params.W_ratio * target_width());
  dp.cut_rhythm = params.D;
  dp.state_stride = params.state_stride;
  dp.tracking = params.exact_d ? CutTracking::Exact : CutTracking::BestPath;
  return dp;
}

OptParams RunConfig::opt_params() const {
  OptParams op;
  op.lambda1 = params.lambda1;
  op.lambda2 = params.lambda2;
  op.lambda3 = params.lambda3;
  op.zoom_lambda1 = params.zoom_lambda1.value_or(params.lambda1);
  op.zoom_lambda2 = params.zoom_lambda2.value_or(params.lambda2);
  op.zoom_lambda3 = params.zoom_lambda3.value_or(params.lambda3);
  op.tau = params.tau.value_or(params.tau_ratio * target_width());
  op.pan_speed_max = params.pan_speed_max ? *params.pan_speed_max
                                          : pan_speed_for(geometry.width, geometry.fps, params.pan_seconds);
  op.relax_frames = params.p;
  op.delay = params.delay;
  op.z_min = params.z_min;
  return op;
}

FixationParams RunConfig::fixation_params() const {
  FixationParams fp = FixationParams::for_width(geometry.width);
  if (params.fixation_t1) fp.t1 = *params.fixation_t1;
  if (params.fixation_t2) fp.t2 = *params.fixation_t2;
  fp.min_duration_ms = params.fixation_min_ms;
  return fp;
}

void RunConfig::validate() const {
  require(!gaze_path.empty(), "config needs a gaze file");
  require(geometry.width > 0 && geometry.height > 0, "geometry width and height must be positive");
  require(geometry.fps > 0, "geometry fps must be positive");
  require(geometry.n_frames >= 0, "geometry frames must not be negative");
  require(aspect_num > 0 && aspect_den > 0, "target aspect must be positive");
  require(target_width() <= geometry.width, "target width W_r = H_o * aspect exceeds the frame width W_o");
  require(params.sigma > 0, "sigma must be positive");
  require(params.cut_threshold > 0 && params.cut_threshold <= 1, "cut threshold must lie in (0, 1]");
  require(params.pan_seconds > 0, "pan_seconds must be positive");
  dp_params().validate(geometry.width);
  opt_params().validate();
  const FixationParams fp = fixation_params();
  require(fp.t1 > fp.t2 && fp.t2 > 0, "fixation thresholds need t1 > t2 > 0");
  require(fp.min_duration_ms > 0, "fixation duration must be positive");
  require(params.eps_abs > 0 && params.max_iters > 0, "solver tolerances must be positive");
}

std::pair<double, double> parse_aspect(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !(v > 0)) fail(ErrorKind::Validation, "bad aspect ratio '" + text + "'");
    return v;
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {number(text), 1.0};
  return {number(text.substr(0, colon)), number(text.substr(colon + 1))};
}

namespace {

void check_keys(const toml::table& table, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, node] : table) {
    (void)node;
    if (!allowed.count(std::string(key.str())))
      fail(ErrorKind::Validation, "unknown config key '" + (where.empty() ? "" : where + ".") + std::string(key.str()) + "'");
  }
}

double get_number(const toml::table& t, const char* key, double fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (auto v = node->value<double>()) return *v;
  fail(ErrorKind::Validation, std::string("config key '") + key + "' must be a number");
}

std::optional<double> get_optional(const toml::table& t, const char* key) {
  if (!t.get(key)) return std::nullopt;
  return get_number(t, key, 0.0);
}

int get_int(const toml::table& t, const char* key, int fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (auto v = node->value_exact<int64_t>()) return static_cast<int>(*v);
  fail(ErrorKind::Validation, std::string("config key '") + key + "' must be an integer");
}

bool get_bool(const toml::table& t, const char* key, bool fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (auto v = node->value_exact<bool>()) return *v;
  fail(ErrorKind::Validation, std::string("config key '") + key + "' must be a boolean");
}

std::optional<std::string> get_string(const toml::table& t, const char* key) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (auto v = node->value_exact<std::string>()) return *v;
  fail(ErrorKind::Validation, std::string("config key '") + key + "' must be a string");
}

const toml::table& subtable(const toml::table& root, const char* key) {
  static const toml::table empty;
  const auto* node = root.get(key);
  if (!node) return empty;
  if (const auto* t = node->as_table()) return *t;
  fail(ErrorKind::Validation, std::string("config section [") + key + "] must be a table");
}

}  // namespace

RunConfig parse_config(const std::string& toml_text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ParseError(e.source().begin.line, std::string(e.description()));
  }
  check_keys(root, {"gaze", "cuts", "histograms", "output_dir", "geometry", "target", "params", "solver", "output"}, "");

  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
  RunConfig cfg;
  const auto gaze = get_string(root, "gaze");
  if (!gaze) fail(ErrorKind::Validation, "config key 'gaze' is required");
  cfg.gaze_path = resolve(*gaze);
  if (auto c = get_string(root, "cuts")) cfg.cuts_path = resolve(*c);
  if (auto h = get_string(root, "histograms")) cfg.histograms_path = resolve(*h);
  if (auto o = get_string(root, "output_dir")) cfg.output_dir = resolve(*o);

  const auto& geom = subtable(root, "geometry");
  check_keys(geom, {"width", "height", "fps", "frames"}, "geometry");
  cfg.geometry.width = get_int(geom, "width", 0);
  cfg.geometry.height = get_int(geom, "height", 0);
  cfg.geometry.fps = get_number(geom, "fps", 0.0);
  cfg.geometry.n_frames = get_int(geom, "frames", 0);

  const auto& target = subtable(root, "target");
  check_keys(target, {"aspect"}, "target");
  if (auto a = get_string(target, "aspect")) std::tie(cfg.aspect_num, cfg.aspect_den) = parse_aspect(*a);

  const auto& p = subtable(root, "params");
  check_keys(p,
             {"lambda", "sigma", "D", "W", "W_ratio", "lambda1", "lambda2", "lambda3", "zoom_lambda1", "zoom_lambda2",
              "zoom_lambda3", "tau", "tau_ratio", "p", "delay", "z_min", "pan_speed_max", "pan_seconds",
              "state_stride", "exact_d", "fixation_t1", "fixation_t2", "fixation_min_ms", "cut_threshold"},
             "params");
  Params& P = cfg.params;
  P.lambda = get_number(p, "lambda", P.lambda);
  P.sigma = get_number(p, "sigma", P.sigma);
  P.D = get_number(p, "D", P.D);
  P.W = get_optional(p, "W");
  P.W_ratio = get_number(p, "W_ratio", P.W_ratio);
  P.lambda1 = get_number(p, "lambda1", P.lambda1);
  P.lambda2 = get_number(p, "lambda2", P.lambda2);
  P.lambda3 = get_number(p, "lambda3", P.lambda3);
  P.zoom_lambda1 = get_optional(p, "zoom_lambda1");
  P.zoom_lambda2 = get_optional(p, "zoom_lambda2");
  P.zoom_lambda3 = get_optional(p, "zoom_lambda3");
  P.tau = get_optional(p, "tau");
  P.tau_ratio = get_number(p, "tau_ratio", P.tau_ratio);
  P.p = get_int(p, "p", P.p);
  P.delay = get_int(p, "delay", P.delay);
  P.z_min = get_number(p, "z_min", P.z_min);
  P.pan_speed_max = get_optional(p, "pan_speed_max");
  P.pan_seconds = get_number(p, "pan_seconds", P.pan_seconds);
  P.state_stride = get_int(p, "state_stride", P.state_stride);
  P.exact_d = get_bool(p, "exact_d", P.exact_d);
  P.fixation_t1 = get_optional(p, "fixation_t1");
  P.fixation_t2 = get_optional(p, "fixation_t2");
  P.fixation_min_ms = get_number(p, "fixation_min_ms", P.fixation_min_ms);
  P.cut_threshold = get_number(p, "cut_threshold", P.cut_threshold);

  const auto& solver = subtable(root, "solver");
  check_keys(solver, {"eps_abs", "max_iters"}, "solver");
  P.eps_abs = get_number(solver, "eps_abs", P.eps_abs);
  P.max_iters = get_int(solver, "max_iters", P.max_iters);

  const auto& output = subtable(root, "output");
  check_keys(output, {"plot", "script", "debug"}, "output");
  cfg.emit_plot = get_bool(output, "plot", cfg.emit_plot);
  cfg.emit_script = get_bool(output, "script", cfg.emit_script);
  cfg.emit_debug = get_bool(output, "debug", cfg.emit_debug);
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

nlohmann::json effective_params(const RunConfig& config) {
  const DpParams dp = config.dp_params();
  const OptParams op = config.opt_params();
  const FixationParams fp = config.fixation_params();
  return {
      {"lambda", dp.lambda},
      {"sigma", config.params.sigma},
      {"D", dp.cut_rhythm},
      {"W", dp.jump_width},
      {"state_stride", dp.state_stride},
      {"exact_d", dp.tracking == CutTracking::Exact},
      {"lambda1", op.lambda1},
      {"lambda2", op.lambda2},
      {"lambda3", op.lambda3},
      {"zoom_lambda1", op.zoom_lambda1},
      {"zoom_lambda2", op.zoom_lambda2},
      {"zoom_lambda3", op.zoom_lambda3},
      {"tau", op.tau},
      {"p", op.relax_frames},
      {"delay", op.delay},
      {"z_min", op.z_min},
      {"pan_speed_max", op.pan_speed_max},
      {"fixation_t1", fp.t1},
      {"fixation_t2", fp.t2},
      {"fixation_min_ms", fp.min_duration_ms},
      {"cut_threshold", config.params.cut_threshold},
      {"eps_abs", config.params.eps_abs},
      {"max_iters", config.params.max_iters},
  };
}

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

RunResult execute(const RunConfig& config, const GazeSet& gaze, std::vector<int> original_cuts) {
  config.validate();
  RunResult res;
  res.gaze = gaze;
  res.original_cuts = std::move(original_cuts);
  const int n = gaze.n_frames();
  stage("cuts", [&] {
    for (int c : res.original_cuts) require(c >= 2 && c <= n, "original cut " + std::to_string(c) + " outside [2, N]");
  });

  const auto fixations = stage("fixation", [&] { return detect_fixations(gaze, config.fixation_params()); });
  res.dispersion = stage("fixation", [&] { return dispersion_series(fixations, gaze); });
  for (const auto& w : res.dispersion.warnings) res.warnings.push_back("fixation: " + w);

  const SaliencyMatrix sm = stage("saliency", [&] { return build_saliency(gaze, config.params.sigma); });
  res.path = stage("dp-path", [&] { return optimize_path(sm, config.dp_params()); });

  res.zoom = stage("zoom", [&] {
    return compute_zoom_targets(res.dispersion, merge_cuts(res.original_cuts, res.path.cuts, n));
  });

  qp::SolveOptions solver;
  solver.eps_abs = config.params.eps_abs;
  solver.max_iters = config.params.max_iters;
  res.trajectory = stage("trajectory-opt", [&] {
    return optimize_trajectory(res.path, res.original_cuts, res.zoom, config.opt_params(), config.retarget_geometry(),
                               solver);
  });
  res.inclusion = stage("metrics", [&] { return included_gaze(gaze, res.trajectory); });
  return res;
}

namespace {

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  template <class Writer>
  void write(const std::string& name, Writer&& writer, bool binary = false) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
    written_.push_back(path);
    writer(out);
    out.flush();
    if (!out) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
  }

  void remove_all() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
  }

  const std::vector<fs::path>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

nlohmann::json crop_json(const RunConfig& config, const RunResult& res) {
  nlohmann::json frames = nlohmann::json::array();
  const Trajectory& traj = res.trajectory;
  std::size_t c = 0;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const int frame = static_cast<int>(t) + 1;
    const bool cut = c < traj.cuts_all.size() && traj.cuts_all[c] == frame;
    if (cut) ++c;
    const CropRect& r = traj.crop_rects[t];
    frames.push_back({{"frame", frame}, {"x", traj.x_star[t]}, {"z", traj.z[t]}, {"left", r.left}, {"top", r.top},
                      {"width", r.width}, {"height", r.height}, {"is_cut", cut}});
  }
  return {
      {"gaze_file", fs::absolute(config.gaze_path).lexically_normal().string()},
      {"geometry",
       {{"width", config.geometry.width},
        {"height", config.geometry.height},
        {"fps", config.geometry.fps},
        {"frames", res.gaze.n_frames()},
        {"target_width", config.target_width()}}},
      {"params", effective_params(config)},
      {"cuts", {{"original", res.original_cuts}, {"introduced", res.path.cuts}, {"all", traj.cuts_all}}},
      {"included_gaze_pct", res.inclusion.included_pct},
      {"solver",
       {{"status", qp::to_string(traj.solver_status)},
        {"iterations", traj.solver_iterations},
        {"objective", traj.objective},
        {"primal_residual", traj.primal_residual},
        {"dual_residual", traj.dual_residual}}},
      {"frames", frames},
  };
}

}  // namespace

RunResult run(const RunConfig& config) {
  stage("config", [&] { config.validate(); });

  auto load = stage("gaze-ingest", [&] { return load_gaze_file(config.gaze_path.string(), config.geometry); });
  std::vector<int> original_cuts;
  if (config.cuts_path) {
    original_cuts = stage("cuts", [&] { return read_cut_list_file(config.cuts_path->string()); });
  } else if (config.histograms_path) {
    original_cuts = stage("cuts", [&] {
      std::ifstream in(*config.histograms_path);
      if (!in) fail(ErrorKind::Io, "cannot open histograms '" + config.histograms_path->string() + "'");
      const auto hist = read_histograms(in);
      require(static_cast<int>(hist.size()) == load.gaze.n_frames(), "histogram count differs from the frame count");
      return detect_cuts_naive(hist, config.params.cut_threshold);
    });
  }

  RunResult res = execute(config, load.gaze, std::move(original_cuts));
  if (load.warnings.total() > 0)
    res.warnings.insert(res.warnings.begin(),
                        "gaze-ingest: " + std::to_string(load.warnings.rejected_records) + " records rejected, " +
                            std::to_string(load.warnings.invalid_samples) + " samples out of frame");

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) fail(ErrorKind::Io, "output: cannot create '" + config.output_dir.string() + "': " + ec.message());

  OutputSet out(config.output_dir);
  try {
    stage("output", [&] {
      out.write("crop_path.csv", [&](std::ostream& os) { write_crop_csv(os, res.trajectory); });
      out.write("crop_path.json", [&](std::ostream& os) { os << crop_json(config, res).dump(2) << '\n'; });
      out.write("inclusion.json", [&](std::ostream& os) { os << to_json(res.inclusion, true).dump(2) << '\n'; });
      out.write("dp_path.csv", [&](std::ostream& os) { write_path_csv(os, res.path); });
      if (config.emit_plot)
        out.write("plot.svg", [&](std::ostream& os) {
          write_plot_svg(os, config.geometry.width, &res.gaze, res.path.r, res.trajectory);
        });
      if (config.emit_script)
        out.write("crop_script.sh", [&](std::ostream& os) {
          write_crop_script(os, res.trajectory, config.geometry.fps,
                            static_cast<int>(std::lround(config.target_width())), config.geometry.height);
        });
      if (config.emit_debug) {
        out.write("fixations.csv", [&](std::ostream& os) {
          write_fixations_csv(os, detect_fixations(res.gaze, config.fixation_params()));
        });
        out.write("zoom.csv", [&](std::ostream& os) { write_zoom_csv(os, res.dispersion, res.zoom); });
        out.write("saliency.pgm",
                  [&](std::ostream& os) { write_saliency_pgm(os, build_saliency(res.gaze, config.params.sigma)); },
                  true);
      }
    });
  } catch (...) {
    out.remove_all();
    throw;
  }
  res.written = out.written();
  return res;
}

}  // namespace retarget
