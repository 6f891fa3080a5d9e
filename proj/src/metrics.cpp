#include "retarget/metrics.hpp"

#include <cmath>
#include <random>

#include "retarget/error.hpp"

namespace retarget {

GazeInclusionReport included_gaze(const GazeSet& gaze, const Trajectory& traj) {
  require(static_cast<int>(traj.size()) == gaze.n_frames(), "trajectory length must equal the gaze frame count");
  GazeInclusionReport rep;
  const auto n = static_cast<std::size_t>(gaze.n_frames());
  rep.per_frame_included.assign(n, 0.0);
  rep.per_frame_samples.assign(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const CropRect& rect = traj.crop_rects[t];
    int inside = 0, total = 0;
    for (const GazeSample& s : gaze.frame_samples(static_cast<int>(t) + 1)) {
      if (!s.valid) continue;
      ++total;
      if (s.x >= rect.left && s.x < rect.left + rect.width) ++inside;
    }
    rep.per_frame_samples[t] = total;
    rep.per_frame_included[t] = total > 0 ? static_cast<double>(inside) / total : 0.0;
    rep.n_samples += static_cast<std::size_t>(total);
    rep.n_included += static_cast<std::size_t>(inside);
  }
  if (rep.n_samples == 0) fail(ErrorKind::EmptyInput, "no valid gaze samples to score");
  rep.included_pct = 100.0 * static_cast<double>(rep.n_included) / static_cast<double>(rep.n_samples);
  return rep;
}

nlohmann::json to_json(const GazeInclusionReport& report, bool per_frame) {
  nlohmann::json j = {
      {"included_pct", report.included_pct},
      {"n_samples", report.n_samples},
      {"n_included", report.n_included},
  };
  if (per_frame) j["per_frame_included"] = report.per_frame_included;
  return j;
}

Trajectory centered_window(const GazeSet& gaze, double target_width) {
  const RetargetGeometry geom{gaze.frame_width(), gaze.frame_height(), target_width};
  geom.validate();
  const auto n = static_cast<std::size_t>(gaze.n_frames());
  Trajectory traj;
  traj.x_star.assign(n, gaze.frame_width() / 2.0);
  traj.z.assign(n, 1.0);
  traj.crop_rects.assign(n, crop_rect(gaze.frame_width() / 2.0, 1.0, geom));
  return traj;
}

Regime parse_regime(const std::string& name) {
  if (name == "fixation") return Regime::Fixation;
  if (name == "pursuit") return Regime::Pursuit;
  if (name == "saccade") return Regime::Saccade;
  if (name == "mixed") return Regime::Mixed;
  fail(ErrorKind::Validation, "unknown regime '" + name + "'");
}

const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::Fixation: return "fixation";
    case Regime::Pursuit: return "pursuit";
    case Regime::Saccade: return "saccade";
    case Regime::Mixed: return "mixed";
  }
  return "unknown";
}

void SynthSpec::validate() const {
  require(n_users >= 1 && n_frames >= 1, "synthetic spec needs users and frames");
  require(geometry.width > 0 && geometry.height > 0 && geometry.fps > 0, "synthetic geometry must be positive");
  require(noise_sd >= 0, "noise_sd must be non-negative");
  require(segment_frames >= 1, "segment_frames must be positive");
  auto inside = [&](double x) { return x >= 0 && x < geometry.width; };
  require(inside(anchor_x) && anchor_y >= 0 && anchor_y < geometry.height, "anchor outside the frame");
  switch (regime) {
    case Regime::Pursuit:
      require(inside(anchor_x + velocity * (n_frames - 1)), "pursuit leaves the frame");
      break;
    case Regime::Saccade:
      require(jump_frame >= 2 && jump_frame <= n_frames, "jump frame outside [2, N]");
      require(inside(anchor_x + jump), "saccade target outside the frame");
      break;
    default: break;
  }
}

namespace {

double mixed_anchor(const SynthSpec& spec, int block) {
  // Golden-ratio sequence spreads anchors over the middle 60% of the frame.
  const double frac = std::fmod(0.5 + block * 0.6180339887498949, 1.0);
  return spec.geometry.width * (0.2 + 0.6 * frac);
}

}  // namespace

double synth_base_x(const SynthSpec& spec, int t) {
  switch (spec.regime) {
    case Regime::Fixation: return spec.anchor_x;
    case Regime::Pursuit: return spec.anchor_x + spec.velocity * (t - 1);
    case Regime::Saccade: return t < spec.jump_frame ? spec.anchor_x : spec.anchor_x + spec.jump;
    case Regime::Mixed: {
      const int block = (t - 1) / spec.segment_frames;
      const int offset = (t - 1) % spec.segment_frames;
      const double a = mixed_anchor(spec, block);
      const double b = mixed_anchor(spec, block + 1);
      switch (block % 3) {
        case 0: return a;
        case 1: return a + (b - a) * offset / spec.segment_frames;
        default: return offset < spec.segment_frames / 2 ? a : b;
      }
    }
  }
  return spec.anchor_x;
}

GazeSet generate(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  FrameGeometry geom = spec.geometry;
  geom.n_frames = spec.n_frames;

  std::vector<GazeSample> samples;
  samples.reserve(static_cast<std::size_t>(spec.n_users) * static_cast<std::size_t>(spec.n_frames));
  for (int t = 1; t <= spec.n_frames; ++t) {
    const double base = synth_base_x(spec, t);
    for (int u = 1; u <= spec.n_users; ++u) {
      const double x = base + spec.noise_sd * noise(rng);
      const double y = spec.anchor_y + spec.noise_sd * noise(rng);
      const bool valid = x >= 0 && x < geom.width && y >= 0 && y < geom.height;
      samples.push_back({u, t, x, y, valid});
    }
  }
  return GazeSet(std::move(samples), geom);
}

}  // namespace retarget
