#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace retarget {

// Original-frame geometry. Pixel coordinates are 0-based in [0, width);
// frame indices are 1-based in [1, n_frames].
struct FrameGeometry {
  int width = 0;
  int height = 0;
  double fps = 0.0;
  int n_frames = 0;  // 0 on load means "infer from the largest frame seen"
};

struct GazeSample {
  int user_id = 0;
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  bool valid = false;

  friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

struct LoadWarnings {
  std::size_t rejected_records = 0;  // frame out of range, duplicate (user, frame)
  std::size_t invalid_samples = 0;   // coordinates outside the frame

  std::size_t total() const { return rejected_records + invalid_samples; }
};

// Immutable, frame-indexed multi-user gaze recording.
class GazeSet {
 public:
  GazeSet() = default;

  // Samples may arrive in any order. Throws Validation on duplicate
  // (user, frame) pairs or frames outside [1, n_frames].
  GazeSet(std::vector<GazeSample> samples, FrameGeometry geometry);

  std::span<const GazeSample> samples() const { return samples_; }
  // All samples (valid or not) recorded at frame t, ordered by user id.
  std::span<const GazeSample> frame_samples(int t) const;
  // x-positions of valid samples at frame t, ordered by user id.
  std::vector<double> gaze_column(int t) const;

  const FrameGeometry& geometry() const { return geometry_; }
  int n_frames() const { return geometry_.n_frames; }
  int frame_width() const { return geometry_.width; }
  int frame_height() const { return geometry_.height; }
  double fps() const { return geometry_.fps; }
  int n_users() const { return static_cast<int>(user_ids_.size()); }
  const std::vector<int>& user_ids() const { return user_ids_; }
  std::size_t valid_count() const { return valid_count_; }

  friend bool operator==(const GazeSet& a, const GazeSet& b) {
    return a.samples_ == b.samples_ && a.geometry_.width == b.geometry_.width &&
           a.geometry_.height == b.geometry_.height && a.geometry_.fps == b.geometry_.fps &&
           a.geometry_.n_frames == b.geometry_.n_frames;
  }

 private:
  std::vector<GazeSample> samples_;        // sorted by (frame, user)
  std::vector<std::size_t> frame_offset_;  // n_frames + 1 entries
  std::vector<int> user_ids_;
  FrameGeometry geometry_;
  std::size_t valid_count_ = 0;
};

struct LoadResult {
  GazeSet gaze;
  LoadWarnings warnings;
  std::size_t records = 0;
};

enum class GazeFormat { Auto, Csv, Json };

// Parses a gaze recording. CSV headers `user,frame,x,y` and `user,time_s,x,y`
// are accepted; JSON is an array of objects carrying the same fields.
// Timestamps map to frames as floor(time_s * fps) + 1.
LoadResult load_gaze(std::istream& source, const FrameGeometry& geometry,
                     GazeFormat format = GazeFormat::Auto);
LoadResult load_gaze_file(const std::string& path, const FrameGeometry& geometry);

// Writes `user,frame,x,y` with round-trip exact numbers.
void write_gaze_csv(std::ostream& out, const GazeSet& gaze);

}  // namespace retarget
