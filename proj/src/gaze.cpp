#include "retarget/gaze.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "retarget/error.hpp"
#include "retarget/format.hpp"

namespace retarget {

GazeSet::GazeSet(std::vector<GazeSample> samples, FrameGeometry geometry)
    : samples_(std::move(samples)), geometry_(geometry) {
  require(geometry_.width > 0 && geometry_.height > 0, "frame geometry must be positive");
  require(geometry_.n_frames >= 1, "gaze set needs at least one frame");
  std::sort(samples_.begin(), samples_.end(), [](const GazeSample& a, const GazeSample& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.user_id < b.user_id;
  });

  std::set<int> users;
  frame_offset_.assign(static_cast<std::size_t>(geometry_.n_frames) + 1, 0);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const GazeSample& s = samples_[i];
    require(s.frame >= 1 && s.frame <= geometry_.n_frames,
            "sample frame " + std::to_string(s.frame) + " outside [1, N]");
    if (i > 0 && samples_[i - 1].frame == s.frame && samples_[i - 1].user_id == s.user_id)
      fail(ErrorKind::Validation, "duplicate sample for user " + std::to_string(s.user_id) +
                                      " at frame " + std::to_string(s.frame));
    if (s.valid) {
      require(s.x >= 0 && s.x < geometry_.width && s.y >= 0 && s.y < geometry_.height,
              "valid sample outside the frame");
      ++valid_count_;
    }
    users.insert(s.user_id);
    ++frame_offset_[static_cast<std::size_t>(s.frame)];
  }
  for (std::size_t t = 1; t < frame_offset_.size(); ++t) frame_offset_[t] += frame_offset_[t - 1];
  user_ids_.assign(users.begin(), users.end());
}

std::span<const GazeSample> GazeSet::frame_samples(int t) const {
  if (t < 1 || t > geometry_.n_frames)
    fail(ErrorKind::Index, "frame " + std::to_string(t) + " outside [1, " +
                               std::to_string(geometry_.n_frames) + "]");
  const auto begin = frame_offset_[static_cast<std::size_t>(t) - 1];
  const auto end = frame_offset_[static_cast<std::size_t>(t)];
  return std::span<const GazeSample>(samples_).subspan(begin, end - begin);
}

std::vector<double> GazeSet::gaze_column(int t) const {
  std::vector<double> xs;
  for (const GazeSample& s : frame_samples(t))
    if (s.valid) xs.push_back(s.x);
  return xs;
}

namespace {

struct RawRecord {
  std::size_t line = 0;
  int user = 0;
  std::optional<int> frame;
  std::optional<double> time_s;
  double x = 0.0;
  double y = 0.0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line, const char* field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(line, std::string("bad ") + field + " value '" + s + "'");
  return v;
}

int to_int(const std::string& s, std::size_t line, const char* field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line, std::string("bad ") + field + " value '" + s + "'");
  return v;
}

std::vector<RawRecord> parse_csv(std::istream& in) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t lineno = 0;
  bool timed = false;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!have_header) {
      if (fields == std::vector<std::string>{"user", "frame", "x", "y"}) {
        timed = false;
      } else if (fields == std::vector<std::string>{"user", "time_s", "x", "y"}) {
        timed = true;
      } else {
        throw ParseError(lineno, "expected header 'user,frame,x,y' or 'user,time_s,x,y'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 4) throw ParseError(lineno, "expected 4 fields, got " + std::to_string(fields.size()));
    RawRecord r;
    r.line = lineno;
    r.user = to_int(fields[0], lineno, "user");
    if (timed)
      r.time_s = to_double(fields[1], lineno, "time_s");
    else
      r.frame = to_int(fields[1], lineno, "frame");
    r.x = to_double(fields[2], lineno, "x");
    r.y = to_double(fields[3], lineno, "y");
    records.push_back(r);
  }
  if (!have_header) throw ParseError(lineno, "missing header");
  return records;
}

std::vector<RawRecord> parse_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError(0, "JSON gaze input must be an array");
  std::vector<RawRecord> records;
  std::size_t index = 0;
  for (const auto& el : doc) {
    ++index;
    // JSON records are numbered by element position.
    auto number = [&](const char* key) -> double {
      if (!el.contains(key) || !el[key].is_number()) throw ParseError(index, std::string("missing numeric '") + key + "'");
      return el[key].get<double>();
    };
    RawRecord r;
    r.line = index;
    if (!el.is_object()) throw ParseError(index, "element is not an object");
    if (!el.contains("user") || !el["user"].is_number_integer()) throw ParseError(index, "missing integer 'user'");
    r.user = el["user"].get<int>();
    if (el.contains("frame")) {
      if (!el["frame"].is_number_integer()) throw ParseError(index, "'frame' must be an integer");
      r.frame = el["frame"].get<int>();
    } else {
      r.time_s = number("time_s");
    }
    r.x = number("x");
    r.y = number("y");
    records.push_back(r);
  }
  return records;
}

}  // namespace

LoadResult load_gaze(std::istream& source, const FrameGeometry& geometry, GazeFormat format) {
  require(geometry.width > 0 && geometry.height > 0, "frame width and height must be positive");
  require(geometry.n_frames >= 0, "frame count must not be negative");

  if (format == GazeFormat::Auto) {
    source >> std::ws;
    const int c = source.peek();
    format = (c == '[' || c == '{') ? GazeFormat::Json : GazeFormat::Csv;
  }
  const std::vector<RawRecord> records = format == GazeFormat::Json ? parse_json(source) : parse_csv(source);

  FrameGeometry geom = geometry;
  std::vector<int> frames(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& r = records[i];
    if (r.frame) {
      frames[i] = *r.frame;
    } else {
      require(geometry.fps > 0, "time-stamped gaze needs a positive fps");
      frames[i] = static_cast<int>(std::floor(*r.time_s * geometry.fps)) + 1;
    }
  }
  if (geom.n_frames == 0) {
    for (int f : frames) geom.n_frames = std::max(geom.n_frames, f);
  }

  LoadResult result;
  result.records = records.size();
  std::vector<GazeSample> samples;
  samples.reserve(records.size());
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& r = records[i];
    const int frame = frames[i];
    if (frame < 1 || frame > geom.n_frames || !seen.emplace(r.user, frame).second) {
      ++result.warnings.rejected_records;
      continue;
    }
    GazeSample s{r.user, frame, r.x, r.y, true};
    if (!(r.x >= 0 && r.x < geom.width && r.y >= 0 && r.y < geom.height)) {
      s.valid = false;
      ++result.warnings.invalid_samples;
    }
    samples.push_back(s);
  }

  if (geom.n_frames < 1) fail(ErrorKind::EmptyInput, "gaze input contains no frames");
  result.gaze = GazeSet(std::move(samples), geom);
  if (result.gaze.valid_count() == 0) fail(ErrorKind::EmptyInput, "gaze input has no valid samples");
  return result;
}

LoadResult load_gaze_file(const std::string& path, const FrameGeometry& geometry) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open gaze file '" + path + "'");
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return load_gaze(in, geometry, json ? GazeFormat::Json : GazeFormat::Auto);
}

void write_gaze_csv(std::ostream& out, const GazeSet& gaze) {
  out << "user,frame,x,y\n";
  // Emit in (user, frame) order so files read naturally per recording.
  std::vector<GazeSample> sorted(gaze.samples().begin(), gaze.samples().end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const GazeSample& a, const GazeSample& b) { return a.user_id < b.user_id; });
  for (const GazeSample& s : sorted)
    out << s.user_id << ',' << s.frame << ',' << exact(s.x) << ',' << exact(s.y) << '\n';
}

}  // namespace retarget
