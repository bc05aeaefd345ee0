#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "glsp/geometry.hpp"

namespace glsp {

struct Canvas {
  int width = 256;
  int height = 256;

  double diagonal() const;
  bool contains(Point p) const;
  friend bool operator==(const Canvas&, const Canvas&) = default;
};

struct AnnotatedLine {
  Segment segment;
  double thickness = 1.0;
  SegmentClass cls = SegmentClass::wall;

  friend bool operator==(const AnnotatedLine&, const AnnotatedLine&) = default;
};

struct Room {
  std::string category;
  std::vector<Point> contour;

  friend bool operator==(const Room&, const Room&) = default;
};

/// Ground-truth vector drawing of one floor plan.
struct FloorPlanAnnotation {
  double scale = 1.0;  // millimeters per pixel
  Canvas canvas;
  std::vector<AnnotatedLine> lines;
  std::vector<Room> rooms;

  friend bool operator==(const FloorPlanAnnotation&, const FloorPlanAnnotation&) = default;

  /// Throws std::invalid_argument if an invariant is broken.
  void validate() const;
  std::size_t count(SegmentClass c) const;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Shape of the recursive-split generator. Pixel quantities are integers on
/// the pixel grid so that every junction lands on a pixel center.
struct GeneratorConfig {
  Canvas canvas;
  int margin = 16;
  int min_rooms = 4;
  int max_rooms = 8;
  int min_room_size = 48;
  // Junctions that share a boundary line are either coincident or at least
  // this far apart. Keeping it above the labeling radius keeps labels exact.
  int min_junction_gap = 26;
  Range door_width{26, 30};
  Range window_width{28, 48};
  double extra_door_probability = 0.25;
  double window_probability = 0.55;
  bool entrance_door = true;
  double inclined_wall_probability = 0.15;
  Range chamfer_size{30, 60};
  Range exterior_wall_thickness{5, 7};
  Range interior_wall_thickness{3, 5};
  Range door_thickness{2, 3};
  Range window_thickness{4, 6};
  Range scale{40.0, 90.0};

  void validate() const;
};

/// Deterministic in (seed, config).
FloorPlanAnnotation generate_plan(std::uint64_t seed, const GeneratorConfig& config);

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class WallMode { solid, hollow };

struct StyleConfig {
  Rgb wall{0.08, 0.08, 0.08};
  Rgb door{0.85, 0.25, 0.2};
  Rgb window{0.2, 0.45, 0.9};
  Rgb background{1.0, 1.0, 1.0};
  WallMode wall_mode = WallMode::solid;
  double noise = 0.0;
  std::uint64_t seed = 0;

  static constexpr double kMinContrast = 0.2;
  void validate() const;
};

/// Random per-plan style variation around the default palette.
struct StyleVariation {
  double color_jitter = 0.08;
  double hollow_probability = 0.3;
  Range noise{0.0, 0.05};
};

StyleConfig sample_style(std::uint64_t seed, const StyleVariation& variation = {});

/// Channel-major float planes, values normally in [0, 1].
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int height, int width, float fill = 0.0f);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }
  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  /// Appends the channels of `other` (same height and width).
  void append_channels(const FeatureMap& other);

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Three color channels. Pixel (x, y) is centered on integer coordinates.
FeatureMap rasterize(const FloorPlanAnnotation& plan, const StyleConfig& style);

inline constexpr std::string_view kRasterMagic = "GLSPRAST";
inline constexpr std::string_view kHeatmapMagic = "GLSPHEAT";

void save_feature_map(const std::filesystem::path& path, const FeatureMap& map,
                      std::string_view magic = kRasterMagic);
FeatureMap load_feature_map(const std::filesystem::path& path,
                            std::string_view magic = kRasterMagic);

class AnnotationError : public std::runtime_error {
 public:
  enum class Kind { malformed, unknown_class, out_of_canvas, io };
  AnnotationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string annotation_to_string(const FloorPlanAnnotation& plan);
FloorPlanAnnotation annotation_from_string(std::string_view text);
void save_annotation(const std::filesystem::path& path, const FloorPlanAnnotation& plan);
FloorPlanAnnotation load_annotation(const std::filesystem::path& path);

}  // namespace glsp
