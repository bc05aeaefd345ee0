#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glsp/geometry.hpp"
#include "glsp/synthgen.hpp"

namespace glsp {

enum class HeatmapSource { oracle, external };

/// Per-pixel junction likelihood.
struct JunctionHeatmap {
  int width = 0;
  int height = 0;
  std::vector<float> values;
  HeatmapSource source = HeatmapSource::external;

  JunctionHeatmap() = default;
  JunctionHeatmap(int w, int h, HeatmapSource src = HeatmapSource::external)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0f), source(src) {}

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }

  /// Single-channel feature map view, for stacking under the raster.
  FeatureMap as_feature_map() const;
  static JunctionHeatmap from_feature_map(const FeatureMap& map, HeatmapSource src = HeatmapSource::external);
};

struct DetectedJunction {
  Point position;
  double score = 0.0;
};

/// Distinct endpoints of all annotated lines, in first-seen order.
std::vector<Point> ground_truth_junctions(const FloorPlanAnnotation& plan, double tol = kSnapTolerance);

/// Gaussian bumps of peak 1 at every junction, combined by per-pixel maximum,
/// plus seeded uniform noise in [-noise, noise], clamped to [0, 1].
JunctionHeatmap render_heatmap(std::span<const Point> junctions, int width, int height,
                               double sigma, double noise, std::uint64_t seed);
JunctionHeatmap render_oracle_heatmap(const FloorPlanAnnotation& plan, double sigma, double noise,
                                      std::uint64_t seed);

inline constexpr int kDefaultNmsKernel = 3;
inline constexpr double kDefaultJunctionThreshold = 0.5;
inline constexpr std::size_t kDefaultMaxJunctions = 256;

/// Pixel-level non-maximum suppression. A pixel survives when it is the
/// maximum of its kernel x kernel window and no equal value precedes it in
/// row-major order inside that window. Survivors at or above `threshold`
/// come back sorted by score (descending), ties in row-major order.
std::vector<DetectedJunction> nms_detect(const JunctionHeatmap& hm, int kernel = kDefaultNmsKernel,
                                         double threshold = kDefaultJunctionThreshold,
                                         std::size_t max_out = kDefaultMaxJunctions);

/// At most one junction per bin x bin cell, at the cell's maximum pixel.
std::vector<DetectedJunction> bin_quantize_detect(const JunctionHeatmap& hm, int bin,
                                                  double threshold = kDefaultJunctionThreshold);

void save_heatmap(const std::filesystem::path& path, const JunctionHeatmap& hm);
JunctionHeatmap load_heatmap(const std::filesystem::path& path);

}  // namespace glsp
