#pragma once

#include <array>
#include <vector>

#include "glsp/geometry.hpp"
#include "glsp/rng.hpp"
#include "glsp/synthgen.hpp"

namespace glsp {

inline constexpr int kBasicInfoSize = 8;
inline constexpr int kAlongSamples = 32;
inline constexpr int kPooledLength = 16;
inline constexpr std::array<double, 3> kNormalOffsets = {-1.0, 0.0, 1.0};
inline constexpr int kEdgeEmbeddingSize = 2;

/// Maps a pixel coordinate in [0, extent) to [-1, 1).
inline double normalize_coordinate(double v, double extent) { return 2.0 * v / extent - 1.0; }

/// Midpoint, both endpoints (normalized to [-1, 1)), length over the canvas
/// diagonal and |cos| of the angle to the horizontal axis. With an rng the
/// endpoint order is a coin flip; without one, endpoints are sorted.
std::array<double, kBasicInfoSize> basic_info(const Segment& seg, const Canvas& canvas,
                                              Rng* rng = nullptr);

/// Bilinear sample with coordinates clamped to the pixel-center domain.
double sample_bilinear(const FeatureMap& fm, int channel, double x, double y);

/// Rotated-RoI pooling: 32 points along the segment (both endpoints
/// included) at normal offsets {-1, 0, 1}, max-pooled with a (2, 3) window
/// to 16 values per channel. Channel-major output of size 16 * C.
std::vector<double> rroi_pool(const FeatureMap& fm, const Segment& seg);

/// Line-of-interest pooling: 32 on-line samples max-pooled in pairs.
std::vector<double> loi_pool(const FeatureMap& fm, const Segment& seg);

std::array<double, kEdgeEmbeddingSize> edge_embedding(Point shared, const Canvas& canvas);

}  // namespace glsp
