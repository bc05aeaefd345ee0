#include "glsp/junction.hpp"

#include <algorithm>
#include <cmath>

#include "glsp/rng.hpp"

namespace glsp {

FeatureMap JunctionHeatmap::as_feature_map() const {
  FeatureMap fm(1, height, width);
  fm.data() = values;
  return fm;
}

JunctionHeatmap JunctionHeatmap::from_feature_map(const FeatureMap& map, HeatmapSource src) {
  if (map.channels() != 1) throw std::invalid_argument("heatmap must have exactly one channel");
  JunctionHeatmap hm(map.width(), map.height(), src);
  hm.values = map.data();
  return hm;
}

std::vector<Point> ground_truth_junctions(const FloorPlanAnnotation& plan, double tol) {
  std::vector<Point> out;
  auto add = [&](Point p) {
    for (const Point& q : out) {
      if (near(p, q, tol)) return;
    }
    out.push_back(p);
  };
  for (const AnnotatedLine& line : plan.lines) {
    add(line.segment.a());
    add(line.segment.b());
  }
  return out;
}

JunctionHeatmap render_heatmap(std::span<const Point> junctions, int width, int height, double sigma,
                               double noise, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("heatmap sigma must be positive");
  JunctionHeatmap hm(width, height, HeatmapSource::oracle);
  const double radius = 5.0 * sigma;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (const Point& j : junctions) {
    const int x0 = std::max(0, static_cast<int>(std::floor(j.x - radius)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(j.x + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(j.y - radius)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(j.y + radius)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double d2 = squared_distance({double(x), double(y)}, j);
        const float v = static_cast<float>(std::exp(-d2 * inv));
        hm.at(x, y) = std::max(hm.at(x, y), v);
      }
    }
  }
  if (noise > 0.0) {
    Rng rng(derive_seed(seed, 0x4ea7));
    std::uniform_real_distribution<float> u(static_cast<float>(-noise), static_cast<float>(noise));
    for (float& v : hm.values) v = std::clamp(v + u(rng), 0.0f, 1.0f);
  }
  return hm;
}

JunctionHeatmap render_oracle_heatmap(const FloorPlanAnnotation& plan, double sigma, double noise,
                                      std::uint64_t seed) {
  const auto junctions = ground_truth_junctions(plan);
  return render_heatmap(junctions, plan.canvas.width, plan.canvas.height, sigma, noise, seed);
}

namespace {

// Separable sliding-window maximum with the window clipped at the borders.
std::vector<float> window_max(const JunctionHeatmap& hm, int half) {
  const int w = hm.width;
  const int h = hm.height;
  std::vector<float> rows(hm.values.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float m = hm.at(x, y);
      for (int dx = std::max(0, x - half); dx <= std::min(w - 1, x + half); ++dx) m = std::max(m, hm.at(dx, y));
      rows[static_cast<std::size_t>(y) * w + x] = m;
    }
  }
  std::vector<float> out(hm.values.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float m = rows[static_cast<std::size_t>(y) * w + x];
      for (int dy = std::max(0, y - half); dy <= std::min(h - 1, y + half); ++dy) {
        m = std::max(m, rows[static_cast<std::size_t>(dy) * w + x]);
      }
      out[static_cast<std::size_t>(y) * w + x] = m;
    }
  }
  return out;
}

// True if an equal value appears earlier in row-major order within the window.
bool has_earlier_tie(const JunctionHeatmap& hm, int x, int y, int half) {
  const float v = hm.at(x, y);
  for (int yy = std::max(0, y - half); yy <= y; ++yy) {
    const int x_end = yy == y ? x - 1 : std::min(hm.width - 1, x + half);
    for (int xx = std::max(0, x - half); xx <= x_end; ++xx) {
      if (hm.at(xx, yy) == v) return true;
    }
  }
  return false;
}

void sort_and_truncate(std::vector<std::pair<std::size_t, DetectedJunction>>& found,
                       std::size_t max_out) {
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.second.score != b.second.score) return a.second.score > b.second.score;
    return a.first < b.first;
  });
  if (found.size() > max_out) found.resize(max_out);
}

}  // namespace

std::vector<DetectedJunction> nms_detect(const JunctionHeatmap& hm, int kernel, double threshold,
                                         std::size_t max_out) {
  if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("NMS kernel must be odd and positive");
  const int half = kernel / 2;
  const auto maxima = window_max(hm, half);
  std::vector<std::pair<std::size_t, DetectedJunction>> found;
  for (int y = 0; y < hm.height; ++y) {
    for (int x = 0; x < hm.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * hm.width + x;
      const float v = hm.values[idx];
      if (v < maxima[idx] || v < threshold) continue;
      if (has_earlier_tie(hm, x, y, half)) continue;
      found.push_back({idx, {{double(x), double(y)}, static_cast<double>(v)}});
    }
  }
  sort_and_truncate(found, max_out);
  std::vector<DetectedJunction> out;
  out.reserve(found.size());
  for (auto& f : found) out.push_back(f.second);
  return out;
}

std::vector<DetectedJunction> bin_quantize_detect(const JunctionHeatmap& hm, int bin, double threshold) {
  if (bin < 2) throw std::invalid_argument("bin size must be at least 2");
  std::vector<std::pair<std::size_t, DetectedJunction>> found;
  for (int cy = 0; cy < hm.height; cy += bin) {
    for (int cx = 0; cx < hm.width; cx += bin) {
      int bx = cx;
      int by = cy;
      for (int y = cy; y < std::min(hm.height, cy + bin); ++y) {
        for (int x = cx; x < std::min(hm.width, cx + bin); ++x) {
          if (hm.at(x, y) > hm.at(bx, by)) {
            bx = x;
            by = y;
          }
        }
      }
      const float v = hm.at(bx, by);
      if (v >= threshold) {
        found.push_back({static_cast<std::size_t>(by) * hm.width + bx, {{double(bx), double(by)}, double(v)}});
      }
    }
  }
  sort_and_truncate(found, found.size());
  std::vector<DetectedJunction> out;
  for (auto& f : found) out.push_back(f.second);
  return out;
}

void save_heatmap(const std::filesystem::path& path, const JunctionHeatmap& hm) {
  save_feature_map(path, hm.as_feature_map(), kHeatmapMagic);
}

JunctionHeatmap load_heatmap(const std::filesystem::path& path) {
  return JunctionHeatmap::from_feature_map(load_feature_map(path, kHeatmapMagic));
}

}  // namespace glsp
