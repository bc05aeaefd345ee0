#include "glsp/pipeline.hpp"

#include <stdexcept>

#include "glsp/parallel.hpp"

namespace glsp {

std::string_view to_string(JunctionSource s) { return s == JunctionSource::oracle ? "oracle" : "detected"; }
std::string_view to_string(Suppression s) { return s == Suppression::nss ? "nss" : "nds"; }

void PipelineConfig::validate() const {
  if (nms_kernel != 3 && nms_kernel != 5 && nms_kernel != 7) {
    throw std::invalid_argument("nms kernel must be 3, 5 or 7, got " + std::to_string(nms_kernel));
  }
  if (!(junction_threshold > 0.0 && junction_threshold < 1.0)) {
    throw std::invalid_argument("junction threshold must lie in (0, 1)");
  }
  if (max_junctions < 2) throw std::invalid_argument("max_junctions must be at least 2");
}

Sample make_sample(std::uint64_t seed, const DatasetConfig& config) {
  Sample s;
  s.plan = generate_plan(derive_seed(seed, 1), config.generator);
  s.raster = rasterize(s.plan, sample_style(derive_seed(seed, 2), config.style));
  s.heatmap = render_oracle_heatmap(s.plan, config.heatmap_sigma, config.heatmap_noise, derive_seed(seed, 3));
  return s;
}

std::vector<Sample> make_dataset(std::uint64_t seed, std::size_t count, const DatasetConfig& config) {
  std::vector<Sample> out(count);
  parallel_for(count, [&](std::size_t k) { out[k] = make_sample(derive_seed(seed, k), config); });
  return out;
}

FeatureMap model_features(const FeatureMap& raster, const JunctionHeatmap& heatmap) {
  FeatureMap out = raster;
  out.append_channels(heatmap.as_feature_map());
  return out;
}

std::vector<DetectedJunction> find_junctions(const JunctionHeatmap& heatmap, const PipelineConfig& config,
                                             const FloorPlanAnnotation* plan) {
  if (config.junctions == JunctionSource::detected) {
    return nms_detect(heatmap, config.nms_kernel, config.junction_threshold, config.max_junctions);
  }
  if (plan == nullptr) throw std::invalid_argument("oracle junctions need the annotation");
  std::vector<DetectedJunction> out;
  for (const Point& p : ground_truth_junctions(*plan)) out.push_back({p, 1.0});
  return out;
}

PreparedGraph prepare_graph(const FeatureMap& features, std::vector<DetectedJunction> junctions,
                            const PipelineConfig& config) {
  PreparedGraph out;
  out.canvas = {features.width(), features.height()};
  out.junctions = std::move(junctions);
  const auto candidates = enumerate_candidates(out.junctions);
  out.graph = build_dual_graph(suppress(config.suppression, candidates, out.junctions));

  for (const auto& node : out.graph.nodes) {
    out.pooled.push_back(config.pooling == Pooling::rroi ? rroi_pool(features, node.segment)
                                                         : loi_pool(features, node.segment));
  }
  std::vector<double> edge_values;
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  for (const DualEdge& e : out.graph.edges) {
    const auto emb = edge_embedding(e.shared, out.canvas);
    for (int dir = 0; dir < 2; ++dir) {
      src.push_back(dir == 0 ? e.v : e.u);
      dst.push_back(dir == 0 ? e.u : e.v);
      edge_values.insert(edge_values.end(), emb.begin(), emb.end());
    }
  }
  out.edge_features = nn::Tensor::from({src.size(), kEdgeEmbeddingSize}, std::move(edge_values));
  out.src = nn::make_index(std::move(src));
  out.dst = nn::make_index(std::move(dst));
  return out;
}

PreparedGraph prepare_sample(const Sample& sample, const PipelineConfig& config) {
  return prepare_graph(model_features(sample.raster, sample.heatmap),
                       find_junctions(sample.heatmap, config, &sample.plan), config);
}

nn::GraphInput graph_input(const PreparedGraph& prepared, Rng* rng) {
  const std::size_t n = prepared.graph.nodes.size();
  const std::size_t width = n == 0 ? 0 : kBasicInfoSize + prepared.pooled.front().size();
  std::vector<double> values;
  values.reserve(n * width);
  for (std::size_t k = 0; k < n; ++k) {
    const auto basic = basic_info(prepared.graph.nodes[k].segment, prepared.canvas, rng);
    values.insert(values.end(), basic.begin(), basic.end());
    values.insert(values.end(), prepared.pooled[k].begin(), prepared.pooled[k].end());
  }
  return {nn::Tensor::from({n, width}, std::move(values)), prepared.edge_features, prepared.src, prepared.dst, n};
}

PredictionSet prediction_set(const PreparedGraph& prepared) {
  PredictionSet out;
  out.junctions = prepared.junctions;
  if (!prepared.graph.node_scores) return out;
  const auto classes = prepared.graph.predicted_classes();
  for (std::size_t k = 0; k < classes.size(); ++k) {
    if (!is_meaningful(classes[k])) continue;
    out.segments.push_back({prepared.graph.nodes[k].segment, classes[k],
                            (*prepared.graph.node_scores)[k][static_cast<std::size_t>(class_index(classes[k]))]});
  }
  return out;
}

PredictionSet predict(const nn::GaanModel& model, PreparedGraph& prepared) {
  std::vector<std::array<double, kNumClasses>> scores;
  if (!prepared.graph.nodes.empty()) {
    const nn::Tensor probs = model.forward(graph_input(prepared));
    if (probs.cols() != kNumClasses) throw std::invalid_argument("model must produce one score per class");
    for (std::size_t r = 0; r < probs.rows(); ++r) {
      scores.push_back({probs.at(r, 0), probs.at(r, 1), probs.at(r, 2), probs.at(r, 3)});
    }
  }
  prepared.graph.node_scores = std::move(scores);
  return prediction_set(prepared);
}

}  // namespace glsp
