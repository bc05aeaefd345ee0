#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "glsp/embed.hpp"
#include "glsp/eval.hpp"
#include "glsp/graph.hpp"
#include "glsp/junction.hpp"
#include "glsp/nn/gaan.hpp"
#include "glsp/synthgen.hpp"

namespace glsp {

enum class JunctionSource { oracle, detected };
enum class Pooling { rroi, loi };

std::string_view to_string(JunctionSource s);
std::string_view to_string(Suppression s);

/// Everything between the raster and the GNN.
struct PipelineConfig {
  Suppression suppression = Suppression::nds;
  JunctionSource junctions = JunctionSource::oracle;
  int nms_kernel = kDefaultNmsKernel;
  double junction_threshold = kDefaultJunctionThreshold;
  std::size_t max_junctions = kDefaultMaxJunctions;
  Pooling pooling = Pooling::rroi;

  void validate() const;
};

/// How synthetic samples are produced.
struct DatasetConfig {
  GeneratorConfig generator;
  StyleVariation style;
  double heatmap_sigma = 2.0;
  double heatmap_noise = 0.05;
};

struct Sample {
  FloorPlanAnnotation plan;
  FeatureMap raster;
  JunctionHeatmap heatmap;
};

Sample make_sample(std::uint64_t seed, const DatasetConfig& config);
/// Sample k uses derive_seed(seed, k).
std::vector<Sample> make_dataset(std::uint64_t seed, std::size_t count, const DatasetConfig& config);

/// Raster channels with the heatmap stacked as one more channel.
FeatureMap model_features(const FeatureMap& raster, const JunctionHeatmap& heatmap);

inline constexpr std::size_t kFeatureChannels = 4;
inline constexpr std::size_t kNodeFeatureSize = kBasicInfoSize + kPooledLength * kFeatureChannels;

/// A dual graph with everything that does not depend on model weights.
struct PreparedGraph {
  Canvas canvas;
  std::vector<DetectedJunction> junctions;
  CandidateGraph graph;
  std::vector<std::vector<double>> pooled;  // per node
  nn::Tensor edge_features;                 // per directed message
  nn::Index src;
  nn::Index dst;
};

/// Junctions come from the annotation in oracle mode, from NMS otherwise.
std::vector<DetectedJunction> find_junctions(const JunctionHeatmap& heatmap, const PipelineConfig& config,
                                             const FloorPlanAnnotation* plan);

PreparedGraph prepare_graph(const FeatureMap& features, std::vector<DetectedJunction> junctions,
                            const PipelineConfig& config);

PreparedGraph prepare_sample(const Sample& sample, const PipelineConfig& config);

/// Model input. With an rng, basic-info endpoint order is randomized.
nn::GraphInput graph_input(const PreparedGraph& prepared, Rng* rng = nullptr);

/// Runs the model, stores node scores in `prepared.graph`, and returns the
/// non-null predictions.
PredictionSet predict(const nn::GaanModel& model, PreparedGraph& prepared);

/// Meaningful-class predictions from already scored nodes.
PredictionSet prediction_set(const PreparedGraph& prepared);

}  // namespace glsp
