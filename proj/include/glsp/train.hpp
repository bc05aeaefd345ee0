#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "glsp/graph.hpp"
#include "glsp/nn/checkpoint.hpp"
#include "glsp/nn/gaan.hpp"
#include "glsp/nn/optim.hpp"
#include "glsp/pipeline.hpp"
#include "glsp/synthgen.hpp"

namespace glsp {

/// How a candidate is compared with a ground-truth segment when labeling.
enum class LabelRule {
  endpoint_max,  // larger endpoint distance under the best pairing <= d_max
  squared_sum,   // structural_distance <= d_max^2
};

struct TrainConfig {
  std::vector<std::pair<std::size_t, double>> lr_schedule = {{0, 1e-3}};
  std::size_t batch_size = 4;
  std::size_t total_steps = 2000;
  std::size_t warmup_steps = 200;
  std::size_t pk_step = 500;
  bool pk_enabled = false;
  double weight_decay = 1e-4;
  double d_max = 25.0;
  LabelRule label_rule = LabelRule::endpoint_max;
  std::uint64_t seed = 0;

  void validate() const;
  /// Rate of the last schedule entry whose step is <= `step`.
  double lr_at(std::size_t step) const;
};

std::vector<SegmentClass> label_nodes(const CandidateGraph& graph, const FloorPlanAnnotation& gt,
                                      double d_max = 25.0, LabelRule rule = LabelRule::endpoint_max);

/// Per-node multiplier in {1, 2, 4}. Doubled when the segment properly
/// crosses another segment and both are predicted meaningful; doubled again
/// when it lies on a closed cycle of end-to-end segments all predicted wall
/// or window.
std::vector<double> pk_weights(std::span<const CandidateSegment> nodes, std::span<const SegmentClass> predicted);
std::vector<double> pk_weights(const CandidateGraph& graph);

/// Mean over nodes and classes of row-weighted BCE against one-hot labels.
nn::Tensor graph_loss(const nn::Tensor& scores, std::span<const SegmentClass> labels,
                      std::span<const double> weights = {});

/// One labeled graph, ready for repeated forward passes.
struct TrainingExample {
  PreparedGraph prepared;
  std::vector<SegmentClass> labels;
};

std::vector<TrainingExample> prepare_examples(std::span<const Sample> samples, const PipelineConfig& pipeline,
                                              double d_max, LabelRule rule = LabelRule::endpoint_max);

struct LossRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  bool pk_active = false;
};

struct TrainResult {
  nn::GaanModel model;
  nn::AdamState adam;
  std::vector<LossRecord> log;
  std::size_t skipped = 0;  // examples without a usable graph
};

/// Training steps already taken by a run whose optimizer state is `adam`.
/// Warmup steps never update, so they are inferred from the config.
std::size_t completed_steps(const nn::AdamState& adam, const TrainConfig& config);

/// Steps [start, total_steps) where start is the resumed optimizer step.
/// Examples with fewer than two junctions or no candidates are skipped.
TrainResult train(std::span<const TrainingExample> examples, const TrainConfig& config,
                  const nn::ModelConfig& model_config, std::optional<nn::Checkpoint> resume = std::nullopt);

/// `step<TAB>loss<TAB>lr<TAB>pk_active` per line.
void write_loss_log(std::ostream& out, std::span<const LossRecord> log);

}  // namespace glsp
