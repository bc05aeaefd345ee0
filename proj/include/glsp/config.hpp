#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "glsp/nn/gaan.hpp"
#include "glsp/pipeline.hpp"
#include "glsp/train.hpp"

namespace glsp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a command line run can set. Serialized as one JSON document
/// with the sections seed, dataset, pipeline, model, train, eval.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  DatasetConfig dataset;
  PipelineConfig pipeline;
  nn::ModelConfig model;
  TrainConfig train;
  std::vector<double> junction_thresholds = {2, 4, 8};
  std::vector<double> line_thresholds = {8, 16, 32};

  /// Throws ConfigError describing the first broken constraint.
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are an error.
RunConfig run_config_from_json(std::string_view text, const RunConfig& defaults = {});
std::string run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& defaults = {});

Suppression parse_suppression(std::string_view s);
JunctionSource parse_junction_source(std::string_view s);

}  // namespace glsp
