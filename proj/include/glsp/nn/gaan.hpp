#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glsp/nn/tensor.hpp"

namespace glsp::nn {

struct ModelConfig {
  std::size_t input_dim = 72;
  std::size_t edge_input_dim = 2;
  std::size_t hidden = 128;
  std::size_t heads = 8;
  std::size_t edge_dim = 64;
  std::size_t depth = 4;
  std::size_t outputs = 4;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
  void validate() const;
};

/// y = x W + b with W stored in_dim x out_dim.
struct Linear {
  Tensor weight;
  Tensor bias;

  Tensor operator()(const Tensor& x) const { return add(matmul(x, weight), bias); }
  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

struct HeadParams {
  Linear xa;  // destination node projection
  Linear za;  // neighbor projection
  Linear e;   // edge projection
  Linear w;   // attention logits over xa ⊕ za ⊕ e
  Linear v;   // neighbor values
};

struct GaanLayerParams {
  std::vector<HeadParams> heads;
  Linear o;  // over x ⊕ head_1 ⊕ ... ⊕ head_K
};

/// Directed message graph: one row of `edges` per message src -> dst.
/// Undirected graphs list both directions with the same edge features.
struct GraphInput {
  Tensor nodes;
  Tensor edges;
  Index src;
  Index dst;
  std::size_t num_nodes = 0;
};

struct LayerTrace {
  std::vector<Tensor> attention;  // per head, messages x channels
};

using NamedParameter = std::pair<std::string, Tensor>;

/// Channel-wise attention logits for a batch of (x_i, z_j, e_ij) rows, in the
/// literal concatenated form.
Tensor attention_logits(const HeadParams& head, const Tensor& x, const Tensor& z, const Tensor& e);

/// One attention layer. Returns FC_o(x ⊕ aggregates) before any activation.
Tensor gaan_layer(const GaanLayerParams& params, const Tensor& x, const GraphInput& graph,
                  LayerTrace* trace = nullptr);

class GaanModel {
 public:
  GaanModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  /// Per-node class probabilities, num_nodes x outputs.
  Tensor forward(const GraphInput& graph, std::vector<LayerTrace>* traces = nullptr) const;

  /// Stable order; handles share storage with the model.
  std::vector<NamedParameter> named_parameters() const;
  std::size_t parameter_count() const;

  Linear input;
  std::vector<GaanLayerParams> layers;

 private:
  ModelConfig config_;
};

}  // namespace glsp::nn
