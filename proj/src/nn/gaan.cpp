#include "glsp/nn/gaan.hpp"

#include <cmath>

#include "glsp/rng.hpp"

namespace glsp::nn {

void ModelConfig::validate() const {
  if (input_dim == 0 || edge_input_dim == 0 || hidden == 0 || heads == 0 || edge_dim == 0 ||
      depth == 0 || outputs == 0) {
    throw std::invalid_argument("model config: every dimension must be positive");
  }
}

namespace {

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<double> w(in * out);
  // Stored as float32 on disk; start there so a saved model resumes exactly.
  for (double& v : w) v = static_cast<float>(uniform(rng, -limit, limit));
  return {Tensor::from({in, out}, std::move(w), true), Tensor::zeros({1, out}, true)};
}

void push_linear(std::vector<NamedParameter>& out, const std::string& name, const Linear& l) {
  out.emplace_back(name + ".weight", l.weight);
  out.emplace_back(name + ".bias", l.bias);
}

}  // namespace

Tensor attention_logits(const HeadParams& head, const Tensor& x, const Tensor& z, const Tensor& e) {
  const Tensor parts[] = {head.xa(x), head.za(z), head.e(e)};
  return head.w(concat(parts));
}

Tensor gaan_layer(const GaanLayerParams& params, const Tensor& x, const GraphInput& graph,
                  LayerTrace* trace) {
  const std::size_t n = graph.num_nodes;
  if (x.rows() != n) throw ShapeError("gaan_layer: node states " + to_string(x.shape()) + " for " +
                                      std::to_string(n) + " nodes");
  std::vector<Tensor> parts = {x};
  for (const HeadParams& head : params.heads) {
    // FC_w applied to the concatenation splits into three row blocks, so the
    // node projections are computed once per node rather than once per edge.
    const std::size_t h = head.xa.out_dim();
    const std::size_t hz = head.za.out_dim();
    const Tensor w_x = slice_rows(head.w.weight, 0, h);
    const Tensor w_z = slice_rows(head.w.weight, h, h + hz);
    const Tensor w_e = slice_rows(head.w.weight, h + hz, head.w.in_dim());

    const Tensor from_x = gather_rows(matmul(head.xa(x), w_x), graph.dst);
    const Tensor from_z = gather_rows(matmul(head.za(x), w_z), graph.src);
    const Tensor edge_part = matmul(graph.edges, matmul(head.e.weight, w_e));
    const Tensor bias = add(matmul(head.e.bias, w_e), head.w.bias);
    const Tensor logits = add(add(from_x, from_z), add(edge_part, bias));

    const Tensor weights = neighbor_softmax(logits, graph.dst, n);
    const Tensor values = gather_rows(head.v(x), graph.src);
    parts.push_back(segment_sum(mul(weights, values), graph.dst, n));
    if (trace != nullptr) trace->attention.push_back(weights);
  }
  return params.o(concat(parts));
}

GaanModel::GaanModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(seed, 0x6761616e));
  input = make_linear(config_.input_dim, config_.hidden, rng);
  for (std::size_t m = 0; m < config_.depth; ++m) {
    GaanLayerParams layer;
    for (std::size_t k = 0; k < config_.heads; ++k) {
      HeadParams head;
      head.xa = make_linear(config_.hidden, config_.hidden, rng);
      head.za = make_linear(config_.hidden, config_.hidden, rng);
      head.e = make_linear(config_.edge_input_dim, config_.edge_dim, rng);
      head.w = make_linear(2 * config_.hidden + config_.edge_dim, config_.hidden, rng);
      head.v = make_linear(config_.hidden, config_.hidden, rng);
      layer.heads.push_back(std::move(head));
    }
    const std::size_t out = m + 1 == config_.depth ? config_.outputs : config_.hidden;
    layer.o = make_linear(config_.hidden * (config_.heads + 1), out, rng);
    layers.push_back(std::move(layer));
  }
}

Tensor GaanModel::forward(const GraphInput& graph, std::vector<LayerTrace>* traces) const {
  if (graph.nodes.cols() != config_.input_dim) {
    throw ShapeError("model expects node features with " + std::to_string(config_.input_dim) +
                     " columns, got " + to_string(graph.nodes.shape()));
  }
  Tensor x = silu(input(graph.nodes));
  for (std::size_t m = 0; m < layers.size(); ++m) {
    LayerTrace* trace = nullptr;
    if (traces != nullptr) trace = &traces->emplace_back();
    x = gaan_layer(layers[m], x, graph, trace);
    if (m + 1 < layers.size()) x = silu(x);
  }
  return sigmoid(x);
}

std::vector<NamedParameter> GaanModel::named_parameters() const {
  std::vector<NamedParameter> out;
  push_linear(out, "input", input);
  for (std::size_t m = 0; m < layers.size(); ++m) {
    const std::string prefix = "layer" + std::to_string(m);
    for (std::size_t k = 0; k < layers[m].heads.size(); ++k) {
      const HeadParams& h = layers[m].heads[k];
      const std::string hp = prefix + ".head" + std::to_string(k);
      push_linear(out, hp + ".xa", h.xa);
      push_linear(out, hp + ".za", h.za);
      push_linear(out, hp + ".e", h.e);
      push_linear(out, hp + ".w", h.w);
      push_linear(out, hp + ".v", h.v);
    }
    push_linear(out, prefix + ".o", layers[m].o);
  }
  return out;
}

std::size_t GaanModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [name, t] : named_parameters()) total += t.size();
  return total;
}

}  // namespace glsp::nn
