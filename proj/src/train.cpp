#include "glsp/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <ostream>

#include "glsp/parallel.hpp"

namespace glsp {

void TrainConfig::validate() const {
  if (lr_schedule.empty()) throw std::invalid_argument("learning-rate schedule is empty");
  for (std::size_t k = 0; k < lr_schedule.size(); ++k) {
    if (!(lr_schedule[k].second > 0.0)) throw std::invalid_argument("learning rates must be positive");
    if (k > 0 && lr_schedule[k].first <= lr_schedule[k - 1].first) {
      throw std::invalid_argument("learning-rate schedule steps must increase");
    }
  }
  if (lr_schedule.front().first != 0) throw std::invalid_argument("learning-rate schedule must start at step 0");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (warmup_steps >= pk_step) throw std::invalid_argument("warmup must end before the prior-knowledge step");
  if (pk_enabled && total_steps > 0 && pk_step > total_steps) {
    throw std::invalid_argument("prior-knowledge step lies beyond the last step");
  }
  if (!(d_max > 0.0)) throw std::invalid_argument("d_max must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be non-negative");
}

double TrainConfig::lr_at(std::size_t step) const {
  double lr = lr_schedule.front().second;
  for (const auto& [from, rate] : lr_schedule) {
    if (from <= step) lr = rate;
  }
  return lr;
}

std::vector<SegmentClass> label_nodes(const CandidateGraph& graph, const FloorPlanAnnotation& gt, double d_max,
                                      LabelRule rule) {
  std::vector<SegmentClass> out;
  out.reserve(graph.nodes.size());
  const double limit = rule == LabelRule::endpoint_max ? d_max : d_max * d_max;
  for (const auto& node : graph.nodes) {
    double best = std::numeric_limits<double>::infinity();
    SegmentClass cls = SegmentClass::null;
    for (const auto& line : gt.lines) {
      const double d = rule == LabelRule::endpoint_max ? endpoint_max_distance(node.segment, line.segment)
                                                       : structural_distance(node.segment, line.segment);
      if (d <= limit && d < best) {
        best = d;
        cls = line.cls;
      }
    }
    out.push_back(cls);
  }
  return out;
}

namespace {

// Bridges of a multigraph given as an edge list; an edge is on a simple
// cycle exactly when it is not a bridge.
std::vector<bool> bridges(std::size_t vertices, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(vertices);  // (neighbor, edge id)
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].first].push_back({edges[e].second, e});
    adj[edges[e].second].push_back({edges[e].first, e});
  }
  std::vector<bool> is_bridge(edges.size(), false);
  std::vector<int> order(vertices, -1);
  std::vector<int> low(vertices, 0);
  int clock = 0;
  std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t v, std::size_t via) {
    order[v] = low[v] = clock++;
    for (const auto& [w, e] : adj[v]) {
      if (e == via) continue;
      if (order[w] < 0) {
        visit(w, e);
        low[v] = std::min(low[v], low[w]);
        if (low[w] > order[v]) is_bridge[e] = true;
      } else {
        low[v] = std::min(low[v], order[w]);
      }
    }
  };
  for (std::size_t v = 0; v < vertices; ++v) {
    if (order[v] < 0) visit(v, edges.size());
  }
  return is_bridge;
}

}  // namespace

std::vector<double> pk_weights(std::span<const CandidateSegment> nodes, std::span<const SegmentClass> predicted) {
  if (nodes.size() != predicted.size()) throw std::invalid_argument("pk_weights: one class per node expected");
  std::vector<double> weight(nodes.size(), 1.0);

  std::vector<std::size_t> meaningful;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (is_meaningful(predicted[k])) meaningful.push_back(k);
  }
  std::vector<bool> crossed(nodes.size(), false);
  for (std::size_t a = 0; a < meaningful.size(); ++a) {
    for (std::size_t b = a + 1; b < meaningful.size(); ++b) {
      const std::size_t u = meaningful[a];
      const std::size_t v = meaningful[b];
      if (proper_intersect(nodes[u].segment, nodes[v].segment)) crossed[u] = crossed[v] = true;
    }
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (crossed[k]) weight[k] *= 2.0;
  }

  std::map<std::size_t, std::size_t> vertex_id;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> edge_node;
  auto vid = [&](std::size_t junction) { return vertex_id.try_emplace(junction, vertex_id.size()).first->second; };
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (predicted[k] != SegmentClass::wall && predicted[k] != SegmentClass::window) continue;
    edges.push_back({vid(nodes[k].i), vid(nodes[k].j)});
    edge_node.push_back(k);
  }
  const auto bridge = bridges(vertex_id.size(), edges);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!bridge[e]) weight[edge_node[e]] *= 2.0;
  }
  return weight;
}

std::vector<double> pk_weights(const CandidateGraph& graph) {
  return pk_weights(graph.nodes, graph.predicted_classes());
}

nn::Tensor graph_loss(const nn::Tensor& scores, std::span<const SegmentClass> labels, std::span<const double> weights) {
  if (labels.size() != scores.rows()) {
    throw nn::ShapeError("graph_loss: " + std::to_string(labels.size()) + " labels for scores " +
                         nn::to_string(scores.shape()));
  }
  std::vector<double> targets(scores.size(), 0.0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    targets[r * scores.cols() + static_cast<std::size_t>(class_index(labels[r]))] = 1.0;
  }
  return nn::bce_loss(scores, targets, weights);
}

std::vector<TrainingExample> prepare_examples(std::span<const Sample> samples, const PipelineConfig& pipeline,
                                              double d_max, LabelRule rule) {
  std::vector<TrainingExample> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t k) {
    out[k].prepared = prepare_sample(samples[k], pipeline);
    out[k].labels = label_nodes(out[k].prepared.graph, samples[k].plan, d_max, rule);
  });
  return out;
}

namespace {

std::vector<SegmentClass> argmax_classes(const nn::Tensor& probs) {
  std::vector<SegmentClass> out(probs.rows());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.cols(); ++c) {
      if (probs.at(r, c) > probs.at(r, best)) best = c;
    }
    out[r] = static_cast<SegmentClass>(best);
  }
  return out;
}

}  // namespace

std::size_t completed_steps(const nn::AdamState& adam, const TrainConfig& config) {
  return adam.step == 0 ? 0 : config.warmup_steps + static_cast<std::size_t>(adam.step);
}

TrainResult train(std::span<const TrainingExample> examples, const TrainConfig& config,
                  const nn::ModelConfig& model_config, std::optional<nn::Checkpoint> resume) {
  config.validate();
  if (examples.empty()) throw std::invalid_argument("training set is empty");

  TrainResult result{resume ? std::move(resume->model) : nn::GaanModel(model_config, derive_seed(config.seed, 7)),
                     {}, {}, 0};
  const auto params = result.model.named_parameters();
  result.adam = resume && resume->adam ? *resume->adam : nn::AdamState::for_parameters(params);

  std::vector<std::size_t> usable;
  for (std::size_t k = 0; k < examples.size(); ++k) {
    const auto& ex = examples[k];
    if (ex.prepared.junctions.size() < 2 || ex.prepared.graph.nodes.empty()) {
      ++result.skipped;
    } else {
      usable.push_back(k);
    }
  }

  const std::size_t start = completed_steps(result.adam, config);
  if (start >= config.total_steps) return result;
  if (usable.empty()) throw std::invalid_argument("no training example has a usable candidate graph");

  const std::size_t n = usable.size();
  std::size_t epoch_cached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> epoch_order;
  auto pick = [&](std::size_t position) {
    const std::size_t epoch = position / n;
    if (epoch != epoch_cached) {
      epoch_order = usable;
      Rng rng(derive_seed(config.seed, 0x200000 + epoch));
      std::shuffle(epoch_order.begin(), epoch_order.end(), rng);
      epoch_cached = epoch;
    }
    return epoch_order[position % n];
  };

  const double inv_batch = 1.0 / static_cast<double>(config.batch_size);
  for (std::size_t step = start; step < config.total_steps; ++step) {
    const double lr = config.lr_at(step);
    const bool pk_active = config.pk_enabled && step >= config.pk_step;
    const bool update = step >= config.warmup_steps;
    Rng rng(derive_seed(config.seed, 0x100000 + step));

    for (const auto& [name, p] : params) {
      nn::Tensor handle = p;
      handle.zero_grad();
    }
    double total = 0.0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const TrainingExample& ex = examples[pick(step * config.batch_size + b)];
      const nn::Tensor probs = result.model.forward(graph_input(ex.prepared, &rng));
      std::vector<double> weights;
      if (pk_active) weights = pk_weights(ex.prepared.graph.nodes, argmax_classes(probs));
      const nn::Tensor loss = nn::scale(graph_loss(probs, ex.labels, weights), inv_batch);
      total += loss.item();
      if (update) loss.backward();
    }
    if (update) nn::adam_step(params, result.adam, lr, config.weight_decay);
    result.log.push_back({step, total, lr, pk_active});
  }
  return result;
}

void write_loss_log(std::ostream& out, std::span<const LossRecord> log) {
  char buf[128];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%zu\t%.9g\t%.9g\t%d\n", r.step, r.loss, r.lr, r.pk_active ? 1 : 0);
    out << buf;
  }
}

}  // namespace glsp
