#include "glsp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace glsp {

using nlohmann::json;

namespace {

// Reads known keys out of one JSON object and complains about the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + qualify(key) + "'");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception&) {
        throw ConfigError("config key '" + qualify(key) + "' has the wrong type");
      }
    }
  }

  void read_range(const std::string& key, Range& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError("config key '" + qualify(key) + "' must be [lo, hi]");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

}  // namespace

Suppression parse_suppression(std::string_view s) {
  if (s == "nss") return Suppression::nss;
  if (s == "nds") return Suppression::nds;
  throw ConfigError("suppression must be nss or nds, got '" + std::string(s) + "'");
}

JunctionSource parse_junction_source(std::string_view s) {
  if (s == "oracle") return JunctionSource::oracle;
  if (s == "detected") return JunctionSource::detected;
  throw ConfigError("junctions must be oracle or detected, got '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  try {
    dataset.generator.validate();
    pipeline.validate();
    model.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(dataset.heatmap_sigma > 0.0)) throw ConfigError("heatmap_sigma must be positive");
  if (!(dataset.heatmap_noise >= 0.0 && dataset.heatmap_noise <= 1.0)) {
    throw ConfigError("heatmap_noise must lie in [0, 1]");
  }
  if (model.input_dim != kNodeFeatureSize || model.edge_input_dim != kEdgeEmbeddingSize ||
      model.outputs != static_cast<std::size_t>(kNumClasses)) {
    throw ConfigError("model input/output sizes are fixed by the pipeline");
  }
  for (double t : junction_thresholds) {
    if (!(t > 0.0)) throw ConfigError("junction thresholds must be positive");
  }
  for (double t : line_thresholds) {
    if (!(t > 0.0)) throw ConfigError("line thresholds must be positive");
  }
}

namespace {

RunConfig parse_document(const json& doc, const RunConfig& defaults) {
  RunConfig c = defaults;
  Section top(doc, "");
  top.read("seed", c.seed);
  top.read("count", c.count);

  if (const json* d = top.find("dataset")) {
    Section s(*d, "dataset");
    GeneratorConfig& g = c.dataset.generator;
    if (const json* canvas = s.find("canvas")) {
      if (!canvas->is_array() || canvas->size() != 2) throw ConfigError("dataset.canvas must be [width, height]");
      g.canvas = {(*canvas)[0].get<int>(), (*canvas)[1].get<int>()};
    }
    s.read("margin", g.margin);
    s.read("min_rooms", g.min_rooms);
    s.read("max_rooms", g.max_rooms);
    s.read("min_room_size", g.min_room_size);
    s.read("min_junction_gap", g.min_junction_gap);
    s.read_range("door_width", g.door_width);
    s.read_range("window_width", g.window_width);
    s.read("extra_door_probability", g.extra_door_probability);
    s.read("window_probability", g.window_probability);
    s.read("entrance_door", g.entrance_door);
    s.read("inclined_wall_probability", g.inclined_wall_probability);
    s.read_range("chamfer_size", g.chamfer_size);
    s.read_range("exterior_wall_thickness", g.exterior_wall_thickness);
    s.read_range("interior_wall_thickness", g.interior_wall_thickness);
    s.read_range("door_thickness", g.door_thickness);
    s.read_range("window_thickness", g.window_thickness);
    s.read_range("scale", g.scale);
    s.read("color_jitter", c.dataset.style.color_jitter);
    s.read("hollow_probability", c.dataset.style.hollow_probability);
    s.read_range("raster_noise", c.dataset.style.noise);
    s.read("heatmap_sigma", c.dataset.heatmap_sigma);
    s.read("heatmap_noise", c.dataset.heatmap_noise);
  }
  if (const json* p = top.find("pipeline")) {
    Section s(*p, "pipeline");
    if (const json* v = s.find("suppression")) c.pipeline.suppression = parse_suppression(v->get<std::string>());
    if (const json* v = s.find("junctions")) c.pipeline.junctions = parse_junction_source(v->get<std::string>());
    if (const json* v = s.find("pooling")) {
      const auto name = v->get<std::string>();
      if (name != "rroi" && name != "loi") throw ConfigError("pipeline.pooling must be rroi or loi");
      c.pipeline.pooling = name == "rroi" ? Pooling::rroi : Pooling::loi;
    }
    s.read("nms_kernel", c.pipeline.nms_kernel);
    s.read("junction_threshold", c.pipeline.junction_threshold);
    s.read("max_junctions", c.pipeline.max_junctions);
  }
  if (const json* m = top.find("model")) {
    Section s(*m, "model");
    s.read("hidden", c.model.hidden);
    s.read("heads", c.model.heads);
    s.read("edge_dim", c.model.edge_dim);
    s.read("depth", c.model.depth);
  }
  if (const json* t = top.find("train")) {
    Section s(*t, "train");
    if (const json* v = s.find("lr_schedule")) {
      c.train.lr_schedule.clear();
      if (!v->is_array()) throw ConfigError("train.lr_schedule must be a list of [step, lr]");
      for (const json& e : *v) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("train.lr_schedule entries must be [step, lr]");
        c.train.lr_schedule.emplace_back(e[0].get<std::size_t>(), e[1].get<double>());
      }
    }
    s.read("batch_size", c.train.batch_size);
    s.read("steps", c.train.total_steps);
    s.read("warmup_steps", c.train.warmup_steps);
    s.read("pk_step", c.train.pk_step);
    s.read("pk", c.train.pk_enabled);
    s.read("weight_decay", c.train.weight_decay);
    s.read("d_max", c.train.d_max);
    if (const json* v = s.find("label_rule")) {
      const auto name = v->get<std::string>();
      if (name == "endpoint_max") {
        c.train.label_rule = LabelRule::endpoint_max;
      } else if (name == "squared_sum") {
        c.train.label_rule = LabelRule::squared_sum;
      } else {
        throw ConfigError("train.label_rule must be endpoint_max or squared_sum");
      }
    }
  }
  if (const json* e = top.find("eval")) {
    Section s(*e, "eval");
    s.read("junction_thresholds", c.junction_thresholds);
    s.read("line_thresholds", c.line_thresholds);
  }
  c.train.seed = c.seed;
  return c;
}

}  // namespace

RunConfig run_config_from_json(std::string_view text, const RunConfig& defaults) {
  try {
    return parse_document(json::parse(text), defaults);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
}

std::string run_config_to_json(const RunConfig& c) {
  const GeneratorConfig& g = c.dataset.generator;
  json doc;
  doc["seed"] = c.seed;
  doc["count"] = c.count;
  doc["dataset"] = {
      {"canvas", json::array({g.canvas.width, g.canvas.height})},
      {"margin", g.margin},
      {"min_rooms", g.min_rooms},
      {"max_rooms", g.max_rooms},
      {"min_room_size", g.min_room_size},
      {"min_junction_gap", g.min_junction_gap},
      {"door_width", range_json(g.door_width)},
      {"window_width", range_json(g.window_width)},
      {"extra_door_probability", g.extra_door_probability},
      {"window_probability", g.window_probability},
      {"entrance_door", g.entrance_door},
      {"inclined_wall_probability", g.inclined_wall_probability},
      {"chamfer_size", range_json(g.chamfer_size)},
      {"exterior_wall_thickness", range_json(g.exterior_wall_thickness)},
      {"interior_wall_thickness", range_json(g.interior_wall_thickness)},
      {"door_thickness", range_json(g.door_thickness)},
      {"window_thickness", range_json(g.window_thickness)},
      {"scale", range_json(g.scale)},
      {"color_jitter", c.dataset.style.color_jitter},
      {"hollow_probability", c.dataset.style.hollow_probability},
      {"raster_noise", range_json(c.dataset.style.noise)},
      {"heatmap_sigma", c.dataset.heatmap_sigma},
      {"heatmap_noise", c.dataset.heatmap_noise},
  };
  doc["pipeline"] = {
      {"suppression", std::string(to_string(c.pipeline.suppression))},
      {"junctions", std::string(to_string(c.pipeline.junctions))},
      {"pooling", c.pipeline.pooling == Pooling::rroi ? "rroi" : "loi"},
      {"nms_kernel", c.pipeline.nms_kernel},
      {"junction_threshold", c.pipeline.junction_threshold},
      {"max_junctions", c.pipeline.max_junctions},
  };
  doc["model"] = {
      {"hidden", c.model.hidden}, {"heads", c.model.heads}, {"edge_dim", c.model.edge_dim}, {"depth", c.model.depth}};
  json schedule = json::array();
  for (const auto& [step, lr] : c.train.lr_schedule) schedule.push_back(json::array({step, lr}));
  doc["train"] = {
      {"lr_schedule", schedule},
      {"batch_size", c.train.batch_size},
      {"steps", c.train.total_steps},
      {"warmup_steps", c.train.warmup_steps},
      {"pk_step", c.train.pk_step},
      {"pk", c.train.pk_enabled},
      {"weight_decay", c.train.weight_decay},
      {"d_max", c.train.d_max},
      {"label_rule", c.train.label_rule == LabelRule::endpoint_max ? "endpoint_max" : "squared_sum"},
  };
  doc["eval"] = {{"junction_thresholds", c.junction_thresholds}, {"line_thresholds", c.line_thresholds}};
  return doc.dump(2) + "\n";
}

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& defaults) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return run_config_from_json(buf.str(), defaults);
}

}  // namespace glsp
