// Command line front end: gen, train, eval, parse.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "glsp/config.hpp"
#include "glsp/eval.hpp"
#include "glsp/nn/checkpoint.hpp"
#include "glsp/parallel.hpp"
#include "glsp/pipeline.hpp"
#include "glsp/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace glsp;

namespace {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by several commands; empty means "keep the config value".
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string suppression;
  std::string junctions;
  std::string pk;
  std::optional<int> nms_kernel;
  std::string thresholds;

  void add_to(CLI::App* app, bool training_flags) {
    app->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Seed for generation, initialization and batching");
    app->add_option("--suppression", suppression, "Candidate suppression")->check(CLI::IsMember({"nss", "nds"}));
    app->add_option("--junctions", junctions, "Junction source")->check(CLI::IsMember({"oracle", "detected"}));
    app->add_option("--nms-kernel", nms_kernel, "NMS window size")->check(CLI::IsMember({3, 5, 7}));
    if (training_flags) {
      app->add_option("--pk", pk, "Prior-knowledge loss weighting")->check(CLI::IsMember({"on", "off"}));
    }
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) c.seed = *seed;
    c.train.seed = c.seed;
    if (!suppression.empty()) c.pipeline.suppression = parse_suppression(suppression);
    if (!junctions.empty()) c.pipeline.junctions = parse_junction_source(junctions);
    if (!pk.empty()) c.train.pk_enabled = pk == "on";
    if (nms_kernel) c.pipeline.nms_kernel = *nms_kernel;
    if (!thresholds.empty()) {
      c.line_thresholds.clear();
      std::stringstream in(thresholds);
      std::string item;
      while (std::getline(in, item, ',')) {
        try {
          c.line_thresholds.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw ConfigError("bad threshold '" + item + "'");
        }
      }
    }
    c.validate();
    return c;
  }
};

void echo_config(const RunConfig& c, const fs::path& copy) {
  const std::string text = run_config_to_json(c);
  std::cout << text;
  if (!copy.empty()) {
    std::ofstream out(copy);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + copy.string());
  }
}

// Writes to `path.partial` and renames on success, so a failed command
// never leaves a file that looks complete.
template <typename Fn>
void write_atomically(const fs::path& path, Fn&& write) {
  fs::path tmp = path;
  tmp += ".partial";
  try {
    write(tmp);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

std::string sample_stem(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "plan_%05zu", k);
  return buf;
}

json class_counts(const FloorPlanAnnotation& plan) {
  json out;
  for (SegmentClass c : kMeaningfulClasses) out[std::string(to_string(c))] = plan.count(c);
  return out;
}

int cmd_gen(std::size_t count, const fs::path& out_dir, const Overrides& flags) {
  RunConfig c = flags.resolve();
  c.count = count;
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  try {
    std::vector<Sample> samples(count);
    parallel_for(count, [&](std::size_t k) { samples[k] = make_sample(derive_seed(c.seed, k), c.dataset); });

    json index;
    index["count"] = count;
    index["seed"] = c.seed;
    index["samples"] = json::array();
    json totals = class_counts(FloorPlanAnnotation{});
    for (std::size_t k = 0; k < count; ++k) {
      const std::string stem = sample_stem(k);
      const fs::path annotation = out_dir / (stem + ".json");
      const fs::path raster = out_dir / (stem + ".rast");
      const fs::path heatmap = out_dir / (stem + ".heat");
      written.insert(written.end(), {annotation, raster, heatmap});
      save_annotation(annotation, samples[k].plan);
      save_feature_map(raster, samples[k].raster);
      save_heatmap(heatmap, samples[k].heatmap);
      const json counts = class_counts(samples[k].plan);
      for (auto& [name, v] : totals.items()) v = v.get<std::size_t>() + counts[name].get<std::size_t>();
      index["samples"].push_back({{"annotation", annotation.filename().string()},
                                  {"raster", raster.filename().string()},
                                  {"heatmap", heatmap.filename().string()},
                                  {"lines", counts}});
    }
    index["totals"] = totals;
    written.push_back(out_dir / "config.json");
    echo_config(c, out_dir / "config.json");
    written.push_back(out_dir / "index.json");
    std::ofstream idx(out_dir / "index.json");
    idx << index.dump(1) << "\n";
    if (!idx) throw std::runtime_error("cannot write " + (out_dir / "index.json").string());
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
  std::cerr << "wrote " << count << " samples to " << out_dir.string() << "\n";
  return 0;
}

std::vector<Sample> load_dataset(const fs::path& dir) {
  const fs::path index_path = dir / "index.json";
  std::ifstream in(index_path);
  if (!in) throw DatasetError("no index.json in " + dir.string());
  json index;
  try {
    index = json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetError("malformed " + index_path.string() + ": " + e.what());
  }
  if (!index.contains("samples") || !index["samples"].is_array() || !index.contains("count")) {
    throw DatasetError(index_path.string() + " lacks count/samples");
  }
  const auto& entries = index["samples"];
  if (index["count"].get<std::size_t>() != entries.size()) {
    throw DatasetError("index count " + index["count"].dump() + " does not match " + std::to_string(entries.size()) +
                       " listed samples");
  }
  std::vector<Sample> out(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    for (const char* key : {"annotation", "raster", "heatmap"}) {
      if (!e.contains(key)) throw DatasetError("index entry " + std::to_string(k) + " lacks '" + key + "'");
      if (!fs::exists(dir / e[key].get<std::string>())) {
        throw DatasetError("missing dataset file " + (dir / e[key].get<std::string>()).string());
      }
    }
    Sample& s = out[k];
    s.plan = load_annotation(dir / e["annotation"].get<std::string>());
    s.raster = load_feature_map(dir / e["raster"].get<std::string>());
    s.heatmap = load_heatmap(dir / e["heatmap"].get<std::string>());
    if (s.raster.width() != s.plan.canvas.width || s.raster.height() != s.plan.canvas.height ||
        s.heatmap.width != s.raster.width() || s.heatmap.height != s.raster.height()) {
      throw DatasetError("sample " + std::to_string(k) + ": raster, heatmap and canvas sizes disagree");
    }
  }
  return out;
}

int cmd_train(const fs::path& data, const fs::path& out, std::optional<std::size_t> steps, const fs::path& resume,
              const Overrides& flags) {
  RunConfig c = flags.resolve();
  std::optional<nn::Checkpoint> start;
  if (!resume.empty()) {
    start = nn::load_checkpoint(resume);
    c.model = start->model.config();
    const std::size_t done = start->adam ? completed_steps(*start->adam, c.train) : 0;
    c.train.total_steps = done + steps.value_or(0);
  } else if (steps) {
    c.train.total_steps = *steps;
  }
  c.validate();
  fs::path config_copy = out;
  config_copy += ".config.json";
  echo_config(c, config_copy);

  const auto samples = load_dataset(data);
  const auto examples = prepare_examples(samples, c.pipeline, c.train.d_max, c.train.label_rule);
  TrainResult result = train(examples, c.train, c.model, std::move(start));

  write_atomically(out, [&](const fs::path& p) { nn::save_checkpoint(p, result.model, &result.adam); });
  fs::path log_path = out;
  log_path += ".log";
  write_atomically(log_path, [&](const fs::path& p) {
    std::ofstream log(p);
    write_loss_log(log, result.log);
    if (!log) throw std::runtime_error("cannot write " + p.string());
  });
  std::cerr << "trained " << result.log.size() << " steps (" << result.skipped << " samples skipped), checkpoint "
            << out.string() << "\n";
  return 0;
}

PredictionSet ground_truth_predictions(const FloorPlanAnnotation& plan) {
  PredictionSet p;
  for (const auto& l : plan.lines) p.segments.push_back({l.segment, l.cls, 1.0});
  for (const Point& j : ground_truth_junctions(plan)) p.junctions.push_back({j, 1.0});
  return p;
}

int cmd_eval(const fs::path& data, const fs::path& checkpoint, bool gt_as_pred, const fs::path& out,
             const Overrides& flags) {
  RunConfig c = flags.resolve();
  std::optional<nn::Checkpoint> ck;
  if (!gt_as_pred) {
    if (checkpoint.empty()) throw ConfigError("eval needs --checkpoint (or --gt-as-pred)");
    ck = nn::load_checkpoint(checkpoint);
    c.model = ck->model.config();
    c.validate();
  }
  fs::path config_copy;
  if (!out.empty()) {
    config_copy = out;
    config_copy += ".config.json";
  }
  echo_config(c, config_copy);

  const auto samples = load_dataset(data);
  std::vector<PredictionSet> preds(samples.size());
  parallel_for(samples.size(), [&](std::size_t k) {
    if (gt_as_pred) {
      preds[k] = ground_truth_predictions(samples[k].plan);
    } else {
      PreparedGraph g = prepare_sample(samples[k], c.pipeline);
      preds[k] = predict(ck->model, g);
    }
  });
  Evaluator ev(c.junction_thresholds, c.line_thresholds);
  for (std::size_t k = 0; k < samples.size(); ++k) ev.add(preds[k], samples[k].plan);
  const std::string report = format_report(ev.report());
  std::cout << report;

  if (!out.empty()) {
    write_atomically(out, [&](const fs::path& p) {
      std::ofstream f(p);
      f << report;
      if (!f) throw std::runtime_error("cannot write " + p.string());
    });
    fs::path pr = out;
    pr += ".pr.tsv";
    write_atomically(pr, [&](const fs::path& p) {
      std::ofstream f(p);
      f << "# threshold\trecall\tprecision\n";
      for (double theta : c.line_thresholds) {
        std::vector<std::pair<std::string, std::optional<SegmentClass>>> groups = {{"all", std::nullopt}};
        for (SegmentClass cls : kMeaningfulClasses) groups.emplace_back(std::string(to_string(cls)), cls);
        for (const auto& [name, cls] : groups) {
          f << "# class " << name << " theta " << theta << "\n";
          for (const PrPoint& pt : ev.curve(theta, cls).points) {
            f << pt.threshold << '\t' << pt.recall << '\t' << pt.precision << '\n';
          }
        }
      }
      if (!f) throw std::runtime_error("cannot write " + p.string());
    });
  }
  return 0;
}

int cmd_parse(const fs::path& raster_path, const fs::path& heatmap_path, const fs::path& annotation_path,
              const fs::path& checkpoint, const fs::path& out, Overrides flags) {
  if (heatmap_path.empty() && annotation_path.empty()) {
    throw ConfigError("parse needs --heatmap, or --annotation for oracle junctions");
  }
  if (flags.junctions.empty()) flags.junctions = heatmap_path.empty() ? "oracle" : "detected";
  RunConfig c = flags.resolve();
  nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
  c.model = ck.model.config();
  c.validate();
  fs::path config_copy = out;
  config_copy += ".config.json";
  echo_config(c, config_copy);

  Sample s;
  s.raster = load_feature_map(raster_path);
  s.plan.canvas = {s.raster.width(), s.raster.height()};
  if (!annotation_path.empty()) {
    s.plan = load_annotation(annotation_path);
    if (s.plan.canvas.width != s.raster.width() || s.plan.canvas.height != s.raster.height()) {
      throw ConfigError("annotation canvas does not match the raster");
    }
  }
  s.heatmap = heatmap_path.empty() ? render_oracle_heatmap(s.plan, c.dataset.heatmap_sigma, 0.0, c.seed)
                                   : load_heatmap(heatmap_path);
  if (s.heatmap.width != s.raster.width() || s.heatmap.height != s.raster.height()) {
    throw ConfigError("heatmap size does not match the raster");
  }
  if (c.pipeline.junctions == JunctionSource::oracle && annotation_path.empty()) {
    throw ConfigError("oracle junctions need --annotation");
  }

  PreparedGraph g = prepare_sample(s, c.pipeline);
  const PredictionSet pred = predict(ck.model, g);

  FloorPlanAnnotation result;
  result.scale = s.plan.scale;
  result.canvas = s.plan.canvas;
  for (const auto& seg : pred.segments) result.lines.push_back({seg.segment, 1.0, seg.cls});
  json doc = json::parse(annotation_to_string(result));
  for (std::size_t k = 0; k < pred.segments.size(); ++k) doc["lines"][k]["score"] = pred.segments[k].score;
  write_atomically(out, [&](const fs::path& p) {
    std::ofstream f(p);
    f << doc.dump(1) << "\n";
    if (!f) throw std::runtime_error("cannot write " + p.string());
  });
  std::cerr << "parsed " << pred.segments.size() << " segments from " << pred.junctions.size() << " junctions\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floor plan line-segment parser"};
  app.require_subcommand(1);

  std::size_t count = 0;
  fs::path out;
  fs::path data;
  fs::path checkpoint;
  fs::path resume;
  fs::path raster;
  fs::path heatmap;
  fs::path annotation;
  std::optional<std::size_t> steps;
  bool gt_as_pred = false;

  Overrides gen_flags;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--count", count, "Number of plans")->required();
  gen->add_option("--out", out, "Output directory")->required();
  gen_flags.add_to(gen, false);

  Overrides train_flags;
  auto* tr = app.add_subcommand("train", "Train a model on a dataset");
  tr->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", out, "Checkpoint path")->required();
  tr->add_option("--steps", steps, "Total steps, or further steps with --resume");
  tr->add_option("--resume", resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  train_flags.add_to(tr, true);

  Overrides eval_flags;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  ev->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--checkpoint", checkpoint, "Model checkpoint")->check(CLI::ExistingFile);
  ev->add_option("--thresholds", eval_flags.thresholds, "Comma-separated line thresholds");
  ev->add_option("--out", out, "Report path; PR data goes to <out>.pr.tsv");
  ev->add_flag("--gt-as-pred", gt_as_pred, "Score the ground truth itself");
  eval_flags.add_to(ev, false);

  Overrides parse_flags;
  auto* pa = app.add_subcommand("parse", "Vectorize one raster");
  pa->add_option("--raster", raster, "Raster file")->required()->check(CLI::ExistingFile);
  pa->add_option("--heatmap", heatmap, "Junction heatmap file")->check(CLI::ExistingFile);
  pa->add_option("--annotation", annotation, "Annotation for oracle junctions")->check(CLI::ExistingFile);
  pa->add_option("--checkpoint", checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  pa->add_option("--out", out, "Output annotation path")->required();
  parse_flags.add_to(pa, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(count, out, gen_flags);
    if (tr->parsed()) return cmd_train(data, out, steps, resume, train_flags);
    if (ev->parsed()) return cmd_eval(data, checkpoint, gt_as_pred, out, eval_flags);
    if (pa->parsed()) return cmd_parse(raster, heatmap, annotation, checkpoint, out, parse_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
