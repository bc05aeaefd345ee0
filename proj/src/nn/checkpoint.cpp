#include "glsp/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace glsp::nn {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr std::size_t kConfigFields = 7;

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_record(std::string& out, const std::string& name, std::size_t rows, std::size_t cols,
                std::span<const double> values) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put_u32(out, static_cast<std::uint32_t>(rows));
  put_u32(out, static_cast<std::uint32_t>(cols));
  for (double v : values) {
    const float f = static_cast<float>(v);
    char buf[4];
    std::memcpy(buf, &f, 4);
    out.append(buf, 4);
  }
}

struct Record {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint truncated");
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(4).data(), 4);
    return v;
  }
  Record record() {
    Record r;
    r.name = std::string(take(u32()));
    r.rows = u32();
    r.cols = u32();
    const auto raw = take(r.rows * r.cols * 4);
    r.values.resize(r.rows * r.cols);
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      float f;
      std::memcpy(&f, raw.data() + 4 * k, 4);
      r.values[k] = f;
    }
    return r;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void expect_record(const Record& r, const std::string& name, std::size_t rows, std::size_t cols) {
  if (r.name != name) throw CheckpointError("checkpoint record '" + r.name + "' where '" + name + "' was expected");
  if (r.rows != rows || r.cols != cols) {
    throw CheckpointError("checkpoint record '" + name + "' has shape " + to_string({r.rows, r.cols}) +
                          ", model expects " + to_string({rows, cols}));
  }
}

}  // namespace

std::string checkpoint_to_bytes(const GaanModel& model, const AdamState* adam) {
  const auto params = model.named_parameters();
  const ModelConfig& c = model.config();
  std::string out(kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  const std::size_t count = 1 + params.size() + (adam != nullptr ? 1 + 2 * params.size() : 0);
  put_u32(out, static_cast<std::uint32_t>(count));

  const std::vector<double> dims = {double(c.input_dim), double(c.edge_input_dim), double(c.hidden),
                                    double(c.heads),     double(c.edge_dim),       double(c.depth),
                                    double(c.outputs)};
  put_record(out, "config", 1, kConfigFields, dims);
  for (const auto& [name, t] : params) put_record(out, name, t.rows(), t.cols(), t.values());
  if (adam != nullptr) {
    if (adam->m.size() != params.size()) throw CheckpointError("optimizer state does not match the model");
    const double step = static_cast<double>(adam->step);
    put_record(out, "adam.step", 1, 1, std::span<const double>(&step, 1));
    for (std::size_t p = 0; p < params.size(); ++p) {
      const Tensor& t = params[p].second;
      put_record(out, "adam.m." + params[p].first, t.rows(), t.cols(), adam->m[p]);
      put_record(out, "adam.v." + params[p].first, t.rows(), t.cols(), adam->v[p]);
    }
  }
  return out;
}

Checkpoint checkpoint_from_bytes(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kCheckpointMagic.size()) != kCheckpointMagic) throw CheckpointError("not a model checkpoint (bad magic)");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();

  const Record cfg = in.record();
  expect_record(cfg, "config", 1, kConfigFields);
  const auto dim = [&](std::size_t k) { return static_cast<std::size_t>(cfg.values[k]); };
  const ModelConfig config{dim(0), dim(1), dim(2), dim(3), dim(4), dim(5), dim(6)};
  Checkpoint ck{GaanModel(config, 0), std::nullopt};

  const auto params = ck.model.named_parameters();
  if (count != 1 + params.size() && count != 2 + 3 * params.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(count) + " records, model needs " +
                          std::to_string(1 + params.size()));
  }
  for (const auto& [name, t] : params) {
    Record r = in.record();
    expect_record(r, name, t.rows(), t.cols());
    Tensor handle = t;
    std::copy(r.values.begin(), r.values.end(), handle.mutable_values().begin());
  }
  if (count > 1 + params.size()) {
    AdamState adam = AdamState::for_parameters(params);
    const Record step = in.record();
    expect_record(step, "adam.step", 1, 1);
    adam.step = static_cast<std::uint64_t>(step.values[0]);
    for (std::size_t p = 0; p < params.size(); ++p) {
      const Tensor& t = params[p].second;
      Record m = in.record();
      expect_record(m, "adam.m." + params[p].first, t.rows(), t.cols());
      Record v = in.record();
      expect_record(v, "adam.v." + params[p].first, t.rows(), t.cols());
      adam.m[p] = std::move(m.values);
      adam.v[p] = std::move(v.values);
    }
    ck.adam = std::move(adam);
  }
  if (!in.done()) throw CheckpointError("trailing bytes after checkpoint records");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const GaanModel& model, const AdamState* adam) {
  const std::string bytes = checkpoint_to_bytes(model, adam);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_bytes(buf.str());
}

}  // namespace glsp::nn
