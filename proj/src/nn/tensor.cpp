#include "glsp/nn/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace glsp::nn {

struct Tensor::Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

namespace {

using Node = Tensor::Node;
using NodePtr = std::shared_ptr<Node>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

MatMap as_mat(std::vector<double>& v, std::size_t r, std::size_t c) {
  return MatMap(v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
ConstMatMap as_mat(const std::vector<double>& v, std::size_t r, std::size_t c) {
  return ConstMatMap(v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

NodePtr new_node(std::size_t rows, std::size_t cols, std::vector<NodePtr> parents) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(rows * cols, 0.0);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  n->parents = std::move(parents);
  return n;
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " +
                   to_string(b.shape()));
}

void require(const Tensor& t, const char* op) {
  if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor");
}

// Accumulates into a parent's gradient if it wants one.
template <typename Fn>
void into(Node& parent, Fn&& fn) {
  if (parent.requires_grad) fn(parent.grad_buffer());
}

template <typename Fn>
Tensor unary(const Tensor& a, const char* op, Fn&& forward) {
  require(a, op);
  auto n = new_node(a.rows(), a.cols(), {a.node_ptr()});
  const auto& in = a.node().value;
  for (std::size_t k = 0; k < in.size(); ++k) n->value[k] = forward(in[k]);
  return Tensor(n);
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << "[" << shape[0] << ", " << shape[1] << "]";
  return out.str();
}

Index make_index(std::vector<std::size_t> idx) {
  return std::make_shared<const std::vector<std::size_t>>(std::move(idx));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = new_node(shape[0], shape[1], {});
  n->requires_grad = requires_grad;
  return Tensor(n);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape[0] * shape[1]) {
    throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                     to_string(shape));
  }
  auto n = new_node(shape[0], shape[1], {});
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  return Tensor(n);
}

Shape Tensor::shape() const { return {node_->rows, node_->cols}; }
std::size_t Tensor::rows() const { return node_->rows; }
std::size_t Tensor::cols() const { return node_->cols; }
std::size_t Tensor::size() const { return node_->value.size(); }
bool Tensor::requires_grad() const { return node_->requires_grad; }
std::span<const double> Tensor::values() const { return node_->value; }
std::span<double> Tensor::mutable_values() { return node_->value; }
double Tensor::at(std::size_t r, std::size_t c) const { return node_->value[r * node_->cols + c]; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
  return node_->value[0];
}

std::span<const double> Tensor::grad() const { return node_->grad_buffer(); }
std::span<double> Tensor::mutable_grad() { return node_->grad_buffer(); }
void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

void Tensor::backward() const {
  if (size() != 1) throw ShapeError("backward() needs a scalar root, got " + to_string(shape()));
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack = {{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  // Interior nodes start from zero on every sweep; leaves keep accumulating.
  for (Node* n : order) {
    if (n->backward) n->grad.assign(n->value.size(), 0.0);
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a, "matmul");
  require(b, "matmul");
  if (a.cols() != b.rows()) mismatch("matmul", a, b);
  auto n = new_node(a.rows(), b.cols(), {a.node_ptr(), b.node_ptr()});
  as_mat(n->value, a.rows(), b.cols()).noalias() =
      as_mat(a.node().value, a.rows(), a.cols()) * as_mat(b.node().value, b.rows(), b.cols());
  n->backward = [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const auto g = as_mat(static_cast<const std::vector<double>&>(self.grad), self.rows, self.cols);
    into(pa, [&](std::vector<double>& ga) {
      as_mat(ga, pa.rows, pa.cols).noalias() +=
          g * as_mat(static_cast<const std::vector<double>&>(pb.value), pb.rows, pb.cols).transpose();
    });
    into(pb, [&](std::vector<double>& gb) {
      as_mat(gb, pb.rows, pb.cols).noalias() +=
          as_mat(static_cast<const std::vector<double>&>(pa.value), pa.rows, pa.cols).transpose() * g;
    });
  };
  return Tensor(n);
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a, "add");
  require(b, "add");
  const bool broadcast = b.rows() == 1 && a.rows() != 1 && b.cols() == a.cols();
  if (!broadcast && a.shape() != b.shape()) mismatch("add", a, b);
  auto n = new_node(a.rows(), a.cols(), {a.node_ptr(), b.node_ptr()});
  const auto& av = a.node().value;
  const auto& bv = b.node().value;
  const std::size_t cols = a.cols();
  for (std::size_t k = 0; k < av.size(); ++k) n->value[k] = av[k] + bv[broadcast ? k % cols : k];
  n->backward = [broadcast, cols](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& ga) {
      for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += self.grad[k];
    });
    into(*self.parents[1], [&](std::vector<double>& gb) {
      for (std::size_t k = 0; k < self.grad.size(); ++k) gb[broadcast ? k % cols : k] += self.grad[k];
    });
  };
  return Tensor(n);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a, "mul");
  require(b, "mul");
  if (a.shape() != b.shape()) mismatch("mul", a, b);
  auto n = new_node(a.rows(), a.cols(), {a.node_ptr(), b.node_ptr()});
  const auto& av = a.node().value;
  const auto& bv = b.node().value;
  for (std::size_t k = 0; k < av.size(); ++k) n->value[k] = av[k] * bv[k];
  n->backward = [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    into(pa, [&](std::vector<double>& ga) {
      for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += self.grad[k] * pb.value[k];
    });
    into(pb, [&](std::vector<double>& gb) {
      for (std::size_t k = 0; k < gb.size(); ++k) gb[k] += self.grad[k] * pa.value[k];
    });
  };
  return Tensor(n);
}

Tensor scale(const Tensor& a, double s) {
  Tensor t = unary(a, "scale", [s](double v) { return s * v; });
  t.node().backward = [s](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += s * self.grad[k];
    });
  };
  return t;
}

Tensor sigmoid(const Tensor& a) {
  Tensor t = unary(a, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  t.node().backward = [](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double y = self.value[k];
        g[k] += self.grad[k] * y * (1.0 - y);
      }
    });
  };
  return t;
}

Tensor exp(const Tensor& a) {
  Tensor t = unary(a, "exp", [](double v) { return std::exp(v); });
  t.node().backward = [](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += self.grad[k] * self.value[k];
    });
  };
  return t;
}

Tensor silu(const Tensor& a) {
  Tensor t = unary(a, "silu", [](double v) { return v / (1.0 + std::exp(-v)); });
  t.node().backward = [](Node& self) {
    const Node& in = *self.parents[0];
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = in.value[k];
        const double s = 1.0 / (1.0 + std::exp(-x));
        g[k] += self.grad[k] * s * (1.0 + x * (1.0 - s));
      }
    });
  };
  return t;
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  std::vector<NodePtr> parents;
  std::size_t cols = 0;
  for (const Tensor& p : parts) {
    require(p, "concat");
    if (p.rows() != parts[0].rows()) mismatch("concat", parts[0], p);
    parents.push_back(p.node_ptr());
    cols += p.cols();
  }
  const std::size_t rows = parts[0].rows();
  auto n = new_node(rows, cols, std::move(parents));
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const auto& v = p.node().value;
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r * p.cols()), p.cols(),
                  n->value.begin() + static_cast<std::ptrdiff_t>(r * cols + offset));
    }
    offset += p.cols();
  }
  n->backward = [](Node& self) {
    std::size_t off = 0;
    for (const NodePtr& p : self.parents) {
      into(*p, [&](std::vector<double>& g) {
        for (std::size_t r = 0; r < self.rows; ++r) {
          for (std::size_t c = 0; c < p->cols; ++c) g[r * p->cols + c] += self.grad[r * self.cols + off + c];
        }
      });
      off += p->cols;
    }
  };
  return Tensor(n);
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require(a, "slice_rows");
  if (begin > end || end > a.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + to_string(a.shape()));
  }
  const std::size_t cols = a.cols();
  auto n = new_node(end - begin, cols, {a.node_ptr()});
  std::copy_n(a.node().value.begin() + static_cast<std::ptrdiff_t>(begin * cols), n->value.size(),
              n->value.begin());
  n->backward = [begin, cols](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t k = 0; k < self.grad.size(); ++k) g[begin * cols + k] += self.grad[k];
    });
  };
  return Tensor(n);
}

Tensor gather_rows(const Tensor& a, const Index& rows) {
  require(a, "gather_rows");
  const std::size_t cols = a.cols();
  for (std::size_t r : *rows) {
    if (r >= a.rows()) throw ShapeError("gather_rows: row " + std::to_string(r) + " outside " + to_string(a.shape()));
  }
  auto n = new_node(rows->size(), cols, {a.node_ptr()});
  const auto& v = a.node().value;
  for (std::size_t k = 0; k < rows->size(); ++k) {
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>((*rows)[k] * cols), cols,
                n->value.begin() + static_cast<std::ptrdiff_t>(k * cols));
  }
  n->backward = [rows, cols](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t k = 0; k < rows->size(); ++k) {
        const std::size_t dst = (*rows)[k] * cols;
        for (std::size_t c = 0; c < cols; ++c) g[dst + c] += self.grad[k * cols + c];
      }
    });
  };
  return Tensor(n);
}

Tensor segment_sum(const Tensor& a, const Index& segment, std::size_t num_segments) {
  require(a, "segment_sum");
  if (segment->size() != a.rows()) {
    throw ShapeError("segment_sum: " + std::to_string(segment->size()) + " segment ids for " + to_string(a.shape()));
  }
  const std::size_t cols = a.cols();
  auto n = new_node(num_segments, cols, {a.node_ptr()});
  const auto& v = a.node().value;
  for (std::size_t r = 0; r < segment->size(); ++r) {
    const std::size_t s = (*segment)[r];
    if (s >= num_segments) throw ShapeError("segment_sum: segment id out of range");
    for (std::size_t c = 0; c < cols; ++c) n->value[s * cols + c] += v[r * cols + c];
  }
  n->backward = [segment, cols](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t r = 0; r < segment->size(); ++r) {
        const std::size_t s = (*segment)[r];
        for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += self.grad[s * cols + c];
      }
    });
  };
  return Tensor(n);
}

Tensor neighbor_softmax(const Tensor& logits, const Index& segment, std::size_t num_segments) {
  require(logits, "neighbor_softmax");
  if (segment->size() != logits.rows()) {
    throw ShapeError("neighbor_softmax: " + std::to_string(segment->size()) + " segment ids for " +
                     to_string(logits.shape()));
  }
  const std::size_t cols = logits.cols();
  const auto& x = logits.node().value;
  auto n = new_node(logits.rows(), cols, {logits.node_ptr()});

  std::vector<double> peak(num_segments * cols, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < segment->size(); ++r) {
    const std::size_t s = (*segment)[r];
    if (s >= num_segments) throw ShapeError("neighbor_softmax: segment id out of range");
    for (std::size_t c = 0; c < cols; ++c) peak[s * cols + c] = std::max(peak[s * cols + c], x[r * cols + c]);
  }
  std::vector<double> total(num_segments * cols, 0.0);
  for (std::size_t r = 0; r < segment->size(); ++r) {
    const std::size_t s = (*segment)[r];
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = std::exp(x[r * cols + c] - peak[s * cols + c]);
      n->value[r * cols + c] = e;
      total[s * cols + c] += e;
    }
  }
  for (std::size_t r = 0; r < segment->size(); ++r) {
    const std::size_t s = (*segment)[r];
    for (std::size_t c = 0; c < cols; ++c) n->value[r * cols + c] /= total[s * cols + c];
  }

  n->backward = [segment, cols, num_segments](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& g) {
      std::vector<double> dot(num_segments * cols, 0.0);
      for (std::size_t r = 0; r < segment->size(); ++r) {
        const std::size_t s = (*segment)[r];
        for (std::size_t c = 0; c < cols; ++c) dot[s * cols + c] += self.grad[r * cols + c] * self.value[r * cols + c];
      }
      for (std::size_t r = 0; r < segment->size(); ++r) {
        const std::size_t s = (*segment)[r];
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t k = r * cols + c;
          g[k] += self.value[k] * (self.grad[k] - dot[s * cols + c]);
        }
      }
    });
  };
  return Tensor(n);
}

Tensor reduce_sum(const Tensor& a) {
  require(a, "reduce_sum");
  auto n = new_node(1, 1, {a.node_ptr()});
  for (double v : a.node().value) n->value[0] += v;
  n->backward = [](Node& self) {
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (double& v : g) v += self.grad[0];
    });
  };
  return Tensor(n);
}

Tensor bce_loss(const Tensor& probs, std::span<const double> targets, std::span<const double> row_weights) {
  require(probs, "bce_loss");
  if (targets.size() != probs.size()) {
    throw ShapeError("bce_loss: " + std::to_string(targets.size()) + " targets for " + to_string(probs.shape()));
  }
  if (!row_weights.empty() && row_weights.size() != probs.rows()) {
    throw ShapeError("bce_loss: " + std::to_string(row_weights.size()) + " row weights for " +
                     to_string(probs.shape()));
  }
  const std::size_t cols = probs.cols();
  const double count = static_cast<double>(probs.size());
  std::vector<double> t(targets.begin(), targets.end());
  std::vector<double> w(probs.rows(), 1.0);
  if (!row_weights.empty()) w.assign(row_weights.begin(), row_weights.end());

  auto n = new_node(1, 1, {probs.node_ptr()});
  const auto& p = probs.node().value;
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double q = std::clamp(p[k], kBceEpsilon, 1.0 - kBceEpsilon);
    sum -= w[k / cols] * (t[k] * std::log(q) + (1.0 - t[k]) * std::log(1.0 - q));
  }
  n->value[0] = sum / count;
  n->backward = [t = std::move(t), w = std::move(w), cols, count](Node& self) {
    const Node& in = *self.parents[0];
    into(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double raw = in.value[k];
        if (raw < kBceEpsilon || raw > 1.0 - kBceEpsilon) continue;
        g[k] += self.grad[0] * w[k / cols] * (-(t[k] / raw) + (1.0 - t[k]) / (1.0 - raw)) / count;
      }
    });
  };
  return Tensor(n);
}

}  // namespace glsp::nn
