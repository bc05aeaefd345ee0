#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace glsp::nn {

/// Row-major matrix shape. Vectors are 1 x n or n x 1, scalars 1 x 1.
using Shape = std::array<std::size_t, 2>;

std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Index = std::shared_ptr<const std::vector<std::size_t>>;
Index make_index(std::vector<std::size_t> idx);

/// Handle to a node of the reverse-mode tape. Copies share the node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v) { return from({1, 1}, {v}); }

  bool defined() const { return node_ != nullptr; }
  Shape shape() const;
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const;
  bool requires_grad() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  /// Zero-filled until a backward pass reaches this tensor.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Reverse-mode sweep from a 1 x 1 result. Gradients accumulate into every
  /// reachable tensor that requires them.
  void backward() const;

  struct Node;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

Tensor matmul(const Tensor& a, const Tensor& b);
/// Elementwise sum; `b` may also be a 1 x cols row broadcast over rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
/// x * sigmoid(x).
Tensor silu(const Tensor& a);
Tensor concat(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor gather_rows(const Tensor& a, const Index& rows);
/// out[segment[r]] += a[r]; rows whose segment receives nothing stay zero.
Tensor segment_sum(const Tensor& a, const Index& segment, std::size_t num_segments);
/// Column-wise softmax over the rows that share a segment id.
Tensor neighbor_softmax(const Tensor& logits, const Index& segment, std::size_t num_segments);
Tensor reduce_sum(const Tensor& a);

inline constexpr double kBceEpsilon = 1e-7;

/// Mean over all entries of row_weight * BCE(p, target), with p clamped to
/// [eps, 1 - eps]. Targets and weights are constants.
Tensor bce_loss(const Tensor& probs, std::span<const double> targets,
                std::span<const double> row_weights = {});

}  // namespace glsp::nn
