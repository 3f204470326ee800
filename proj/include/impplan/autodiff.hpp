#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace impplan {

// Dense row-major f64 tensor.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
  static Tensor row(std::vector<double> values);  // shape [1, n]
  static Tensor vec(std::vector<double> values);  // shape [n]

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  std::string shape_str() const;
};

using NodeId = int;

// Reverse-mode tape. One graph per training sample; parameters enter as
// leaves and collect gradients after backward(). Accumulation order is
// fixed, so repeated runs are bit-reproducible.
class Graph {
 public:
  NodeId leaf(Tensor value, bool requires_grad = true);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);  // same shape, or bias: [m,n] + [n]
  NodeId concat(NodeId a, NodeId b, int axis);
  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId reshape(NodeId a, std::vector<std::size_t> shape);
  NodeId slice(NodeId a, std::size_t begin, std::size_t end);  // rows of a 2D / range of a 1D
  NodeId scale(NodeId a, double c);

  const Tensor& value(NodeId n) const;

  // Adds an upstream gradient at any recorded node (used to bridge the
  // analytic task-loss gradients into network backprop).
  void inject_gradient(NodeId n, const Tensor& grad);
  // Seeds `output` with `seed` and propagates every injected gradient back
  // to the leaves. Throws if nothing was recorded.
  void backward(NodeId output, const Tensor& seed);
  // Propagates already-injected gradients only.
  void run_backward();

  Tensor gradient(NodeId n) const;  // zeros when untouched
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct NodeRec;
  NodeId push(NodeRec rec);
  void check(NodeId n) const;

  std::vector<NodeRec> nodes_;
};

}  // namespace impplan
