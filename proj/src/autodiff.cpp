#include "impplan/autodiff.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "impplan/kernels.hpp"

namespace impplan {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(op + ": incompatible shapes " + a.shape_str() + " and " +
                              b.shape_str());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)), data(shape_size(shape), 0.0) {}

Tensor Tensor::row(std::vector<double> values) {
  Tensor t;
  t.shape = {1, values.size()};
  t.data = std::move(values);
  return t;
}

Tensor Tensor::vec(std::vector<double> values) {
  Tensor t;
  t.shape = {values.size()};
  t.data = std::move(values);
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ")";
  return out.str();
}

enum class Op { leaf, matmul, add, bias_add, concat0, concat1, relu, tanh_, sigmoid_, reshape, slice, scale };

struct Graph::NodeRec {
  Op op = Op::leaf;
  NodeId a = -1;
  NodeId b = -1;
  Tensor value;
  Tensor grad;
  bool has_grad = false;
  bool requires_grad = true;
  std::size_t begin = 0;  // slice
  std::size_t end = 0;
  double c = 0.0;  // scale
};

NodeId Graph::push(NodeRec rec) {
  nodes_.push_back(std::move(rec));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

void Graph::check(NodeId n) const {
  if (n < 0 || n >= static_cast<NodeId>(nodes_.size()))
    throw std::out_of_range("invalid node id " + std::to_string(n));
}

NodeId Graph::leaf(Tensor value, bool requires_grad) {
  NodeRec r;
  r.op = Op::leaf;
  r.value = std::move(value);
  r.requires_grad = requires_grad;
  return push(std::move(r));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  check(a);
  check(b);
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  if (A.shape.size() != 2 || B.shape.size() != 2 || A.shape[1] != B.shape[0])
    shape_error("matmul", A, B);
  const std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
  NodeRec r;
  r.op = Op::matmul;
  r.a = a;
  r.b = b;
  r.value = Tensor({m, n});
  const auto& ker = kernels::active();
  for (std::size_t i = 0; i < m; ++i)
    ker.matvec_tn_acc(r.value.data.data() + i * n, A.data.data() + i * k, B.data.data(), k, n);
  return push(std::move(r));
}

NodeId Graph::add(NodeId a, NodeId b) {
  check(a);
  check(b);
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  NodeRec r;
  r.a = a;
  r.b = b;
  if (A.shape == B.shape) {
    r.op = Op::add;
    r.value = A;
    kernels::active().add(r.value.data.data(), A.data.data(), B.data.data(), A.size());
  } else if (A.shape.size() == 2 && B.shape.size() == 1 && B.shape[0] == A.shape[1]) {
    // bias add, broadcast over rows
    r.op = Op::bias_add;
    r.value = A;
    for (std::size_t i = 0; i < A.shape[0]; ++i)
      kernels::active().add(r.value.data.data() + i * A.shape[1], A.data.data() + i * A.shape[1],
                            B.data.data(), A.shape[1]);
  } else {
    shape_error("add", A, B);
  }
  return push(std::move(r));
}

NodeId Graph::concat(NodeId a, NodeId b, int axis) {
  check(a);
  check(b);
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  NodeRec r;
  r.a = a;
  r.b = b;
  if (A.shape.size() == 1 && B.shape.size() == 1 && axis == 0) {
    r.op = Op::concat0;
    r.value = Tensor({A.size() + B.size()});
    std::copy(A.data.begin(), A.data.end(), r.value.data.begin());
    std::copy(B.data.begin(), B.data.end(), r.value.data.begin() + A.size());
  } else if (A.shape.size() == 2 && B.shape.size() == 2 && axis == 0 && A.shape[1] == B.shape[1]) {
    r.op = Op::concat0;
    r.value = Tensor({A.shape[0] + B.shape[0], A.shape[1]});
    std::copy(A.data.begin(), A.data.end(), r.value.data.begin());
    std::copy(B.data.begin(), B.data.end(), r.value.data.begin() + A.size());
  } else if (A.shape.size() == 2 && B.shape.size() == 2 && axis == 1 && A.shape[0] == B.shape[0]) {
    r.op = Op::concat1;
    r.value = Tensor({A.shape[0], A.shape[1] + B.shape[1]});
    for (std::size_t i = 0; i < A.shape[0]; ++i) {
      std::copy(A.data.begin() + i * A.shape[1], A.data.begin() + (i + 1) * A.shape[1],
                r.value.data.begin() + i * r.value.shape[1]);
      std::copy(B.data.begin() + i * B.shape[1], B.data.begin() + (i + 1) * B.shape[1],
                r.value.data.begin() + i * r.value.shape[1] + A.shape[1]);
    }
  } else {
    shape_error("concat(axis " + std::to_string(axis) + ")", A, B);
  }
  return push(std::move(r));
}

NodeId Graph::relu(NodeId a) {
  check(a);
  NodeRec r;
  r.op = Op::relu;
  r.a = a;
  r.value = nodes_[a].value;
  kernels::active().relu(r.value.data.data(), nodes_[a].value.data.data(), r.value.size());
  return push(std::move(r));
}

NodeId Graph::tanh(NodeId a) {
  check(a);
  NodeRec r;
  r.op = Op::tanh_;
  r.a = a;
  r.value = nodes_[a].value;
  for (double& x : r.value.data) x = std::tanh(x);
  return push(std::move(r));
}

NodeId Graph::sigmoid(NodeId a) {
  check(a);
  NodeRec r;
  r.op = Op::sigmoid_;
  r.a = a;
  r.value = nodes_[a].value;
  for (double& x : r.value.data) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(r));
}

NodeId Graph::reshape(NodeId a, std::vector<std::size_t> shape) {
  check(a);
  if (shape_size(shape) != nodes_[a].value.size())
    throw std::invalid_argument("reshape: size mismatch from " + nodes_[a].value.shape_str());
  NodeRec r;
  r.op = Op::reshape;
  r.a = a;
  r.value = nodes_[a].value;
  r.value.shape = std::move(shape);
  return push(std::move(r));
}

NodeId Graph::slice(NodeId a, std::size_t begin, std::size_t end) {
  check(a);
  const Tensor& A = nodes_[a].value;
  NodeRec r;
  r.op = Op::slice;
  r.a = a;
  r.begin = begin;
  r.end = end;
  if (A.shape.size() == 1) {
    if (begin >= end || end > A.shape[0])
      throw std::invalid_argument("slice: bad range on " + A.shape_str());
    r.value = Tensor({end - begin});
    std::copy(A.data.begin() + begin, A.data.begin() + end, r.value.data.begin());
  } else if (A.shape.size() == 2) {
    if (begin >= end || end > A.shape[0])
      throw std::invalid_argument("slice: bad row range on " + A.shape_str());
    r.value = Tensor({end - begin, A.shape[1]});
    std::copy(A.data.begin() + begin * A.shape[1], A.data.begin() + end * A.shape[1],
              r.value.data.begin());
  } else {
    throw std::invalid_argument("slice supports 1D and 2D tensors");
  }
  return push(std::move(r));
}

NodeId Graph::scale(NodeId a, double c) {
  check(a);
  NodeRec r;
  r.op = Op::scale;
  r.a = a;
  r.c = c;
  r.value = nodes_[a].value;
  kernels::active().scale(r.value.data.data(), c, nodes_[a].value.data.data(), r.value.size());
  return push(std::move(r));
}

const Tensor& Graph::value(NodeId n) const {
  check(n);
  return nodes_[n].value;
}

void Graph::inject_gradient(NodeId n, const Tensor& grad) {
  check(n);
  NodeRec& rec = nodes_[n];
  if (grad.shape != rec.value.shape)
    throw std::invalid_argument("inject_gradient: gradient shape " + grad.shape_str() +
                                " does not match node value " + rec.value.shape_str());
  if (!rec.has_grad) {
    rec.grad = grad;
    rec.has_grad = true;
  } else {
    kernels::active().add(rec.grad.data.data(), rec.grad.data.data(), grad.data.data(),
                          grad.size());
  }
}

void Graph::backward(NodeId output, const Tensor& seed) {
  inject_gradient(output, seed);
  run_backward();
}

void Graph::run_backward() {
  if (nodes_.empty()) throw std::logic_error("backward before any forward pass");
  bool any = false;
  for (const auto& n : nodes_) any = any || n.has_grad;
  if (!any) throw std::logic_error("backward without a seed or injected gradient");

  const auto& ker = kernels::active();
  auto grad_of = [&](NodeId id) -> Tensor& {
    NodeRec& rec = nodes_[id];
    if (!rec.has_grad) {
      rec.grad = Tensor(rec.value.shape);
      rec.has_grad = true;
    }
    return rec.grad;
  };

  for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) {
    NodeRec& rec = nodes_[id];
    if (!rec.has_grad) continue;
    const Tensor& g = rec.grad;
    switch (rec.op) {
      case Op::leaf:
        break;
      case Op::matmul: {
        const Tensor& A = nodes_[rec.a].value;
        const Tensor& B = nodes_[rec.b].value;
        const std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
        if (nodes_[rec.a].requires_grad) {
          Tensor& ga = grad_of(rec.a);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t kk = 0; kk < k; ++kk) {
              double s = 0.0;
              const double* grow = g.data.data() + i * n;
              const double* brow = B.data.data() + kk * n;
              for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
              ga.data[i * k + kk] += s;
            }
        }
        if (nodes_[rec.b].requires_grad) {
          Tensor& gb = grad_of(rec.b);
          for (std::size_t i = 0; i < m; ++i)
            ker.outer_acc(gb.data.data(), A.data.data() + i * k, g.data.data() + i * n, k, n);
        }
        break;
      }
      case Op::add: {
        ker.add(grad_of(rec.a).data.data(), grad_of(rec.a).data.data(), g.data.data(), g.size());
        ker.add(grad_of(rec.b).data.data(), grad_of(rec.b).data.data(), g.data.data(), g.size());
        break;
      }
      case Op::bias_add: {
        Tensor& ga = grad_of(rec.a);
        ker.add(ga.data.data(), ga.data.data(), g.data.data(), g.size());
        Tensor& gb = grad_of(rec.b);
        const std::size_t rows = rec.value.shape[0], cols = rec.value.shape[1];
        for (std::size_t i = 0; i < rows; ++i)
          ker.add(gb.data.data(), gb.data.data(), g.data.data() + i * cols, cols);
        break;
      }
      case Op::concat0: {
        Tensor& ga = grad_of(rec.a);
        Tensor& gb = grad_of(rec.b);
        const std::size_t na = ga.size();
        for (std::size_t i = 0; i < na; ++i) ga.data[i] += g.data[i];
        for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] += g.data[na + i];
        break;
      }
      case Op::concat1: {
        Tensor& ga = grad_of(rec.a);
        Tensor& gb = grad_of(rec.b);
        const std::size_t rows = rec.value.shape[0];
        const std::size_t ca = ga.shape[1], cb = gb.shape[1];
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < ca; ++j) ga.data[i * ca + j] += g.data[i * (ca + cb) + j];
          for (std::size_t j = 0; j < cb; ++j)
            gb.data[i * cb + j] += g.data[i * (ca + cb) + ca + j];
        }
        break;
      }
      case Op::relu: {
        Tensor& ga = grad_of(rec.a);
        ker.relu_mask_acc(ga.data.data(), g.data.data(), nodes_[rec.a].value.data.data(),
                          g.size());
        break;
      }
      case Op::tanh_: {
        Tensor& ga = grad_of(rec.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = rec.value.data[i];
          ga.data[i] += g.data[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::sigmoid_: {
        Tensor& ga = grad_of(rec.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = rec.value.data[i];
          ga.data[i] += g.data[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::reshape: {
        Tensor& ga = grad_of(rec.a);
        ker.add(ga.data.data(), ga.data.data(), g.data.data(), g.size());
        break;
      }
      case Op::slice: {
        Tensor& ga = grad_of(rec.a);
        const std::size_t cols = nodes_[rec.a].value.shape.size() == 2
                                     ? nodes_[rec.a].value.shape[1]
                                     : 1;
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[rec.begin * cols + i] += g.data[i];
        break;
      }
      case Op::scale: {
        Tensor& ga = grad_of(rec.a);
        ker.axpy(ga.data.data(), rec.c, g.data.data(), g.size());
        break;
      }
    }
  }
}

Tensor Graph::gradient(NodeId n) const {
  check(n);
  const NodeRec& rec = nodes_[n];
  if (!rec.has_grad) return Tensor(rec.value.shape);
  return rec.grad;
}

}  // namespace impplan
