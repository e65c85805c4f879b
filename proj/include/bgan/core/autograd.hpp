// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode automatic differentiation over dense row-major Eigen
// matrices. Graphs are built dynamically by the operations in ops.hpp and
// discarded after each step.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace bgan::ad {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::string shape_str(Index rows, Index cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

/// A named trainable (or state-only) tensor owned by a ParamStore.
///
/// `rank` only records how the tensor is exposed on disk: rank-1 tensors
/// are stored as a single row.
template <typename S>
struct Parameter {
  Mat<S> value;
  Mat<S> grad;
  Mat<S> adam_m;
  Mat<S> adam_v;
  bool requires_grad = true;
  int rank = 2;

  void zero_grad() {
    if (requires_grad) grad.setZero(value.rows(), value.cols());
  }
};

/// Named parameter map plus the optimizer step counter.
///
/// Paths are kept in a std::map so iteration order (and therefore the
/// checkpoint layout) is stable. Parameter addresses are stable for the
/// lifetime of the store; graph leaves point at them.
template <typename S>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = default;
  ParamStore& operator=(const ParamStore&) = default;

  Parameter<S>& add(const std::string& path, Mat<S> init, bool requires_grad = true,
                    int rank = 2) {
    if (params_.count(path) != 0) {
      throw ContractError("duplicate parameter path: " + path);
    }
    Parameter<S> p;
    p.value = std::move(init);
    p.requires_grad = requires_grad;
    p.rank = rank;
    if (requires_grad) {
      p.grad = Mat<S>::Zero(p.value.rows(), p.value.cols());
      p.adam_m = Mat<S>::Zero(p.value.rows(), p.value.cols());
      p.adam_v = Mat<S>::Zero(p.value.rows(), p.value.cols());
    }
    return params_.emplace(path, std::move(p)).first->second;
  }

  Parameter<S>& at(const std::string& path) {
    auto it = params_.find(path);
    if (it == params_.end()) throw std::out_of_range("unknown parameter: " + path);
    return it->second;
  }
  const Parameter<S>& at(const std::string& path) const {
    auto it = params_.find(path);
    if (it == params_.end()) throw std::out_of_range("unknown parameter: " + path);
    return it->second;
  }
  bool contains(const std::string& path) const { return params_.count(path) != 0; }

  void zero_grad() {
    for (auto& [_, p] : params_) p.zero_grad();
  }

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }
  void bump_step() { ++step_; }

  /// Number of scalars in trainable parameters.
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [_, p] : params_) {
      if (p.requires_grad) n += static_cast<std::size_t>(p.value.size());
    }
    return n;
  }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Parameter<S>> params_;
  std::uint64_t step_ = 0;
};

template <typename S>
struct Node {
  Mat<S> value;
  Mat<S> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  Parameter<S>* param = nullptr;

  bool is_leaf() const { return parents.empty(); }

  template <typename Expr>
  void accumulate(const Expr& g) {
    if (!requires_grad) return;
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
};

namespace detail {
inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}
}  // namespace detail

inline bool grad_enabled() { return detail::grad_mode(); }

/// Disables graph recording for its lifetime (inference, back-translation).
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode()) { detail::grad_mode() = false; }
  ~NoGradGuard() { detail::grad_mode() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Handle to a node of the dynamic graph. Copies share the node.
template <typename S>
class Tensor {
 public:
  using Scalar = S;

  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<S>> node) : node_(std::move(node)) {}

  const Mat<S>& value() const { return node_->value; }
  const Mat<S>& grad() const { return node_->grad; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool defined() const { return node_ != nullptr; }

  S item() const {
    if (rows() != 1 || cols() != 1) {
      throw ContractError("item() on non-scalar tensor " + shape_str(rows(), cols()));
    }
    return node_->value(0, 0);
  }

  const std::shared_ptr<Node<S>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<S>> node_;
};

template <typename S>
Tensor<S> constant(Mat<S> value) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  return Tensor<S>(std::move(n));
}

/// Free leaf that records its own gradient (used by gradient checks).
template <typename S>
Tensor<S> variable(Mat<S> value) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  n->requires_grad = grad_enabled();
  return Tensor<S>(std::move(n));
}

/// Graph leaf bound to a stored parameter; backward accumulates into it.
template <typename S>
Tensor<S> leaf(Parameter<S>& p) {
  auto n = std::make_shared<Node<S>>();
  n->value = p.value;
  n->requires_grad = p.requires_grad && grad_enabled();
  n->param = n->requires_grad ? &p : nullptr;
  return Tensor<S>(std::move(n));
}

template <typename S>
Tensor<S> detach(const Tensor<S>& t) {
  return constant<S>(t.value());
}

/// Builds a result node; records parents and the backward rule only when
/// some parent needs a gradient and recording is enabled.
template <typename S, typename Backward>
Tensor<S> make_result(Mat<S> value, std::vector<Tensor<S>> parents, Backward&& bw) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  if (grad_enabled()) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      n->requires_grad = true;
      n->parents.reserve(parents.size());
      for (auto& p : parents) n->parents.push_back(p.node());
      n->backward = std::forward<Backward>(bw);
    }
  }
  return Tensor<S>(std::move(n));
}

/// Reverse pass from a scalar loss.
///
/// Interior gradients are recomputed on every call; leaf gradients
/// (parameters and free variables) accumulate, so two calls on the same
/// graph yield twice the gradient.
template <typename S>
void backward(const Tensor<S>& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1) {
    throw ContractError("backward() requires a scalar loss, got " +
                        (loss.defined() ? shape_str(loss.rows(), loss.cols()) : "undefined"));
  }
  if (!loss.requires_grad()) return;

  std::vector<Node<S>*> order;
  std::unordered_set<Node<S>*> visited;
  std::vector<std::pair<Node<S>*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<S>* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Leaf gradients accumulate across calls; bound parameters receive theirs
  // through a fresh per-call buffer.
  for (Node<S>* n : order) {
    if (!n->is_leaf() || n->param != nullptr) n->grad.resize(0, 0);
  }
  loss.node()->grad = Mat<S>::Ones(1, 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<S>* n = *it;
    if (n->grad.size() == 0) continue;
    if (n->backward) n->backward(*n);
    if (n->param != nullptr) n->param->grad += n->grad;
  }
}

}  // namespace bgan::ad
