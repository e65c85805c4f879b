// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "bgan/core/autograd.hpp"

namespace bgan::ad {

namespace detail {
template <typename S>
void require_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()));
  }
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner extents differ " + shape_str(a.rows(), a.cols()) +
                         " x " + shape_str(b.rows(), b.cols()));
  }
  Mat<S> out = a.value() * b.value();
  return make_result<S>(std::move(out), {a, b}, [](Node<S>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * self.grad);
  });
}

/// a · bᵀ without materialising the transpose as a separate node.
template <typename S>
Tensor<S> matmul_nt(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner extents differ " + shape_str(a.rows(), a.cols()) +
                         " x " + shape_str(b.rows(), b.cols()) + "^T");
  }
  Mat<S> out = a.value() * b.value().transpose();
  return make_result<S>(std::move(out), {a, b}, [](Node<S>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad * pb.value);
    if (pb.requires_grad) pb.accumulate(self.grad.transpose() * pa.value);
  });
}

template <typename S>
Tensor<S> transpose(const Tensor<S>& a) {
  Mat<S> out = a.value().transpose();
  return make_result<S>(std::move(out), {a}, [](Node<S>& self) {
    self.parents[0]->accumulate(self.grad.transpose());
  });
}

// ---------------------------------------------------------------------------
// Elementwise

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_same_shape(a, b, "add");
  Mat<S> out = a.value() + b.value();
  return make_result<S>(std::move(out), {a, b}, [](Node<S>& self) {
    self.parents[0]->accumulate(self.grad);
    self.parents[1]->accumulate(self.grad);
  });
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_same_shape(a, b, "sub");
  Mat<S> out = a.value() - b.value();
  return make_result<S>(std::move(out), {a, b}, [](Node<S>& self) {
    self.parents[0]->accumulate(self.grad);
    self.parents[1]->accumulate(-self.grad);
  });
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_same_shape(a, b, "mul");
  Mat<S> out = a.value().cwiseProduct(b.value());
  return make_result<S>(std::move(out), {a, b}, [](Node<S>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad.cwiseProduct(pb.value));
    if (pb.requires_grad) pb.accumulate(self.grad.cwiseProduct(pa.value));
  });
}

template <typename S>
Tensor<S> operator+(const Tensor<S>& a, const Tensor<S>& b) { return add(a, b); }
template <typename S>
Tensor<S> operator-(const Tensor<S>& a, const Tensor<S>& b) { return sub(a, b); }

/// Adds a 1×n row to every row of a (bias broadcast).
template <typename S>
Tensor<S> add_row(const Tensor<S>& a, const Tensor<S>& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: expected row " + shape_str(1, a.cols()) + ", got " +
                         shape_str(row.rows(), row.cols()));
  }
  Mat<S> out = a.value().rowwise() + row.value().row(0);
  return make_result<S>(std::move(out), {a, row}, [](Node<S>& self) {
    self.parents[0]->accumulate(self.grad);
    if (self.parents[1]->requires_grad) self.parents[1]->accumulate(self.grad.colwise().sum());
  });
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S factor) {
  Mat<S> out = a.value() * factor;
  return make_result<S>(std::move(out), {a}, [factor](Node<S>& self) {
    self.parents[0]->accumulate(self.grad * factor);
  });
}

template <typename S>
Tensor<S> add_scalar(const Tensor<S>& a, S offset) {
  Mat<S> out = a.value().array() + offset;
  return make_result<S>(std::move(out), {a}, [](Node<S>& self) {
    self.parents[0]->accumulate(self.grad);
  });
}

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
  Mat<S> out = a.value().cwiseMax(S(0));
  return make_result<S>(std::move(out), {a}, [](Node<S>& self) {
    auto& pa = *self.parents[0];
    pa.accumulate((pa.value.array() > S(0)).select(self.grad, Mat<S>::Zero(self.grad.rows(), self.grad.cols())));
  });
}

template <typename S>
Tensor<S> leaky_relu(const Tensor<S>& a, S slope) {
  Mat<S> out = (a.value().array() > S(0)).select(a.value(), a.value() * slope);
  return make_result<S>(std::move(out), {a}, [slope](Node<S>& self) {
    auto& pa = *self.parents[0];
    pa.accumulate((pa.value.array() > S(0)).select(self.grad, self.grad * slope));
  });
}

/// GELU, tanh approximation. Smooth everywhere, which keeps finite
/// difference checks free of kinks.
template <typename S>
Tensor<S> gelu(const Tensor<S>& a) {
  const S c = static_cast<S>(0.7978845608028654);  // sqrt(2/pi)
  const S k = static_cast<S>(0.044715);
  const auto x = a.value().array();
  Mat<S> inner = (c * (x + k * x.cube())).tanh().matrix();
  Mat<S> out = (S(0.5) * x * (S(1) + inner.array())).matrix();
  return make_result<S>(std::move(out), {a}, [inner = std::move(inner), c, k](Node<S>& self) {
    auto& pa = *self.parents[0];
    const auto x = pa.value.array();
    const auto t = inner.array();
    auto dt = (S(1) - t.square()) * c * (S(1) + S(3) * k * x.square());
    pa.accumulate((self.grad.array() * (S(0.5) * (S(1) + t) + S(0.5) * x * dt)).matrix());
  });
}

template <typename S>
Tensor<S> tanh(const Tensor<S>& a) {
  Mat<S> out = a.value().array().tanh();
  return make_result<S>(std::move(out), {a}, [](Node<S>& self) {
    self.parents[0]->accumulate(
        (self.grad.array() * (S(1) - self.value.array().square())).matrix());
  });
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  Mat<S> out = (S(1) / (S(1) + (-a.value().array()).exp())).matrix();
  return make_result<S>(std::move(out), {a}, [](Node<S>& self) {
    self.parents[0]->accumulate(
        (self.grad.array() * self.value.array() * (S(1) - self.value.array())).matrix());
  });
}

// ---------------------------------------------------------------------------
// Reductions and reshaping

template <typename S>
Tensor<S> sum(const Tensor<S>& a) {
  Mat<S> out(1, 1);
  out(0, 0) = a.value().sum();
  return make_result<S>(std::move(out), {a}, [](Node<S>& self) {
    auto& pa = *self.parents[0];
    pa.accumulate(Mat<S>::Constant(pa.value.rows(), pa.value.cols(), self.grad(0, 0)));
  });
}

template <typename S>
Tensor<S> mean(const Tensor<S>& a) {
  const auto n = static_cast<S>(a.value().size());
  Mat<S> out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return make_result<S>(std::move(out), {a}, [n](Node<S>& self) {
    auto& pa = *self.parents[0];
    pa.accumulate(Mat<S>::Constant(pa.value.rows(), pa.value.cols(), self.grad(0, 0) / n));
  });
}

/// Column-wise mean over rows: n×d → 1×d.
template <typename S>
Tensor<S> mean_rows(const Tensor<S>& a) {
  const auto n = static_cast<S>(a.rows());
  Mat<S> out = a.value().colwise().sum() / n;
  return make_result<S>(std::move(out), {a}, [n](Node<S>& self) {
    auto& pa = *self.parents[0];
    Mat<S> g = self.grad.replicate(pa.value.rows(), 1) / n;
    pa.accumulate(g);
  });
}

template <typename S>
Tensor<S> slice_rows(const Tensor<S>& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") outside " + shape_str(a.rows(), a.cols()));
  }
  Mat<S> out = a.value().middleRows(begin, count);
  return make_result<S>(std::move(out), {a}, [begin, count](Node<S>& self) {
    auto& pa = *self.parents[0];
    Mat<S> g = Mat<S>::Zero(pa.value.rows(), pa.value.cols());
    g.middleRows(begin, count) = self.grad;
    pa.accumulate(g);
  });
}

template <typename S>
Tensor<S> slice_cols(const Tensor<S>& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    throw DimensionError("slice_cols: out of range for " + shape_str(a.rows(), a.cols()));
  }
  Mat<S> out = a.value().middleCols(begin, count);
  return make_result<S>(std::move(out), {a}, [begin, count](Node<S>& self) {
    auto& pa = *self.parents[0];
    Mat<S> g = Mat<S>::Zero(pa.value.rows(), pa.value.cols());
    g.middleCols(begin, count) = self.grad;
    pa.accumulate(g);
  });
}

template <typename S>
Tensor<S> concat_rows(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  Index rows = 0;
  const Index cols = parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw DimensionError("concat_rows: column extents differ");
    rows += p.rows();
  }
  Mat<S> out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return make_result<S>(std::move(out), parts, [](Node<S>& self) {
    Index offset = 0;
    for (auto& p : self.parents) {
      const Index r = p->value.rows();
      if (p->requires_grad) p->accumulate(self.grad.middleRows(offset, r));
      offset += r;
    }
  });
}

/// Row lookup: out[i] = table[ids[i]].
template <typename S>
Tensor<S> gather_rows(const Tensor<S>& table, std::span<const int> ids) {
  Mat<S> out(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw DimensionError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                           std::to_string(table.rows()) + " rows");
    }
    out.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return make_result<S>(std::move(out), {table}, [idx = std::move(idx)](Node<S>& self) {
    auto& pt = *self.parents[0];
    Mat<S> g = Mat<S>::Zero(pt.value.rows(), pt.value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += self.grad.row(static_cast<Index>(i));
    pt.accumulate(g);
  });
}

// ---------------------------------------------------------------------------
// Normalisation and losses

/// Softmax along `axis` (1: within each row, 0: within each column), with
/// max-subtraction.
template <typename S>
Tensor<S> softmax(const Tensor<S>& x, int axis = 1) {
  if (axis != 0 && axis != 1) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for a rank-2 tensor");
  }
  Mat<S> in = axis == 1 ? Mat<S>(x.value()) : Mat<S>(x.value().transpose());
  Mat<S> out(in.rows(), in.cols());
  for (Index r = 0; r < in.rows(); ++r) {
    const S m = in.row(r).maxCoeff();
    out.row(r) = (in.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  if (axis == 0) out.transposeInPlace();
  return make_result<S>(std::move(out), {x}, [axis](Node<S>& self) {
    const Mat<S>& y = self.value;
    Mat<S> g;
    if (axis == 1) {
      Eigen::Matrix<S, Eigen::Dynamic, 1> dots = (self.grad.cwiseProduct(y)).rowwise().sum();
      g = (self.grad.colwise() - dots).cwiseProduct(y);
    } else {
      RowVec<S> dots = (self.grad.cwiseProduct(y)).colwise().sum();
      g = (self.grad.rowwise() - dots).cwiseProduct(y);
    }
    self.parents[0]->accumulate(g);
  });
}

/// Per-row normalisation to zero mean, unit population variance, then
/// affine with gain and bias (both 1×d).
template <typename S>
Tensor<S> layer_norm(const Tensor<S>& x, const Tensor<S>& gain, const Tensor<S>& bias, S eps) {
  const Index d = x.cols();
  if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d) {
    throw DimensionError("layer_norm: gain/bias must be " + shape_str(1, d));
  }
  const Index n = x.rows();
  Mat<S> xhat(n, d);
  Eigen::Matrix<S, Eigen::Dynamic, 1> inv_std(n);
  for (Index r = 0; r < n; ++r) {
    const S mu = x.value().row(r).mean();
    const S var = (x.value().row(r).array() - mu).square().mean();
    inv_std(r) = S(1) / std::sqrt(var + eps);
    xhat.row(r) = (x.value().row(r).array() - mu) * inv_std(r);
  }
  Mat<S> out = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  return make_result<S>(
      std::move(out), {x, gain, bias},
      [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node<S>& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        if (pg.requires_grad) pg.accumulate(self.grad.cwiseProduct(xhat).colwise().sum());
        if (pb.requires_grad) pb.accumulate(self.grad.colwise().sum());
        if (px.requires_grad) {
          const S d = static_cast<S>(xhat.cols());
          Mat<S> dxhat = (self.grad.array().rowwise() * pg.value.row(0).array()).matrix();
          Eigen::Matrix<S, Eigen::Dynamic, 1> m1 = dxhat.rowwise().sum() / d;
          Eigen::Matrix<S, Eigen::Dynamic, 1> m2 = dxhat.cwiseProduct(xhat).rowwise().sum() / d;
          Mat<S> g = dxhat;
          g.colwise() -= m1;
          g -= (xhat.array().colwise() * m2.array()).matrix();
          g = (g.array().colwise() * inv_std.array()).matrix();
          px.accumulate(g);
        }
      });
}

/// Scales each row to unit L2 norm; rows with norm below `eps` map to zero.
template <typename S>
Tensor<S> normalize_rows(const Tensor<S>& x, S eps = S(1e-8)) {
  Mat<S> out = x.value();
  Eigen::Matrix<S, Eigen::Dynamic, 1> norms(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    norms(r) = x.value().row(r).norm();
    if (norms(r) < eps) {
      out.row(r).setZero();
    } else {
      out.row(r) /= norms(r);
    }
  }
  return make_result<S>(std::move(out), {x}, [norms = std::move(norms), eps](Node<S>& self) {
    Mat<S> g = Mat<S>::Zero(self.grad.rows(), self.grad.cols());
    for (Index r = 0; r < g.rows(); ++r) {
      if (norms(r) < eps) continue;
      const auto y = self.value.row(r);
      const S dot = y.dot(self.grad.row(r));
      g.row(r) = (self.grad.row(r) - y * dot) / norms(r);
    }
    self.parents[0]->accumulate(g);
  });
}

/// Mean token cross-entropy of `logits` (L×V) against `targets`, skipping
/// positions whose target equals `pad_id`.
template <typename S>
Tensor<S> cross_entropy(const Tensor<S>& logits, std::span<const int> targets, int pad_id) {
  const Index len = logits.rows();
  const Index vocab = logits.cols();
  if (static_cast<Index>(targets.size()) != len) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         shape_str(len, vocab) + " logits");
  }
  Mat<S> probs(len, vocab);
  S total = 0;
  Index count = 0;
  for (Index r = 0; r < len; ++r) {
    const S m = logits.value().row(r).maxCoeff();
    probs.row(r) = (logits.value().row(r).array() - m).exp().matrix();
    const S z = probs.row(r).sum();
    probs.row(r) /= z;
    const int t = targets[static_cast<std::size_t>(r)];
    if (t == pad_id) continue;
    if (t < 0 || t >= vocab) {
      throw DimensionError("cross_entropy: target " + std::to_string(t) + " outside [0," +
                           std::to_string(vocab) + ")");
    }
    total += -(logits.value()(r, t) - m - std::log(z));
    ++count;
  }
  if (count == 0) throw ContractError("cross_entropy: every target position is padding");
  Mat<S> out(1, 1);
  out(0, 0) = total / static_cast<S>(count);
  std::vector<int> tgt(targets.begin(), targets.end());
  return make_result<S>(std::move(out), {logits},
                        [probs = std::move(probs), tgt = std::move(tgt), pad_id,
                         count](Node<S>& self) {
                          Mat<S> g = probs;
                          for (Index r = 0; r < g.rows(); ++r) {
                            const int t = tgt[static_cast<std::size_t>(r)];
                            if (t == pad_id) {
                              g.row(r).setZero();
                            } else {
                              g(r, t) -= S(1);
                            }
                          }
                          g *= self.grad(0, 0) / static_cast<S>(count);
                          self.parents[0]->accumulate(g);
                        });
}

}  // namespace bgan::ad
