// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference oracle for the reverse-mode engine. Only
// forward values are used on the numeric side, so the check stays
// independent of every backward rule it validates.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "bgan/core/autograd.hpp"

namespace bgan::ad {

/// |analytic − numeric| / max(|analytic|, |numeric|, floor).
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst;  // parameter path (or "x") and flat index of the worst coordinate
  std::size_t checked = 0;
};

/// Checks d f / d x for a scalar-valued f at `x`. Coordinates for which
/// `skip(flat_index)` holds are treated as non-differentiable points and
/// left out.
template <typename S>
double grad_check(const std::function<Tensor<S>(const Tensor<S>&)>& f, const Mat<S>& x, S eps,
                  const std::function<bool(Index)>& skip = {}) {
  Tensor<S> input = variable<S>(x);
  Tensor<S> out = f(input);
  backward(out);
  const Mat<S> analytic =
      input.grad().size() != 0 ? input.grad() : Mat<S>::Zero(x.rows(), x.cols());

  double worst = 0.0;
  NoGradGuard no_grad;
  Mat<S> probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    if (skip && skip(i)) continue;
    const S saved = probe.data()[i];
    probe.data()[i] = saved + eps;
    const S up = f(constant<S>(probe)).item();
    probe.data()[i] = saved - eps;
    const S down = f(constant<S>(probe)).item();
    probe.data()[i] = saved;
    const double numeric = static_cast<double>((up - down) / (S(2) * eps));
    worst = std::max(worst, relative_error(static_cast<double>(analytic.data()[i]), numeric));
  }
  return worst;
}

/// Checks the gradient of `loss()` with respect to every trainable
/// parameter in `store`. At most `max_coords` coordinates per parameter are
/// probed, evenly strided.
template <typename S>
GradCheckReport grad_check_params(ParamStore<S>& store, const std::function<Tensor<S>()>& loss,
                                  S eps, Index max_coords = 1 << 30) {
  store.zero_grad();
  backward(loss());
  std::map<std::string, Mat<S>> analytic;
  for (auto& [path, p] : store) {
    if (p.requires_grad) analytic[path] = p.grad;
  }
  store.zero_grad();

  GradCheckReport report;
  NoGradGuard no_grad;
  for (auto& [path, p] : store) {
    if (!p.requires_grad) continue;
    const Index n = p.value.size();
    const Index stride = std::max<Index>(1, n / std::max<Index>(1, max_coords));
    for (Index i = 0; i < n; i += stride) {
      const S saved = p.value.data()[i];
      p.value.data()[i] = saved + eps;
      const S up = loss().item();
      p.value.data()[i] = saved - eps;
      const S down = loss().item();
      p.value.data()[i] = saved;
      const double numeric = static_cast<double>((up - down) / (S(2) * eps));
      const double err = relative_error(static_cast<double>(analytic[path].data()[i]), numeric);
      ++report.checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst = path + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

}  // namespace bgan::ad
