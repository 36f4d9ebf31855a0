#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "vitcolor/autodiff.hpp"
#include "vitcolor/rng.hpp"

namespace vitcolor {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::int64_t coords_checked = 0;
};

/// Compares reverse-mode gradients against central differences at randomly
/// sampled coordinates of each leaf. `f` must rebuild the graph from the
/// leaves on every call and be deterministic (reset any rng it consumes).
/// The relative error denominator is floored at a scale proportional to the
/// largest analytic gradient so near-zero coordinates do not blow up.
template <typename T, typename F>
GradCheckReport grad_check(F&& f, const std::vector<Var<T>>& leaves, Rng& rng,
                           std::int64_t coords_per_leaf, T h) {
  for (const auto& l : leaves) l->grad = Tensor<T>();
  Var<T> out = f();
  backward(out);

  std::vector<Tensor<T>> analytic;
  T max_abs = T(0);
  for (const auto& l : leaves) {
    l->ensure_grad();
    analytic.push_back(l->grad);
    const std::int64_t n = l->grad.numel();
    for (std::int64_t i = 0; i < n; ++i) {
      const T a = std::abs(l->grad.data()[i]);
      if (a > max_abs) max_abs = a;
    }
  }
  const T tau = T(1e-4) * max_abs + T(1e-12);

  GradCheckReport rep;
  NoGradGuard ng;  // perturbed evaluations only need values
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    const auto& leaf = leaves[li];
    const std::int64_t n = leaf->value.numel();
    const std::int64_t count = coords_per_leaf < n ? coords_per_leaf : n;
    for (std::int64_t k = 0; k < count; ++k) {
      const std::int64_t idx = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      const T orig = leaf->value.data()[idx];
      leaf->value.data()[idx] = orig + h;
      const T fp = f()->value.data()[0];
      leaf->value.data()[idx] = orig - h;
      const T fm = f()->value.data()[0];
      leaf->value.data()[idx] = orig;
      const T fd = (fp - fm) / (T(2) * h);
      const T ad = analytic[li].data()[idx];
      T denom = std::abs(fd);
      if (std::abs(ad) > denom) denom = std::abs(ad);
      if (tau > denom) denom = tau;
      const T rel = std::abs(fd - ad) / denom;
      if (static_cast<double>(rel) > rep.max_rel_err) rep.max_rel_err = static_cast<double>(rel);
      ++rep.coords_checked;
    }
  }
  return rep;
}

}  // namespace vitcolor
