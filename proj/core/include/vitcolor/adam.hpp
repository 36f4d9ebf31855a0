#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vitcolor/container.hpp"
#include "vitcolor/params.hpp"

namespace vitcolor {

/// Adam with bias-corrected moments. Moment buffers are keyed by parameter
/// name and created on first touch, so an optimizer can be constructed
/// before or after the first backward pass. Parameters whose grad was never
/// populated in a step are skipped entirely (their moments do not decay).
template <typename T>
class Adam {
 public:
  struct Hyper {
    T lr = T(2e-4);
    T beta1 = T(0.5);
    T beta2 = T(0.9);
    T eps = T(1e-8);
  };

  explicit Adam(Hyper h) : h_(h) {
    // lr 0 is legal (a frozen phase leaves parameters bitwise unchanged);
    // negative is not.
    if (h_.lr < 0 || h_.beta1 < 0 || h_.beta1 >= 1 || h_.beta2 < 0 || h_.beta2 >= 1 || h_.eps <= 0)
      throw std::invalid_argument("adam: bad hyperparameters");
  }

  void set_lr(T lr) {
    if (lr < 0) throw std::invalid_argument("adam: lr must be non-negative");
    h_.lr = lr;
  }
  T lr() const { return h_.lr; }
  std::int64_t step_count() const { return t_; }

  void step(const ParamStore<T>& store) {
    ++t_;
    const T bc1 = T(1) - std::pow(h_.beta1, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(h_.beta2, static_cast<T>(t_));
    for (const auto& [name, p] : store.params()) {
      if (!p->grad.defined()) continue;
      if (!p->grad.all_finite())
        throw std::runtime_error("adam: non-finite gradient for " + name);
      Tensor<T>& m = moment(m_, name, p->value.shape());
      Tensor<T>& v = moment(v_, name, p->value.shape());
      const std::int64_t n = p->value.numel();
      for (std::int64_t i = 0; i < n; ++i) {
        const T g = p->grad.data()[i];
        m.data()[i] = h_.beta1 * m.data()[i] + (T(1) - h_.beta1) * g;
        v.data()[i] = h_.beta2 * v.data()[i] + (T(1) - h_.beta2) * g * g;
        const T mhat = m.data()[i] / bc1;
        const T vhat = v.data()[i] / bc2;
        p->value.data()[i] -= h_.lr * mhat / (std::sqrt(vhat) + h_.eps);
      }
    }
  }

  /// Moment buffers and step counter as container entries ("m.<param>",
  /// "v.<param>", "t"); pairs with deserialize for bitwise resume.
  std::vector<RawEntry> serialize() const {
    std::vector<RawEntry> entries;
    Tensor<T> t({1});
    t.data()[0] = static_cast<T>(t_);
    entries.push_back(to_entry("t", t));
    std::vector<std::string> names;
    for (const auto& [name, m] : m_) names.push_back(name);
    std::sort(names.begin(), names.end());  // hash-map order must not leak into files
    for (const auto& name : names) entries.push_back(to_entry("m." + name, m_.at(name)));
    for (const auto& name : names) entries.push_back(to_entry("v." + name, v_.at(name)));
    return entries;
  }

  void deserialize(const std::vector<RawEntry>& entries) {
    m_.clear();
    v_.clear();
    t_ = -1;
    for (const auto& e : entries) {
      if (e.name == "t") {
        t_ = static_cast<std::int64_t>(from_entry<T>(e).data()[0]);
      } else if (e.name.rfind("m.", 0) == 0) {
        m_[e.name.substr(2)] = from_entry<T>(e);
      } else if (e.name.rfind("v.", 0) == 0) {
        v_[e.name.substr(2)] = from_entry<T>(e);
      } else {
        throw std::runtime_error("adam: unexpected entry " + e.name);
      }
    }
    if (t_ < 0) throw std::runtime_error("adam: missing step counter");
  }

 private:
  Tensor<T>& moment(std::unordered_map<std::string, Tensor<T>>& map, const std::string& name,
                    const Shape& shape) {
    auto it = map.find(name);
    if (it == map.end()) it = map.emplace(name, Tensor<T>(shape, T(0))).first;
    else if (!(it->second.shape() == shape))
      throw std::runtime_error("adam: moment shape changed for " + name);
    return it->second;
  }

  Hyper h_;
  std::int64_t t_ = 0;
  std::unordered_map<std::string, Tensor<T>> m_, v_;
};

}  // namespace vitcolor
