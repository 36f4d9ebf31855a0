#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vitcolor/autodiff.hpp"
#include "vitcolor/tensor.hpp"

namespace vitcolor {

/// Ordered registry of a model's named state: trainable parameters (leaf
/// Vars) and non-trainable buffers such as batch-norm running statistics.
/// Buffer pointers alias tensors owned by the model, so a store must not
/// outlive the model it was collected from.
template <typename T>
class ParamStore {
 public:
  void add_param(const std::string& name, Var<T> v) {
    check_unique(name);
    params_.emplace_back(name, std::move(v));
  }
  void add_buffer(const std::string& name, Tensor<T>* t) {
    check_unique(name);
    buffers_.emplace_back(name, t);
  }

  const std::vector<std::pair<std::string, Var<T>>>& params() const { return params_; }
  const std::vector<std::pair<std::string, Tensor<T>*>>& buffers() const { return buffers_; }

  std::int64_t param_count() const {
    std::int64_t n = 0;
    for (const auto& [name, v] : params_) n += v->value.numel();
    return n;
  }

  void zero_grad() {
    for (auto& [name, v] : params_)
      if (v->grad.defined()) v->grad.fill(T(0));
  }

 private:
  void check_unique(const std::string& name) const {
    for (const auto& [n, v] : params_)
      if (n == name) throw std::logic_error("ParamStore: duplicate name " + name);
    for (const auto& [n, t] : buffers_)
      if (n == name) throw std::logic_error("ParamStore: duplicate name " + name);
  }

  std::vector<std::pair<std::string, Var<T>>> params_;
  std::vector<std::pair<std::string, Tensor<T>*>> buffers_;
};

}  // namespace vitcolor
