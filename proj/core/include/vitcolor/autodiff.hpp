#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vitcolor/tensor.hpp"

namespace vitcolor {

/// One node of a reverse-mode tape. Children hold shared_ptrs to parents,
/// never the other way around, so releasing the root frees the graph.
template <typename T>
struct VarNode {
  Tensor<T> value;
  Tensor<T> grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<VarNode<T>>> parents;
  // Called with this node's grad once all contributions are in; accumulates
  // into the parents' grads.
  std::function<void(const Tensor<T>&)> backward_fn;

  void ensure_grad() {
    if (!grad.defined()) grad = Tensor<T>(value.shape());
  }
};

template <typename T>
using Var = std::shared_ptr<VarNode<T>>;

inline bool& grad_enabled_flag() {
  thread_local bool enabled = true;
  return enabled;
}

inline bool grad_enabled() { return grad_enabled_flag(); }

/// Disables graph construction for its scope; ops built under it are plain
/// value computations with no parents.
struct NoGradGuard {
  bool saved;
  NoGradGuard() : saved(grad_enabled_flag()) { grad_enabled_flag() = false; }
  ~NoGradGuard() { grad_enabled_flag() = saved; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

template <typename T>
Var<T> make_var(Tensor<T> value, bool requires_grad = false) {
  auto n = std::make_shared<VarNode<T>>();
  n->value = std::move(value);
  n->requires_grad = requires_grad && grad_enabled();
  return n;
}

template <typename T>
Var<T> constant(Tensor<T> value) {
  return make_var(std::move(value), false);
}

/// Result node factory used by every op: the graph edge exists only when
/// grad mode is on and some parent needs gradients.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(const Tensor<T>&)> backward) {
  auto n = std::make_shared<VarNode<T>>();
  n->value = std::move(value);
  bool rg = false;
  if (grad_enabled())
    for (const auto& p : parents)
      if (p && p->requires_grad) rg = true;
  n->requires_grad = rg;
  if (rg) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward);
  }
  return n;
}

/// Detached copy: same value, no history.
template <typename T>
Var<T> detach(const Var<T>& v) {
  return make_var(Tensor<T>(v->value), false);
}

/// Accumulates d/droot into every reachable leaf with requires_grad. The
/// root must be scalar. Grads add onto whatever is already stored; callers
/// zero parameter grads between steps.
template <typename T>
void backward(const Var<T>& root) {
  if (!root) throw std::invalid_argument("backward: null root");
  if (root->value.numel() != 1)
    throw std::invalid_argument("backward: root must be scalar, got " + shape_str(root->value.shape()));
  if (!root->requires_grad) return;

  // Iterative post-order DFS; post-order reversed is a valid topological
  // order (children before parents in the backward pass).
  std::vector<VarNode<T>*> order;
  std::unordered_set<VarNode<T>*> visited;
  std::vector<std::pair<VarNode<T>*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      VarNode<T>* p = node->parents[idx].get();
      ++idx;
      if (p != nullptr && p->requires_grad && visited.insert(p).second)
        stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad.data()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VarNode<T>* node = *it;
    if (node->backward_fn) node->backward_fn(node->grad);
  }
}

namespace detail {

/// dst += src, allocating dst's grad storage on first touch.
template <typename T>
void accumulate(const Var<T>& dst, const Tensor<T>& src) {
  if (!dst->requires_grad) return;
  dst->ensure_grad();
  T* d = dst->grad.data();
  const T* s = src.data();
  const std::int64_t n = src.numel();
  for (std::int64_t i = 0; i < n; ++i) d[i] += s[i];
}

}  // namespace detail

}  // namespace vitcolor
