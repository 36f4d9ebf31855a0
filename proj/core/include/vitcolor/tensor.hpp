#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vitcolor {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& s) {
  std::int64_t n = 1;
  for (auto e : s) n *= e;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << 'x';
    os << s[i];
  }
  os << ']';
  return os.str();
}

/// Dense row-major N-d array. Compute dtype is the template parameter: float
/// for ordinary training/inference, double for finite-difference gradient
/// checking where float noise would drown the comparison.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_.assign(static_cast<std::size_t>(shape_numel(shape_)), fill);
  }

  static Tensor from_data(Shape shape, std::vector<T> data) {
    validate_shape(shape);
    if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
      throw std::invalid_argument("Tensor::from_data: shape " + shape_str(shape) +
                                  " does not match " + std::to_string(data.size()) +
                                  " elements");
    }
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    return t;
  }

  bool defined() const { return !shape_.empty() || !data_.empty(); }
  const Shape& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  std::int64_t extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  T& at2(std::int64_t i, std::int64_t j) {
    assert(ndim() == 2);
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  const T& at2(std::int64_t i, std::int64_t j) const {
    return const_cast<Tensor*>(this)->at2(i, j);
  }
  T& at3(std::int64_t i, std::int64_t j, std::int64_t k) {
    assert(ndim() == 3);
    return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  const T& at3(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return const_cast<Tensor*>(this)->at3(i, j, k);
  }
  T& at4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    assert(ndim() == 4);
    return data_[static_cast<std::size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  const T& at4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return const_cast<Tensor*>(this)->at4(n, c, h, w);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  Tensor reshaped(Shape new_shape) const {
    validate_shape(new_shape);
    if (shape_numel(new_shape) != numel()) {
      throw std::invalid_argument("Tensor::reshaped: cannot view " + shape_str(shape_) +
                                  " as " + shape_str(new_shape));
    }
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.data_ = data_;
    return t;
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return Tensor<U>::from_data(shape_, std::move(out));
  }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  T min_value() const {
    T m = data_.empty() ? T(0) : data_[0];
    for (T v : data_) m = std::min(m, v);
    return m;
  }
  T max_value() const {
    T m = data_.empty() ? T(0) : data_[0];
    for (T v : data_) m = std::max(m, v);
    return m;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  static void validate_shape(const Shape& s) {
    for (auto e : s) {
      if (e < 1) {
        throw std::invalid_argument("Tensor: shape extents must be >= 1, got " + shape_str(s));
      }
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

}  // namespace vitcolor
