#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qttn/tensor/backend.hpp"
#include "qttn/tensor/errors.hpp"
#include "qttn/tensor/kernels.hpp"
#include "qttn/tensor/precision.hpp"

namespace qttn {

using Shape = std::vector<std::size_t>;
using Axes = std::vector<std::size_t>;

inline std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(std::span<const std::size_t> shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

/// Row-major dense array of scalars of type T.
template <Scalar T>
class DenseTensor {
 public:
  using value_type = T;
  using real_type = real_t<T>;

  DenseTensor() : data_(1, T{}) {}
  explicit DenseTensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), T{}) {}
  DenseTensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != shape_size(shape_))
      throw ShapeError("element count " + std::to_string(data_.size()) + " does not match shape " +
                       shape_string(shape_));
  }

  static DenseTensor identity(std::size_t n) {
    DenseTensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = T{1};
    return t;
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  template <typename... I>
  T& operator()(I... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... I>
  const T& operator()(I... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  /// Same elements under a new shape with equal element count.
  DenseTensor reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size())
      throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return DenseTensor(std::move(shape), data_);
  }

  DenseTensor& operator*=(T s) {
    for (auto& x : data_) x = mul(x, s);
    return *this;
  }

  DenseTensor& operator+=(const DenseTensor& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  DenseTensor& operator-=(const DenseTensor& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape_.size()) throw ArgumentError("index rank mismatch");
    std::size_t off = 0;
    std::size_t ax = 0;
    for (auto i : idx) {
      if (i >= shape_[ax]) throw ArgumentError("index out of range");
      off = off * shape_[ax++] + i;
    }
    return off;
  }

  void check_same_shape(const DenseTensor& o) const {
    if (o.shape_ != shape_)
      throw ShapeError("shape mismatch " + shape_string(shape_) + " vs " + shape_string(o.shape_));
  }

  Shape shape_;
  std::vector<T> data_;
};

namespace detail {

inline void check_permutation(std::span<const std::size_t> order, std::size_t rank) {
  if (order.size() != rank) throw ArgumentError("permutation length does not match rank");
  std::vector<bool> seen(rank, false);
  for (auto o : order) {
    if (o >= rank || seen[o]) throw ArgumentError("invalid permutation");
    seen[o] = true;
  }
}

inline bool is_identity_order(std::span<const std::size_t> order) {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] != i) return false;
  return true;
}

}  // namespace detail

template <Scalar T>
DenseTensor<T> permute(const DenseTensor<T>& a, std::span<const std::size_t> order,
                       const BackendId& backend = {}) {
  detail::check_permutation(order, a.rank());
  if (detail::is_identity_order(order)) return a;
  Shape out_shape(a.rank());
  for (std::size_t i = 0; i < a.rank(); ++i) out_shape[i] = a.dim(order[i]);
  DenseTensor<T> out(std::move(out_shape));
  kernels::permute(backend, a.shape(), order, a.raw(), out.raw());
  return out;
}

template <Scalar T>
DenseTensor<T> permute(const DenseTensor<T>& a, std::initializer_list<std::size_t> order,
                       const BackendId& backend = {}) {
  return permute(a, std::span<const std::size_t>(order.begin(), order.size()), backend);
}

/// Tensor-dot over paired axes; result axes are the free axes of `a`
/// followed by the free axes of `b`, each in original order.
template <Scalar T>
DenseTensor<T> contract(const DenseTensor<T>& a, const DenseTensor<T>& b,
                        std::span<const std::size_t> axes_a, std::span<const std::size_t> axes_b,
                        const BackendId& backend = {}) {
  if (axes_a.size() != axes_b.size()) throw ShapeError("contract: axis lists differ in length");
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  std::size_t k = 1;
  for (std::size_t i = 0; i < axes_a.size(); ++i) {
    const auto xa = axes_a[i], xb = axes_b[i];
    if (xa >= a.rank() || xb >= b.rank() || used_a[xa] || used_b[xb])
      throw ShapeError("contract: invalid axis");
    if (a.dim(xa) != b.dim(xb))
      throw ShapeError("contract: dimension mismatch " + std::to_string(a.dim(xa)) + " vs " +
                       std::to_string(b.dim(xb)));
    used_a[xa] = used_b[xb] = true;
    k *= a.dim(xa);
  }
  Axes order_a, order_b;
  Shape out_shape;
  std::size_t m = 1, n = 1;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!used_a[i]) {
      order_a.push_back(i);
      out_shape.push_back(a.dim(i));
      m *= a.dim(i);
    }
  order_a.insert(order_a.end(), axes_a.begin(), axes_a.end());
  order_b.assign(axes_b.begin(), axes_b.end());
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!used_b[i]) {
      order_b.push_back(i);
      out_shape.push_back(b.dim(i));
      n *= b.dim(i);
    }
  DenseTensor<T> out(std::move(out_shape));
  const DenseTensor<T>* pa = &a;
  const DenseTensor<T>* pb = &b;
  DenseTensor<T> ta, tb;
  if (!detail::is_identity_order(order_a)) {
    ta = permute(a, order_a, backend);
    pa = &ta;
  }
  if (!detail::is_identity_order(order_b)) {
    tb = permute(b, order_b, backend);
    pb = &tb;
  }
  kernels::gemm(backend, m, n, k, pa->raw(), pb->raw(), out.raw());
  return out;
}

template <Scalar T>
DenseTensor<T> contract(const DenseTensor<T>& a, const DenseTensor<T>& b,
                        std::initializer_list<std::size_t> axes_a,
                        std::initializer_list<std::size_t> axes_b, const BackendId& backend = {}) {
  return contract(a, b, std::span<const std::size_t>(axes_a.begin(), axes_a.size()),
                  std::span<const std::size_t>(axes_b.begin(), axes_b.size()), backend);
}

/// Merges consecutive axis groups into single axes. Groups must cover all
/// axes in order, e.g. {{0,1},{2}}.
template <Scalar T>
DenseTensor<T> fuse(const DenseTensor<T>& a, const std::vector<Axes>& groups) {
  Shape shape;
  std::size_t next = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw ShapeError("fuse: empty group");
    std::size_t d = 1;
    for (auto ax : g) {
      if (ax != next) throw ShapeError("fuse: groups must be consecutive; permute first");
      d *= a.dim(ax);
      ++next;
    }
    shape.push_back(d);
  }
  if (next != a.rank()) throw ShapeError("fuse: groups do not cover all axes");
  return a.reshaped(std::move(shape));
}

template <Scalar T>
DenseTensor<T> split(const DenseTensor<T>& a, std::size_t axis, const Shape& dims) {
  if (axis >= a.rank()) throw ShapeError("split: axis out of range");
  if (shape_size(dims) != a.dim(axis))
    throw ShapeError("split: dims " + shape_string(dims) + " do not factor axis of dimension " +
                     std::to_string(a.dim(axis)));
  Shape shape(a.shape().begin(), a.shape().begin() + static_cast<std::ptrdiff_t>(axis));
  shape.insert(shape.end(), dims.begin(), dims.end());
  shape.insert(shape.end(), a.shape().begin() + static_cast<std::ptrdiff_t>(axis) + 1, a.shape().end());
  return a.reshaped(std::move(shape));
}

template <Scalar T>
DenseTensor<T> conj(const DenseTensor<T>& a) {
  if constexpr (!is_complex_v<T>) {
    return a;
  } else {
    DenseTensor<T> out = a;
    for (auto& x : out.data()) x = std::conj(x);
    return out;
  }
}

/// Conjugate transpose of a matrix.
template <Scalar T>
DenseTensor<T> adjoint(const DenseTensor<T>& a, const BackendId& backend = {}) {
  if (a.rank() != 2) throw ShapeError("adjoint expects a matrix");
  return conj(permute(a, {1, 0}, backend));
}

/// Sum of conj(a_i) * b_i.
template <Scalar T>
T dot(const DenseTensor<T>& a, const DenseTensor<T>& b) {
  if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
  T sum{};
  const T* pa = a.raw();
  const T* pb = b.raw();
  for (std::size_t i = 0; i < a.size(); ++i) sum = mul_add(sum, conj_value(pa[i]), pb[i]);
  return sum;
}

template <Scalar T>
double norm(const DenseTensor<T>& a) {
  double sum = 0.0;
  for (const auto& x : a.data()) sum += static_cast<double>(abs2(x));
  return std::sqrt(sum);
}

/// y += alpha * x
template <Scalar T>
void axpy(DenseTensor<T>& y, T alpha, const DenseTensor<T>& x) {
  if (x.size() != y.size()) throw ShapeError("axpy: size mismatch");
  T* py = y.raw();
  const T* px = x.raw();
  for (std::size_t i = 0; i < y.size(); ++i) py[i] = mul_add(py[i], alpha, px[i]);
}

template <Scalar T>
void scale(DenseTensor<T>& a, T s) {
  a *= s;
}

template <Scalar T>
double max_abs_diff(const DenseTensor<T>& a, const DenseTensor<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, static_cast<double>(std::abs(a[i] - b[i])));
  return m;
}

template <Scalar T>
bool all_finite(const DenseTensor<T>& a) {
  for (const auto& x : a.data()) {
    if constexpr (is_complex_v<T>) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    } else {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

/// Entries i.i.d. uniform on [-1, 1]; real and imaginary parts drawn independently.
template <Scalar T, typename Rng>
DenseTensor<T> random_dense(Shape shape, Rng& rng) {
  using R = real_t<T>;
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseTensor<T> t(std::move(shape));
  for (auto& x : t.data()) {
    if constexpr (is_complex_v<T>) {
      const double re = dist(rng);
      const double im = dist(rng);
      x = T(static_cast<R>(re), static_cast<R>(im));
    } else {
      x = static_cast<T>(dist(rng));
    }
  }
  return t;
}

/// Largest |imag| relative to the tensor norm; zero for real tensors.
template <Scalar T>
double max_imag_ratio(const DenseTensor<T>& a) {
  if constexpr (!is_complex_v<T>) {
    return 0.0;
  } else {
    double m = 0.0;
    for (const auto& x : a.data()) m = std::max(m, static_cast<double>(std::abs(x.imag())));
    const double n = norm(a);
    return n > 0.0 ? m / n : (m > 0.0 ? INFINITY : 0.0);
  }
}

inline constexpr double kLossyImagRatio = 1e-8;

/// Element-wise cast. Complex to real requires max|imag| < 1e-8 * norm.
template <Scalar U, Scalar T>
DenseTensor<U> convert(const DenseTensor<T>& a) {
  if constexpr (std::is_same_v<U, T>) {
    return a;
  } else {
    if constexpr (is_complex_v<T> && !is_complex_v<U>) {
      if (max_imag_ratio(a) >= kLossyImagRatio)
        throw PrecisionError("complex to real conversion would discard imaginary parts");
    }
    using RU = real_t<U>;
    std::vector<U> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const T x = a[i];
      if constexpr (is_complex_v<T> && is_complex_v<U>)
        out[i] = U(static_cast<RU>(x.real()), static_cast<RU>(x.imag()));
      else if constexpr (is_complex_v<T>)
        out[i] = static_cast<U>(x.real());
      else if constexpr (is_complex_v<U>)
        out[i] = U(static_cast<RU>(x), RU{0});
      else
        out[i] = static_cast<U>(x);
    }
    return DenseTensor<U>(a.shape(), std::move(out));
  }
}

}  // namespace qttn
