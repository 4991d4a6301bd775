#pragma once

// Tensor-level decompositions: matricize over a (left | right) axis
// partition, decompose, and fold the factors back into tensors.

#include <utility>

#include "qttn/tensor/dense.hpp"
#include "qttn/tensor/linalg.hpp"

namespace qttn {

namespace detail {

inline void check_partition(const Axes& left, const Axes& right, std::size_t rank) {
  if (left.size() + right.size() != rank) throw ArgumentError("axis partition does not cover the tensor");
  std::vector<bool> seen(rank, false);
  for (const Axes* part : {&left, &right})
    for (auto ax : *part) {
      if (ax >= rank || seen[ax]) throw ArgumentError("invalid axis partition");
      seen[ax] = true;
    }
}

template <Scalar T>
struct Matricized {
  DenseTensor<T> matrix;
  Shape left_dims;
  Shape right_dims;
};

template <Scalar T>
Matricized<T> matricize(const DenseTensor<T>& a, const Axes& left, const Axes& right, const BackendId& backend) {
  check_partition(left, right, a.rank());
  Axes order = left;
  order.insert(order.end(), right.begin(), right.end());
  Matricized<T> out;
  std::size_t rows = 1, cols = 1;
  for (auto ax : left) {
    out.left_dims.push_back(a.dim(ax));
    rows *= a.dim(ax);
  }
  for (auto ax : right) {
    out.right_dims.push_back(a.dim(ax));
    cols *= a.dim(ax);
  }
  out.matrix = permute(a, order, backend).reshaped({rows, cols});
  return out;
}

inline Shape with_trailing(Shape dims, std::size_t last) {
  dims.push_back(last);
  return dims;
}

inline Shape with_leading(std::size_t first, const Shape& dims) {
  Shape out{first};
  out.insert(out.end(), dims.begin(), dims.end());
  return out;
}

}  // namespace detail

/// left: (left dims..., k) isometry; right: (k, right dims...); `s` holds
/// the kept singular values and is not absorbed into either factor.
template <Scalar T>
struct DenseSvdSplit {
  DenseTensor<T> left;
  std::vector<double> s;
  DenseTensor<T> right;
  double truncation_error = 0.0;
  std::size_t kept_rank = 0;
};

template <Scalar T>
DenseSvdSplit<T> svd_split(const DenseTensor<T>& a, const Axes& left, const Axes& right,
                           const TruncationParams& params, SvdAlgorithm algorithm,
                           const BackendId& backend = {}) {
  auto mat = detail::matricize(a, left, right, backend);
  auto svd = svd_truncated(mat.matrix, params, algorithm, backend);
  DenseSvdSplit<T> out;
  out.kept_rank = svd.kept_rank;
  out.truncation_error = svd.truncation_error;
  out.s = std::move(svd.s);
  out.left = svd.u.reshaped(detail::with_trailing(mat.left_dims, out.kept_rank));
  out.right = svd.v.reshaped(detail::with_leading(out.kept_rank, mat.right_dims));
  return out;
}

/// Q: (left dims..., k) isometry, R: (k, right dims...).
template <Scalar T>
std::pair<DenseTensor<T>, DenseTensor<T>> qr_split(const DenseTensor<T>& a, const Axes& left, const Axes& right,
                                                   const BackendId& backend = {}) {
  auto mat = detail::matricize(a, left, right, backend);
  auto qr = qr_matrix(mat.matrix);
  const std::size_t k = qr.q.dim(1);
  return {qr.q.reshaped(detail::with_trailing(mat.left_dims, k)),
          qr.r.reshaped(detail::with_leading(k, mat.right_dims))};
}

/// Scales slice i of axis `axis` by s[i].
template <Scalar T>
void scale_axis(DenseTensor<T>& a, std::size_t axis, std::span<const double> s) {
  if (a.dim(axis) != s.size()) throw ShapeError("scale_axis: length mismatch");
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < a.rank(); ++i) inner *= a.dim(i);
  const std::size_t block = inner * s.size();
  if (block == 0) return;
  const std::size_t outer = a.size() / block;
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto f = static_cast<real_t<T>>(s[k]);
      T* p = a.raw() + (o * s.size() + k) * inner;
      for (std::size_t i = 0; i < inner; ++i) p[i] *= f;
    }
}

/// Deviation of `a` from being an isometry from all axes except `axis` onto `axis`.
template <Scalar T>
double isometry_deviation(const DenseTensor<T>& a, std::size_t axis, const BackendId& backend = {}) {
  Axes others;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (i != axis) others.push_back(i);
  const auto gram = contract(conj(a), a, others, others, backend);
  return max_abs_diff(gram, DenseTensor<T>::identity(a.dim(axis)));
}

}  // namespace qttn
