#pragma once

// The small operation set the tree algorithms need, overloaded for dense
// and Z2 block-sparse tensors so that state, environment and solver code is
// written once.

#include <random>
#include <type_traits>

#include "qttn/symmetry/z2_tensor.hpp"
#include "qttn/tensor/decompose.hpp"
#include "qttn/tensor/dense.hpp"

namespace qttn {

template <typename Ten>
struct is_z2_tensor : std::false_type {};
template <Scalar T>
struct is_z2_tensor<Z2Tensor<T>> : std::true_type {};
template <typename Ten>
inline constexpr bool is_z2_tensor_v = is_z2_tensor<Ten>::value;

template <typename Ten>
concept NodeTensor = requires { typename Ten::value_type; } &&
                     (std::is_same_v<Ten, DenseTensor<typename Ten::value_type>> ||
                      std::is_same_v<Ten, Z2Tensor<typename Ten::value_type>>);

/// Same tensor family with scalar U.
template <typename Ten, Scalar U>
struct rebind_scalar;
template <Scalar T, Scalar U>
struct rebind_scalar<DenseTensor<T>, U> {
  using type = DenseTensor<U>;
};
template <Scalar T, Scalar U>
struct rebind_scalar<Z2Tensor<T>, U> {
  using type = Z2Tensor<U>;
};
template <typename Ten, Scalar U>
using rebind_scalar_t = typename rebind_scalar<Ten, U>::type;

namespace ops {

/// Order placing the last axis of a rank-r tensor at position `leg`.
inline Axes move_last_to(std::size_t r, std::size_t leg) {
  Axes order;
  for (std::size_t i = 0, k = 0; i < r; ++i) order.push_back(i == leg ? r - 1 : k++);
  return order;
}

/// Order placing axis 0 at position `leg`.
inline Axes move_first_to(std::size_t r, std::size_t leg) {
  Axes order;
  for (std::size_t i = 0, k = 1; i < r; ++i) order.push_back(i == leg ? 0 : k++);
  return order;
}

inline Axes all_but(std::size_t r, std::size_t leg) {
  Axes a;
  for (std::size_t i = 0; i < r; ++i)
    if (i != leg) a.push_back(i);
  return a;
}

/// out = M applied to leg `leg` of t, M indexed [out, in].
template <Scalar T>
DenseTensor<T> apply_on_leg(const DenseTensor<T>& t, const DenseTensor<T>& m, std::size_t leg, const BackendId& be) {
  if (m.rank() != 2 || leg >= t.rank() || m.dim(1) != t.dim(leg)) throw ShapeError("apply_on_leg: dimension mismatch");
  const std::size_t dout = m.dim(0), din = m.dim(1);
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < leg; ++i) outer *= t.dim(i);
  for (std::size_t i = leg + 1; i < t.rank(); ++i) inner *= t.dim(i);
  Shape shape = t.shape();
  shape[leg] = dout;
  DenseTensor<T> out(shape);
  if (inner == 1) {
    // out(outer x dout) = t(outer x din) * M^T
    DenseTensor<T> mt({din, dout});
    for (std::size_t i = 0; i < dout; ++i)
      for (std::size_t j = 0; j < din; ++j) mt[j * dout + i] = m[i * din + j];
    kernels::gemm(be, outer, dout, din, t.raw(), mt.raw(), out.raw());
  } else {
    for (std::size_t o = 0; o < outer; ++o)
      kernels::gemm(be, dout, inner, din, m.raw(), t.raw() + o * din * inner, out.raw() + o * dout * inner);
  }
  return out;
}

template <Scalar T>
Z2Tensor<T> apply_on_leg(const Z2Tensor<T>& t, const Z2Tensor<T>& m, std::size_t leg, const BackendId& be) {
  auto r = bcontract(m, t, {1}, {leg}, be);
  return leg == 0 ? r : permute(r, move_first_to(t.rank(), leg), be);
}

/// Split of a tensor across one leg: t = iso (new bond at `leg`) x carry,
/// with carry indexed [bond, old leg] ready for apply_on_leg on the neighbor.
template <typename Ten>
struct BondSplit {
  Ten iso;
  Ten carry;
  std::vector<double> s;
  double truncation_error = 0.0;
  std::size_t kept_rank = 0;
};

template <Scalar T>
BondSplit<DenseTensor<T>> split_svd(const DenseTensor<T>& t, std::size_t leg, const TruncationParams& params,
                                    SvdAlgorithm alg, const BackendId& be) {
  auto parts = svd_split(t, all_but(t.rank(), leg), {leg}, params, alg, be);
  BondSplit<DenseTensor<T>> out;
  out.iso = leg + 1 == t.rank() ? std::move(parts.left) : permute(parts.left, move_last_to(t.rank(), leg), be);
  scale_axis(parts.right, 0, parts.s);
  out.carry = std::move(parts.right);
  out.s = std::move(parts.s);
  out.truncation_error = parts.truncation_error;
  out.kept_rank = parts.kept_rank;
  return out;
}

template <Scalar T>
BondSplit<Z2Tensor<T>> split_svd(const Z2Tensor<T>& t, std::size_t leg, const TruncationParams& params,
                                 SvdAlgorithm alg, const BackendId& be) {
  auto parts = svd_split(t, all_but(t.rank(), leg), {leg}, params, alg, be, t.link(leg).direction);
  std::array<std::vector<double>, 2> per_charge;
  for (std::size_t i = 0; i < parts.s.size(); ++i) per_charge[parts.s_charges[i]].push_back(parts.s[i]);
  for (auto& [key, blk] : parts.right.mutable_blocks()) scale_axis(blk, 0, per_charge[key[0]]);
  BondSplit<Z2Tensor<T>> out;
  out.iso = leg + 1 == t.rank() ? std::move(parts.left) : permute(parts.left, move_last_to(t.rank(), leg), be);
  out.carry = std::move(parts.right);
  out.s = std::move(parts.s);
  out.truncation_error = parts.truncation_error;
  out.kept_rank = parts.kept_rank;
  return out;
}

template <Scalar T>
BondSplit<DenseTensor<T>> split_qr(const DenseTensor<T>& t, std::size_t leg, const BackendId& be) {
  auto [q, r] = qr_split(t, all_but(t.rank(), leg), {leg}, be);
  BondSplit<DenseTensor<T>> out;
  out.kept_rank = q.dim(q.rank() - 1);
  out.iso = leg + 1 == t.rank() ? std::move(q) : permute(q, move_last_to(t.rank(), leg), be);
  out.carry = std::move(r);
  return out;
}

template <Scalar T>
BondSplit<Z2Tensor<T>> split_qr(const Z2Tensor<T>& t, std::size_t leg, const BackendId& be) {
  auto [q, r] = qr_split(t, all_but(t.rank(), leg), {leg}, be, t.link(leg).direction);
  BondSplit<Z2Tensor<T>> out;
  out.kept_rank = q.dim(q.rank() - 1);
  out.iso = leg + 1 == t.rank() ? std::move(q) : permute(q, move_last_to(t.rank(), leg), be);
  out.carry = std::move(r);
  return out;
}

/// <a|b> contracted over every leg except `leg`: result[k', k] = sum conj(a)[.., k', ..] b[.., k, ..].
template <typename Ten>
Ten environment_overlap(const Ten& a, const Ten& b, std::size_t leg, const BackendId& be) {
  const auto others = all_but(a.rank(), leg);
  return contract(conj(a), b, others, others, be);
}

template <Scalar T>
DenseTensor<T> zeros_like(const DenseTensor<T>& t) {
  return DenseTensor<T>(t.shape());
}

template <Scalar T>
Z2Tensor<T> zeros_like(const Z2Tensor<T>& t) {
  return Z2Tensor<T>::zeros(t.links(), t.flux());
}

template <Scalar T, typename Rng>
DenseTensor<T> random_like(const DenseTensor<T>& t, Rng& rng) {
  return random_dense<T>(t.shape(), rng);
}

template <Scalar T, typename Rng>
Z2Tensor<T> random_like(const Z2Tensor<T>& t, Rng& rng) {
  return random_z2<T>(t.links(), t.flux(), rng);
}

/// Number of free parameters (dense elements or stored block elements of a full tensor).
template <Scalar T>
std::size_t degrees_of_freedom(const DenseTensor<T>& t) {
  return t.size();
}

template <Scalar T>
std::size_t degrees_of_freedom(const Z2Tensor<T>& t) {
  return zeros_like(t).stored_elements();
}

template <Scalar T>
DenseTensor<T> to_dense(const DenseTensor<T>& t) {
  return t;
}

template <Scalar T>
DenseTensor<T> to_dense(const Z2Tensor<T>& t) {
  return densify(t);
}

template <Scalar U, Scalar T>
DenseTensor<U> convert_tensor(const DenseTensor<T>& t) {
  return convert<U>(t);
}

template <Scalar U, Scalar T>
Z2Tensor<U> convert_tensor(const Z2Tensor<T>& t) {
  return convert<U>(t);
}

template <Scalar T>
double isometry_error(const DenseTensor<T>& t, std::size_t leg, const BackendId& be) {
  return isometry_deviation(t, leg, be);
}

template <Scalar T>
double isometry_error(const Z2Tensor<T>& t, std::size_t leg, const BackendId& be) {
  return isometry_deviation(t, leg, be);
}

}  // namespace ops
}  // namespace qttn
