#pragma once

// Matrix decompositions on rank-2 DenseTensors. Implemented with Eigen in
// linalg.cpp and instantiated for the four scalar kinds.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "qttn/tensor/dense.hpp"

namespace qttn {

enum class SvdAlgorithm { direct, via_eigh };

std::string_view to_string(SvdAlgorithm algorithm);
SvdAlgorithm svd_algorithm_from_string(std::string_view name);

inline constexpr double kDefaultSvdCutoff = 1e-9;

struct TruncationParams {
  std::size_t max_rank = std::numeric_limits<std::size_t>::max();
  /// Keep s_i with s_i / s_1 > cutoff.
  double cutoff = kDefaultSvdCutoff;
  /// When non-zero, the kept rank is rounded up to a multiple of this many
  /// entries, capped at the available rank and at max_rank.
  std::size_t tile_entries = 0;
};

/// Kept rank for singular values sorted non-increasing. Always >= 1 when
/// at least one value is available.
std::size_t choose_rank(std::span<const double> singular_values, const TruncationParams& params);

/// sqrt of the sum of squares of s[kept:].
double discarded_weight(std::span<const double> singular_values, std::size_t kept);

/// Thin SVD of an m x n matrix: u is m x k, v is k x n, k = min(m, n).
template <Scalar T>
struct MatrixSvd {
  DenseTensor<T> u;
  std::vector<double> s;
  DenseTensor<T> v;
};

template <Scalar T>
MatrixSvd<T> svd_full(const DenseTensor<T>& matrix, SvdAlgorithm algorithm, const BackendId& backend);

/// Thin SVD truncated per `params`.
template <Scalar T>
struct TruncatedSvd {
  DenseTensor<T> u;
  std::vector<double> s;
  DenseTensor<T> v;
  double truncation_error = 0.0;
  std::size_t kept_rank = 0;
};

template <Scalar T>
TruncatedSvd<T> svd_truncated(const DenseTensor<T>& matrix, const TruncationParams& params,
                              SvdAlgorithm algorithm, const BackendId& backend);

/// Keeps the first `kept` singular triplets.
template <Scalar T>
TruncatedSvd<T> truncate_svd(const MatrixSvd<T>& full, std::size_t kept);

template <Scalar T>
struct MatrixQr {
  DenseTensor<T> q;  // m x k, orthonormal columns
  DenseTensor<T> r;  // k x n, upper triangular
};

template <Scalar T>
MatrixQr<T> qr_matrix(const DenseTensor<T>& matrix);

template <Scalar T>
struct MatrixEigh {
  std::vector<double> values;  // ascending
  DenseTensor<T> vectors;      // columns are eigenvectors
};

/// Hermitian eigendecomposition. Throws ArgumentError if the matrix is not
/// Hermitian within 1e-10 (double kinds) or 1e-5 (single kinds), relative
/// to max(1, max|a_ij|).
template <Scalar T>
MatrixEigh<T> eigh_matrix(const DenseTensor<T>& matrix);

/// max |A - A^H|
template <Scalar T>
double hermitian_deviation(const DenseTensor<T>& matrix);

/// max |Q^H Q - I| over a matrix with (at least) as many rows as columns.
template <Scalar T>
double column_isometry_deviation(const DenseTensor<T>& q, const BackendId& backend = {});

}  // namespace qttn
