#define EIGEN_DONT_PARALLELIZE
#include "qttn/tensor/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace qttn {

std::string_view to_string(SvdAlgorithm algorithm) {
  return algorithm == SvdAlgorithm::direct ? "direct" : "via_eigh";
}

SvdAlgorithm svd_algorithm_from_string(std::string_view name) {
  if (name == "direct") return SvdAlgorithm::direct;
  if (name == "via_eigh") return SvdAlgorithm::via_eigh;
  throw ArgumentError("unknown svd algorithm '" + std::string(name) + "'");
}

std::size_t choose_rank(std::span<const double> s, const TruncationParams& params) {
  if (s.empty()) return 0;
  if (params.max_rank == 0) throw ArgumentError("max_rank must be >= 1");
  if (!(params.cutoff >= 0.0)) throw ArgumentError("cutoff must be >= 0");
  std::size_t natural = 1;
  if (s[0] > 0.0) {
    natural = 0;
    while (natural < s.size() && s[natural] / s[0] > params.cutoff) ++natural;
    natural = std::max<std::size_t>(1, std::min(natural, params.max_rank));
  }
  if (params.tile_entries == 0) return natural;
  const std::size_t tile = params.tile_entries;
  std::size_t kept = (natural + tile - 1) / tile * tile;
  kept = std::min({kept, s.size(), params.max_rank});
  return std::max(kept, natural);
}

double discarded_weight(std::span<const double> s, std::size_t kept) {
  double sum = 0.0;
  for (std::size_t i = kept; i < s.size(); ++i) sum += s[i] * s[i];
  return std::sqrt(sum);
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <Scalar T>
Eigen::Map<const RowMat<T>> as_matrix(const DenseTensor<T>& m) {
  return {m.raw(), static_cast<Eigen::Index>(m.dim(0)), static_cast<Eigen::Index>(m.dim(1))};
}

template <Scalar T, typename Derived>
DenseTensor<T> from_eigen(const Eigen::MatrixBase<Derived>& m) {
  DenseTensor<T> out({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMat<T>>(out.raw(), m.rows(), m.cols()) = m;
  return out;
}

template <Scalar T>
void require_matrix(const DenseTensor<T>& m, const char* what) {
  if (m.rank() != 2) throw ShapeError(std::string(what) + " expects a rank-2 tensor");
  if (!all_finite(m)) throw NumericError(std::string(what) + ": non-finite input");
}

/// Orthonormalises the columns of q (m x k, m >= k) in place with two passes
/// of modified Gram-Schmidt. Columns that collapse are replaced by unit
/// vectors orthogonalised against the previous ones.
template <Scalar T>
void orthonormalize_columns(DenseTensor<T>& q) {
  const std::size_t m = q.dim(0), k = q.dim(1);
  std::vector<T> col(m);
  std::size_t next_unit = 0;
  auto load = [&](std::size_t j) {
    for (std::size_t i = 0; i < m; ++i) col[i] = q[i * k + j];
  };
  auto store = [&](std::size_t j) {
    for (std::size_t i = 0; i < m; ++i) q[i * k + j] = col[i];
  };
  auto project_out = [&](std::size_t j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < j; ++p) {
        T proj{};
        for (std::size_t i = 0; i < m; ++i) proj = mul_add(proj, conj_value(q[i * k + p]), col[i]);
        for (std::size_t i = 0; i < m; ++i) col[i] -= mul(proj, q[i * k + p]);
      }
    }
  };
  auto col_norm = [&] {
    double sum = 0.0;
    for (const auto& x : col) sum += static_cast<double>(abs2(x));
    return std::sqrt(sum);
  };
  for (std::size_t j = 0; j < k; ++j) {
    load(j);
    const double before = col_norm();
    project_out(j);
    double nrm = col_norm();
    if (before == 0.0 || nrm <= 1e-3 * before) {
      do {
        if (next_unit >= m) throw NumericError("orthonormal completion failed");
        std::fill(col.begin(), col.end(), T{});
        col[next_unit++] = T{1};
        project_out(j);
        nrm = col_norm();
      } while (nrm <= 0.5);
    }
    const auto inv = static_cast<real_t<T>>(1.0 / nrm);
    for (auto& x : col) x *= inv;
    store(j);
  }
}

template <Scalar T>
MatrixSvd<T> svd_direct(const DenseTensor<T>& a) {
  const auto view = as_matrix(a);
  Eigen::BDCSVD<RowMat<T>> solver(view, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) throw NumericError("svd did not converge");
  MatrixSvd<T> out;
  out.u = from_eigen<T>(solver.matrixU());
  out.v = from_eigen<T>(solver.matrixV().adjoint());
  const auto& sv = solver.singularValues();
  out.s.resize(static_cast<std::size_t>(sv.size()));
  for (Eigen::Index i = 0; i < sv.size(); ++i) out.s[static_cast<std::size_t>(i)] = static_cast<double>(sv[i]);
  return out;
}

// Gram matrix on the smaller side, Hermitian eigendecomposition, then the
// other factor from the input. Negative eigenvalues from rounding clamp to 0.
template <Scalar T>
MatrixSvd<T> svd_via_eigh(const DenseTensor<T>& a, const BackendId& backend) {
  const std::size_t m = a.dim(0), n = a.dim(1);
  const bool tall = m >= n;
  const DenseTensor<T> a_h = adjoint(a, backend);
  const DenseTensor<T> gram = tall ? contract(a_h, a, {1}, {0}, backend) : contract(a, a_h, {1}, {0}, backend);
  Eigen::SelfAdjointEigenSolver<RowMat<T>> solver(as_matrix(gram));
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  const std::size_t k = std::min(m, n);
  const auto& evals = solver.eigenvalues();
  const auto& evecs = solver.eigenvectors();
  MatrixSvd<T> out;
  out.s.resize(k);
  DenseTensor<T> w({k == 0 ? 0 : (tall ? n : m), k});
  for (std::size_t j = 0; j < k; ++j) {
    const auto src = static_cast<Eigen::Index>(k - 1 - j);  // descending
    out.s[j] = std::sqrt(std::max(0.0, static_cast<double>(evals[src])));
    for (std::size_t i = 0; i < w.dim(0); ++i) w[i * k + j] = evecs(static_cast<Eigen::Index>(i), src);
  }
  // other = a^H w / s (tall: u = a v / s; wide: v^H = a^H u / s)
  DenseTensor<T> other = tall ? contract(a, w, {1}, {0}, backend) : contract(a_h, w, {1}, {0}, backend);
  const std::size_t rows = other.dim(0);
  for (std::size_t j = 0; j < k; ++j) {
    const double sj = out.s[j];
    const auto inv = sj > 0.0 ? static_cast<real_t<T>>(1.0 / sj) : real_t<T>{0};
    for (std::size_t i = 0; i < rows; ++i) other[i * k + j] *= inv;
  }
  orthonormalize_columns(other);
  if (tall) {
    out.u = std::move(other);
    out.v = adjoint(w, backend);
  } else {
    out.u = std::move(w);
    out.v = adjoint(other, backend);
  }
  return out;
}

}  // namespace

template <Scalar T>
MatrixSvd<T> svd_full(const DenseTensor<T>& matrix, SvdAlgorithm algorithm, const BackendId& backend) {
  require_matrix(matrix, "svd");
  if (algorithm == SvdAlgorithm::direct) return svd_direct(matrix);
  return svd_via_eigh(matrix, backend);
}

template <Scalar T>
TruncatedSvd<T> truncate_svd(const MatrixSvd<T>& full, std::size_t kept) {
  const std::size_t m = full.u.dim(0), k = full.s.size(), n = full.v.dim(1);
  if (kept > k) throw ArgumentError("cannot keep more singular values than available");
  TruncatedSvd<T> out;
  out.kept_rank = kept;
  out.truncation_error = discarded_weight(full.s, kept);
  out.s.assign(full.s.begin(), full.s.begin() + static_cast<std::ptrdiff_t>(kept));
  out.u = DenseTensor<T>({m, kept});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < kept; ++j) out.u[i * kept + j] = full.u[i * k + j];
  out.v = DenseTensor<T>({kept, n});
  std::copy_n(full.v.raw(), kept * n, out.v.raw());
  return out;
}

template <Scalar T>
TruncatedSvd<T> svd_truncated(const DenseTensor<T>& matrix, const TruncationParams& params,
                              SvdAlgorithm algorithm, const BackendId& backend) {
  const auto full = svd_full(matrix, algorithm, backend);
  return truncate_svd(full, choose_rank(full.s, params));
}

template <Scalar T>
MatrixQr<T> qr_matrix(const DenseTensor<T>& matrix) {
  require_matrix(matrix, "qr");
  const auto view = as_matrix(matrix);
  const Eigen::Index m = view.rows(), n = view.cols(), k = std::min(m, n);
  Eigen::HouseholderQR<RowMat<T>> solver(view);
  RowMat<T> q = solver.householderQ() * RowMat<T>::Identity(m, k);
  RowMat<T> r = solver.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  return {from_eigen<T>(q), from_eigen<T>(r)};
}

template <Scalar T>
double hermitian_deviation(const DenseTensor<T>& matrix) {
  if (matrix.rank() != 2 || matrix.dim(0) != matrix.dim(1)) throw ShapeError("expected a square matrix");
  const std::size_t n = matrix.dim(0);
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      dev = std::max(dev, static_cast<double>(std::abs(matrix[i * n + j] - conj_value(matrix[j * n + i]))));
  return dev;
}

template <Scalar T>
MatrixEigh<T> eigh_matrix(const DenseTensor<T>& matrix) {
  require_matrix(matrix, "eigh");
  if (matrix.dim(0) != matrix.dim(1)) throw ShapeError("eigh expects a square matrix");
  double scale = 1.0;
  for (const auto& x : matrix.data()) scale = std::max(scale, static_cast<double>(std::abs(x)));
  const double tol = is_double_precision(precision_of<T>()) ? 1e-10 : 1e-5;
  if (hermitian_deviation(matrix) > tol * scale) throw ArgumentError("eigh: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<RowMat<T>> solver(as_matrix(matrix));
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  MatrixEigh<T> out;
  const auto& ev = solver.eigenvalues();
  out.values.resize(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.values[static_cast<std::size_t>(i)] = static_cast<double>(ev[i]);
  out.vectors = from_eigen<T>(solver.eigenvectors());
  return out;
}

template <Scalar T>
double column_isometry_deviation(const DenseTensor<T>& q, const BackendId& backend) {
  const auto gram = contract(conj(q), q, {0}, {0}, backend);
  return max_abs_diff(gram, DenseTensor<T>::identity(q.dim(1)));
}

#define QTTN_INSTANTIATE_LINALG(T)                                                                \
  template MatrixSvd<T> svd_full<T>(const DenseTensor<T>&, SvdAlgorithm, const BackendId&);       \
  template TruncatedSvd<T> svd_truncated<T>(const DenseTensor<T>&, const TruncationParams&,       \
                                            SvdAlgorithm, const BackendId&);                      \
  template TruncatedSvd<T> truncate_svd<T>(const MatrixSvd<T>&, std::size_t);                     \
  template MatrixQr<T> qr_matrix<T>(const DenseTensor<T>&);                                       \
  template MatrixEigh<T> eigh_matrix<T>(const DenseTensor<T>&);                                   \
  template double hermitian_deviation<T>(const DenseTensor<T>&);                                  \
  template double column_isometry_deviation<T>(const DenseTensor<T>&, const BackendId&);

QTTN_INSTANTIATE_LINALG(float)
QTTN_INSTANTIATE_LINALG(double)
QTTN_INSTANTIATE_LINALG(cfloat)
QTTN_INSTANTIATE_LINALG(cdouble)

#undef QTTN_INSTANTIATE_LINALG

}  // namespace qttn
