#pragma once

// Precision-tagged tensor: the runtime face of the dense backends. Every
// operation requires matching precisions; conversions are explicit.

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "qttn/tensor/decompose.hpp"
#include "qttn/tensor/dense.hpp"
#include "qttn/tensor/linalg.hpp"

namespace qttn {

class Tensor {
 public:
  using Storage = std::variant<DenseTensor<float>, DenseTensor<cfloat>, DenseTensor<double>, DenseTensor<cdouble>>;

  Tensor() : storage_(DenseTensor<double>()) {}

  template <Scalar T>
  explicit Tensor(DenseTensor<T> t, BackendId backend = {}) : storage_(std::move(t)), backend_(backend) {}

  Precision precision() const { return static_cast<Precision>(storage_.index()); }
  const BackendId& backend() const { return backend_; }
  Tensor with_backend(BackendId backend) const {
    Tensor t = *this;
    t.backend_ = backend;
    return t;
  }

  const Shape& shape() const {
    return std::visit([](const auto& t) -> const Shape& { return t.shape(); }, storage_);
  }
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const {
    return std::visit([](const auto& t) { return t.size(); }, storage_);
  }
  double norm() const {
    return std::visit([](const auto& t) { return qttn::norm(t); }, storage_);
  }

  template <Scalar T>
  const DenseTensor<T>& as() const {
    if (precision() != precision_of<T>())
      throw PrecisionError(std::string("tensor has precision ") + to_char(precision()));
    return std::get<DenseTensor<T>>(storage_);
  }

  const Storage& storage() const { return storage_; }

 private:
  Storage storage_;
  BackendId backend_{};
};

static_assert(static_cast<int>(Precision::S) == 0 && static_cast<int>(Precision::C) == 1 &&
              static_cast<int>(Precision::D) == 2 && static_cast<int>(Precision::Z) == 3);

struct SvdResult {
  Tensor u;
  std::vector<double> singular_values;
  Tensor v;
  double truncation_error = 0.0;
  std::size_t kept_rank = 0;
};

struct QrResult {
  Tensor q;
  Tensor r;
};

struct EighResult {
  std::vector<double> eigenvalues;
  Tensor eigenvectors;
};

Tensor contract(const Tensor& a, const Tensor& b, const Axes& axes_a, const Axes& axes_b);
Tensor permute(const Tensor& a, const Axes& order);
Tensor fuse(const Tensor& a, const std::vector<Axes>& groups);
Tensor split(const Tensor& a, std::size_t axis, const Shape& dims);

/// U: (left dims..., k), V: (k, right dims...). Zero input yields k = 1 with
/// singular value 0 and orthonormal but otherwise arbitrary factors.
SvdResult svd(const Tensor& a, const Axes& left_axes, const Axes& right_axes, std::size_t max_rank,
              double cutoff = kDefaultSvdCutoff, SvdAlgorithm algorithm = SvdAlgorithm::direct);
QrResult qr(const Tensor& a, const Axes& left_axes, const Axes& right_axes);
/// Rank-2k tensors are matricized as (first k axes) x (last k axes).
EighResult eigh(const Tensor& a);

Tensor convert(const Tensor& a, Precision precision);
Tensor random_tensor(const Shape& shape, Precision precision, std::uint64_t seed, BackendId backend = {});

double max_abs_diff(const Tensor& a, const Tensor& b);

/// "QTTN" | version u16 | precision tag u8 | rank u8 | dims u64... | elements (little endian)
inline constexpr std::uint16_t kTensorFormatVersion = 1;

void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

template <Scalar T>
void write_dense(std::ostream& os, const DenseTensor<T>& t);
template <Scalar T>
DenseTensor<T> read_dense(std::istream& is);

}  // namespace qttn
