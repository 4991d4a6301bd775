#include "qttn/tensor/tensor.hpp"

#include <istream>
#include <ostream>
#include <random>

#include "qttn/tensor/binary_io.hpp"

namespace qttn {

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::reference ? "reference" : "optimized";
}

BackendKind backend_from_string(std::string_view name) {
  if (name == "reference") return BackendKind::reference;
  if (name == "optimized") return BackendKind::optimized;
  throw ArgumentError("unknown backend '" + std::string(name) + "'");
}

Precision precision_from_char(char c) {
  switch (c) {
    case 'S': return Precision::S;
    case 'C': return Precision::C;
    case 'D': return Precision::D;
    case 'Z': return Precision::Z;
    default: throw ArgumentError(std::string("unknown precision '") + c + "'");
  }
}

namespace {

void require_same_precision(const Tensor& a, const Tensor& b) {
  if (a.precision() != b.precision())
    throw PrecisionError(std::string("precision mismatch: ") + to_char(a.precision()) + " vs " + to_char(b.precision()));
}

template <typename F>
auto visit_dense(const Tensor& t, F&& f) {
  return std::visit(std::forward<F>(f), t.storage());
}

}  // namespace

Tensor contract(const Tensor& a, const Tensor& b, const Axes& axes_a, const Axes& axes_b) {
  require_same_precision(a, b);
  return visit_dense(a, [&](const auto& da) {
    using T = typename std::decay_t<decltype(da)>::value_type;
    return Tensor(contract(da, b.as<T>(), axes_a, axes_b, a.backend()), a.backend());
  });
}

Tensor permute(const Tensor& a, const Axes& order) {
  return visit_dense(a, [&](const auto& da) { return Tensor(permute(da, order, a.backend()), a.backend()); });
}

Tensor fuse(const Tensor& a, const std::vector<Axes>& groups) {
  return visit_dense(a, [&](const auto& da) { return Tensor(fuse(da, groups), a.backend()); });
}

Tensor split(const Tensor& a, std::size_t axis, const Shape& dims) {
  return visit_dense(a, [&](const auto& da) { return Tensor(split(da, axis, dims), a.backend()); });
}

SvdResult svd(const Tensor& a, const Axes& left_axes, const Axes& right_axes, std::size_t max_rank, double cutoff,
              SvdAlgorithm algorithm) {
  if (max_rank < 1) throw ArgumentError("svd: max_rank must be >= 1");
  if (!(cutoff >= 0.0)) throw ArgumentError("svd: cutoff must be >= 0");
  TruncationParams params{max_rank, cutoff, 0};
  return visit_dense(a, [&](const auto& da) {
    auto parts = svd_split(da, left_axes, right_axes, params, algorithm, a.backend());
    SvdResult out;
    out.u = Tensor(std::move(parts.left), a.backend());
    out.v = Tensor(std::move(parts.right), a.backend());
    out.singular_values = std::move(parts.s);
    out.truncation_error = parts.truncation_error;
    out.kept_rank = parts.kept_rank;
    return out;
  });
}

QrResult qr(const Tensor& a, const Axes& left_axes, const Axes& right_axes) {
  return visit_dense(a, [&](const auto& da) {
    auto [q, r] = qr_split(da, left_axes, right_axes, a.backend());
    return QrResult{Tensor(std::move(q), a.backend()), Tensor(std::move(r), a.backend())};
  });
}

EighResult eigh(const Tensor& a) {
  if (a.rank() == 0 || a.rank() % 2 != 0) throw ShapeError("eigh expects a tensor of even rank");
  const std::size_t half = a.rank() / 2;
  Shape left(a.shape().begin(), a.shape().begin() + static_cast<std::ptrdiff_t>(half));
  const std::size_t rows = shape_size(left);
  const std::size_t cols = a.size() / std::max<std::size_t>(rows, 1);
  if (rows != cols) throw ShapeError("eigh expects a square matricization");
  return visit_dense(a, [&](const auto& da) {
    auto res = eigh_matrix(da.reshaped({rows, cols}));
    left.push_back(rows);
    return EighResult{std::move(res.values), Tensor(res.vectors.reshaped(left), a.backend())};
  });
}

Tensor convert(const Tensor& a, Precision precision) {
  return visit_dense(a, [&](const auto& da) -> Tensor {
    switch (precision) {
      case Precision::S: return Tensor(convert<float>(da), a.backend());
      case Precision::C: return Tensor(convert<cfloat>(da), a.backend());
      case Precision::D: return Tensor(convert<double>(da), a.backend());
      case Precision::Z: return Tensor(convert<cdouble>(da), a.backend());
    }
    throw ArgumentError("unknown precision");
  });
}

Tensor random_tensor(const Shape& shape, Precision precision, std::uint64_t seed, BackendId backend) {
  for (auto d : shape)
    if (d == 0) throw ShapeError("random_tensor: dimensions must be positive");
  std::mt19937_64 rng(seed);
  switch (precision) {
    case Precision::S: return Tensor(random_dense<float>(shape, rng), backend);
    case Precision::C: return Tensor(random_dense<cfloat>(shape, rng), backend);
    case Precision::D: return Tensor(random_dense<double>(shape, rng), backend);
    case Precision::Z: return Tensor(random_dense<cdouble>(shape, rng), backend);
  }
  throw ArgumentError("unknown precision");
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_precision(a, b);
  return visit_dense(a, [&](const auto& da) {
    using T = typename std::decay_t<decltype(da)>::value_type;
    return max_abs_diff(da, b.as<T>());
  });
}

template <Scalar T>
void write_dense(std::ostream& os, const DenseTensor<T>& t) {
  if (t.rank() > 255) throw ArgumentError("rank too large for serialization");
  io::write_magic(os, "QTTN");
  io::write_le<std::uint16_t>(os, kTensorFormatVersion);
  io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(to_char(precision_of<T>())));
  io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.shape()) io::write_le<std::uint64_t>(os, d);
  io::write_scalars<T>(os, t.data());
}

namespace {

struct DenseHeader {
  Precision precision;
  Shape shape;
};

DenseHeader read_dense_header(std::istream& is) {
  io::expect_magic(is, "QTTN");
  const auto version = io::read_le<std::uint16_t>(is);
  if (version != kTensorFormatVersion) throw io::FormatError("unsupported tensor format version " + std::to_string(version));
  DenseHeader h;
  h.precision = precision_from_char(static_cast<char>(io::read_le<std::uint8_t>(is)));
  const auto rank = io::read_le<std::uint8_t>(is);
  h.shape.resize(rank);
  for (auto& d : h.shape) d = io::read_le<std::uint64_t>(is);
  return h;
}

template <Scalar T>
DenseTensor<T> read_payload(std::istream& is, Shape shape) {
  DenseTensor<T> t(std::move(shape));
  io::read_scalars<T>(is, t.data());
  return t;
}

}  // namespace

template <Scalar T>
DenseTensor<T> read_dense(std::istream& is) {
  auto h = read_dense_header(is);
  if (h.precision != precision_of<T>()) throw PrecisionError("serialized tensor has a different precision");
  return read_payload<T>(is, std::move(h.shape));
}

void write_tensor(std::ostream& os, const Tensor& t) {
  visit_dense(t, [&](const auto& d) { write_dense(os, d); });
}

Tensor read_tensor(std::istream& is) {
  auto h = read_dense_header(is);
  switch (h.precision) {
    case Precision::S: return Tensor(read_payload<float>(is, std::move(h.shape)));
    case Precision::C: return Tensor(read_payload<cfloat>(is, std::move(h.shape)));
    case Precision::D: return Tensor(read_payload<double>(is, std::move(h.shape)));
    case Precision::Z: return Tensor(read_payload<cdouble>(is, std::move(h.shape)));
  }
  throw io::FormatError("unknown precision");
}

template void write_dense<float>(std::ostream&, const DenseTensor<float>&);
template void write_dense<double>(std::ostream&, const DenseTensor<double>&);
template void write_dense<cfloat>(std::ostream&, const DenseTensor<cfloat>&);
template void write_dense<cdouble>(std::ostream&, const DenseTensor<cdouble>&);
template DenseTensor<float> read_dense<float>(std::istream&);
template DenseTensor<double> read_dense<double>(std::istream&);
template DenseTensor<cfloat> read_dense<cfloat>(std::istream&);
template DenseTensor<cdouble> read_dense<cdouble>(std::istream&);

}  // namespace qttn
