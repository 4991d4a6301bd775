#include "qttn/tensor/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace qttn::kernels {

namespace {

std::vector<std::size_t> row_major_strides(std::span<const std::size_t> dims) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) strides[i - 1] = strides[i] * dims[i];
  return strides;
}

bool is_identity(std::span<const std::size_t> order) {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] != i) return false;
  return true;
}

std::size_t product(std::span<const std::size_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

namespace reference {

template <Scalar T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T sum{};
      for (std::size_t p = 0; p < k; ++p) sum = mul_add(sum, a[i * k + p], b[p * n + j]);
      c[i * n + j] = sum;
    }
  }
}

template <Scalar T>
void permute(std::span<const std::size_t> dims, std::span<const std::size_t> order, const T* in,
             T* out) {
  const std::size_t rank = dims.size();
  const std::size_t total = product(dims);
  if (total == 0) return;
  const auto in_strides = row_major_strides(dims);
  std::vector<std::size_t> out_dims(rank), step(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    out_dims[i] = dims[order[i]];
    step[i] = in_strides[order[i]];
  }
  std::vector<std::size_t> counter(rank, 0);
  std::size_t offset = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    out[idx] = in[offset];
    for (std::size_t ax = rank; ax-- > 0;) {
      if (++counter[ax] < out_dims[ax]) {
        offset += step[ax];
        break;
      }
      offset -= step[ax] * (out_dims[ax] - 1);
      counter[ax] = 0;
    }
  }
}

}  // namespace reference

namespace omp {

namespace {

constexpr std::size_t kRowBlock = 64;
constexpr std::size_t kColBlock = 256;
constexpr std::size_t kDepthBlock = 128;

template <Scalar T>
void tile_kernel(std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1, std::size_t n,
                 std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t p0 = 0; p0 < k; p0 += kDepthBlock) {
    const std::size_t p1 = std::min(k, p0 + kDepthBlock);
    std::size_t i = i0;
    for (; i + 4 <= i1; i += 4) {
      T* __restrict c0 = c + (i + 0) * n;
      T* __restrict c1 = c + (i + 1) * n;
      T* __restrict c2 = c + (i + 2) * n;
      T* __restrict c3 = c + (i + 3) * n;
      for (std::size_t p = p0; p < p1; ++p) {
        const T a0 = a[(i + 0) * k + p];
        const T a1 = a[(i + 1) * k + p];
        const T a2 = a[(i + 2) * k + p];
        const T a3 = a[(i + 3) * k + p];
        const T* __restrict bp = b + p * n;
        for (std::size_t j = j0; j < j1; ++j) {
          const T bv = bp[j];
          c0[j] = mul_add(c0[j], a0, bv);
          c1[j] = mul_add(c1[j], a1, bv);
          c2[j] = mul_add(c2[j], a2, bv);
          c3[j] = mul_add(c3[j], a3, bv);
        }
      }
    }
    for (; i < i1; ++i) {
      T* __restrict ci = c + i * n;
      for (std::size_t p = p0; p < p1; ++p) {
        const T av = a[i * k + p];
        const T* __restrict bp = b + p * n;
        for (std::size_t j = j0; j < j1; ++j) ci[j] = mul_add(ci[j], av, bp[j]);
      }
    }
  }
}

}  // namespace

template <Scalar T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, int threads) {
  std::fill_n(c, m * n, T{});
  if (m == 0 || n == 0 || k == 0) return;
  const std::size_t row_tiles = (m + kRowBlock - 1) / kRowBlock;
  const std::size_t col_tiles = (n + kColBlock - 1) / kColBlock;
  const auto tiles = static_cast<std::ptrdiff_t>(row_tiles * col_tiles);
  const bool parallel = threads > 1 && tiles > 1 && m * n * k >= (1u << 15);
#pragma omp parallel for schedule(static) num_threads(threads) if (parallel)
  for (std::ptrdiff_t t = 0; t < tiles; ++t) {
    const std::size_t rt = static_cast<std::size_t>(t) / col_tiles;
    const std::size_t ct = static_cast<std::size_t>(t) % col_tiles;
    const std::size_t i0 = rt * kRowBlock, i1 = std::min(m, i0 + kRowBlock);
    const std::size_t j0 = ct * kColBlock, j1 = std::min(n, j0 + kColBlock);
    tile_kernel(i0, i1, j0, j1, n, k, a, b, c);
  }
}

template <Scalar T>
void permute(std::span<const std::size_t> dims, std::span<const std::size_t> order, const T* in,
             T* out, int threads) {
  const std::size_t rank = dims.size();
  const std::size_t total = product(dims);
  if (total == 0) return;
  if (rank <= 1 || is_identity(order)) {
    std::memcpy(static_cast<void*>(out), static_cast<const void*>(in), total * sizeof(T));
    return;
  }
  const auto in_strides = row_major_strides(dims);
  std::vector<std::size_t> out_dims(rank), step(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    out_dims[i] = dims[order[i]];
    step[i] = in_strides[order[i]];
  }
  // The two fastest output axes are copied as a tiled 2D transpose.
  const std::size_t na = out_dims[rank - 2], nb = out_dims[rank - 1];
  const std::size_t sa = step[rank - 2], sb = step[rank - 1];
  const std::size_t outer = total / (na * nb);
  constexpr std::size_t kTile = 32;
  const bool parallel = threads > 1 && outer > 1 && total >= (1u << 14);
#pragma omp parallel for schedule(static) num_threads(threads) if (parallel)
  for (std::ptrdiff_t o = 0; o < static_cast<std::ptrdiff_t>(outer); ++o) {
    std::size_t rest = static_cast<std::size_t>(o);
    std::size_t base = 0;
    for (std::size_t ax = rank - 2; ax-- > 0;) {
      base += (rest % out_dims[ax]) * step[ax];
      rest /= out_dims[ax];
    }
    T* dst = out + static_cast<std::size_t>(o) * na * nb;
    for (std::size_t x0 = 0; x0 < na; x0 += kTile) {
      const std::size_t x1 = std::min(na, x0 + kTile);
      for (std::size_t y0 = 0; y0 < nb; y0 += kTile) {
        const std::size_t y1 = std::min(nb, y0 + kTile);
        for (std::size_t x = x0; x < x1; ++x)
          for (std::size_t y = y0; y < y1; ++y) dst[x * nb + y] = in[base + x * sa + y * sb];
      }
    }
  }
}

}  // namespace omp

#define QTTN_INSTANTIATE_KERNELS(T)                                                             \
  template void reference::gemm<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, \
                                   T*);                                                       \
  template void reference::permute<T>(std::span<const std::size_t>,                           \
                                      std::span<const std::size_t>, const T*, T*);            \
  template void omp::gemm<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*,   \
                             int);                                                            \
  template void omp::permute<T>(std::span<const std::size_t>, std::span<const std::size_t>,   \
                                const T*, T*, int);

QTTN_INSTANTIATE_KERNELS(float)
QTTN_INSTANTIATE_KERNELS(double)
QTTN_INSTANTIATE_KERNELS(cfloat)
QTTN_INSTANTIATE_KERNELS(cdouble)

#undef QTTN_INSTANTIATE_KERNELS

}  // namespace qttn::kernels
