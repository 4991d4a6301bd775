#pragma once

// Dense kernels behind every contraction. Two implementations are kept:
// `reference` is plain serial loops and serves as the test oracle,
// `omp` is cache-blocked and OpenMP-parallel over row panels.
// Both operate on row-major storage.

#include <cstddef>
#include <span>

#include "qttn/tensor/backend.hpp"
#include "qttn/tensor/precision.hpp"

namespace qttn::kernels {

namespace reference {

/// c[m x n] = a[m x k] * b[k x n]
template <Scalar T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

/// out = in with axes reordered; out axis i is input axis order[i].
template <Scalar T>
void permute(std::span<const std::size_t> dims, std::span<const std::size_t> order, const T* in,
             T* out);

}  // namespace reference

namespace omp {

template <Scalar T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, int threads);

template <Scalar T>
void permute(std::span<const std::size_t> dims, std::span<const std::size_t> order, const T* in,
             T* out, int threads);

}  // namespace omp

template <Scalar T>
void gemm(const BackendId& backend, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c) {
  if (backend.name == BackendKind::reference) reference::gemm(m, n, k, a, b, c);
  else omp::gemm(m, n, k, a, b, c, backend.thread_count);
}

template <Scalar T>
void permute(const BackendId& backend, std::span<const std::size_t> dims,
             std::span<const std::size_t> order, const T* in, T* out) {
  if (backend.name == BackendKind::reference) reference::permute(dims, order, in, out);
  else omp::permute(dims, order, in, out, backend.thread_count);
}

}  // namespace qttn::kernels
