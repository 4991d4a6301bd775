#pragma once

// Transverse-field Ising model on an open N x N lattice,
//   H = -J sum_<ij> X_i X_j - g sum_i Z_i,
// written as weighted Pauli strings over tree leaves.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qttn/symmetry/z2_tensor.hpp"
#include "qttn/tensor/dense.hpp"

namespace qttn {

/// Field near the 2D quantum critical point for J = 1.
inline constexpr double kCriticalField = 3.04438;

enum class Pauli : std::uint8_t { X, Z };

struct PauliFactor {
  std::size_t site = 0;
  Pauli op = Pauli::Z;
  friend bool operator==(const PauliFactor&, const PauliFactor&) = default;
};

/// weight * prod_k op_k(site_k); identity elsewhere. Factors sorted by site,
/// at most one per site. No factors means a constant.
struct PauliString {
  double weight = 0.0;
  std::vector<PauliFactor> factors;
  friend bool operator==(const PauliString&, const PauliString&) = default;
};

struct IsingModelSpec {
  std::size_t N = 2;
  double J = 1.0;
  double g = kCriticalField;

  std::size_t num_sites() const { return N * N; }
  std::size_t num_bonds() const { return 2 * N * (N - 1); }
  /// Throws ArgumentError for N < 2 or non-finite couplings.
  void validate() const;
};

enum class LeafMapping { morton, row_major };

std::string_view to_string(LeafMapping m);
LeafMapping leaf_mapping_from_string(std::string_view name);

/// Leaf index of lattice site (row, col). Morton order needs N to be a power of two.
std::size_t leaf_index(std::size_t row, std::size_t col, std::size_t N, LeafMapping mapping);

/// 2N(N-1) bond strings of weight -J followed by N^2 field strings of weight
/// -g, with sites already expressed as leaf indices.
std::vector<PauliString> build_hamiltonian(const IsingModelSpec& spec, LeafMapping mapping = LeafMapping::morton);

/// Z2 charge shift per factor: 1 for X, 0 for Z.
std::vector<int> term_charges(const PauliString& term);
int total_charge(const PauliString& term);

/// Throws ArgumentError if a factor is out of range, duplicated or unsorted.
void validate_terms(const std::vector<PauliString>& terms, std::size_t num_sites);

template <Scalar T>
DenseTensor<T> pauli_dense(Pauli p) {
  if (p == Pauli::X) return DenseTensor<T>({2, 2}, {T{0}, T{1}, T{1}, T{0}});
  return DenseTensor<T>({2, 2}, {T{1}, T{0}, T{0}, T{-1}});
}

/// Pauli operator acting on a leaf leg (incoming link): indexed [out, in].
template <Scalar T>
Z2Tensor<T> pauli_z2(Pauli p) {
  std::vector<Z2Link> links{{{1, 1}, Z2Direction::incoming}, {{1, 1}, Z2Direction::outgoing}};
  if (p == Pauli::X) {
    Z2Tensor<T> x(links, 1);
    x.set_block({0, 1}, DenseTensor<T>({1, 1}, {T{1}}));
    x.set_block({1, 0}, DenseTensor<T>({1, 1}, {T{1}}));
    return x;
  }
  Z2Tensor<T> z(links, 0);
  z.set_block({0, 0}, DenseTensor<T>({1, 1}, {T{1}}));
  z.set_block({1, 1}, DenseTensor<T>({1, 1}, {T{-1}}));
  return z;
}

}  // namespace qttn
