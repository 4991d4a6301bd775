#pragma once

// Exact diagonalization on the full statevector (up to 16 qubits). Site s
// is bit (num_qubits - 1 - s) of the basis index.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "qttn/model/ising.hpp"

namespace qttn::exact {

inline constexpr std::size_t kMaxQubits = 16;

struct DenseProblem {
  std::size_t num_qubits = 0;
  std::vector<PauliString> terms;

  std::size_t dimension() const { return std::size_t{1} << num_qubits; }
  void validate() const;
};

/// out = H v.
void apply_hamiltonian(std::span<const double> v, std::span<double> out, const DenseProblem& problem);
void apply_hamiltonian(std::span<const std::complex<double>> v, std::span<std::complex<double>> out,
                       const DenseProblem& problem);

template <typename T>
std::vector<T> apply_hamiltonian(const std::vector<T>& v, const DenseProblem& problem) {
  std::vector<T> out(v.size());
  apply_hamiltonian(std::span<const T>(v), std::span<T>(out), problem);
  return out;
}

/// Row-major 2^n x 2^n matrix (n <= 12).
std::vector<double> dense_matrix(const DenseProblem& problem);

struct GroundState {
  double energy = 0.0;
  std::vector<double> vector;
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct LanczosOptions {
  double tol = 1e-10;
  std::size_t max_iter = 500;
  std::uint64_t seed = 20240611;
};

/// Lowest eigenpair by Lanczos with full reorthogonalization.
/// Throws SolverError when not converged within max_iter.
GroundState ground_state(const DenseProblem& problem, const LanczosOptions& opts = {});
double ground_energy(const DenseProblem& problem, const LanczosOptions& opts = {});

/// <v| prod_i Z_i |v> for a normalized real vector.
double parity_expectation(std::span<const double> v);

/// <v|H|v> / <v|v>.
double energy_of(std::span<const double> v, const DenseProblem& problem);

}  // namespace qttn::exact
