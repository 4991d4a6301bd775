#pragma once

// Lowest eigenpair of a Hermitian operator given as a matvec, using Lanczos
// with full (two-pass) reorthogonalization. Works for any tensor type that
// provides dot/norm/axpy/scale; the tridiagonal problem is solved in double.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qttn/tensor/errors.hpp"
#include "qttn/ttn/tensor_ops.hpp"

namespace qttn {

struct LanczosSettings {
  std::size_t max_iter = 100;
  /// Convergence: |theta_j - theta_{j-1}| below this (absolute).
  double tol = 1e-7;
};

template <typename Ten>
struct LanczosResult {
  double eigenvalue = 0.0;
  Ten vector;
  std::size_t iterations = 0;
  bool converged = false;
  bool restarted = false;
};

/// Lowest eigenvalue and its eigenvector (in the basis of the Krylov vectors)
/// of the symmetric tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
std::pair<double, std::vector<double>> tridiagonal_lowest(const std::vector<double>& alpha,
                                                          const std::vector<double>& beta);

namespace detail {

template <typename Ten>
struct KrylovRun {
  double theta = 0.0;
  Ten vector;
  std::size_t iterations = 0;
  bool converged = false;
  bool breakdown = false;
};

template <typename Ten, typename MatVec>
KrylovRun<Ten> krylov_run(MatVec& matvec, Ten start, std::size_t dim, const LanczosSettings& cfg) {
  using T = typename Ten::value_type;
  using R = real_t<T>;
  const double eps = std::numeric_limits<R>::epsilon();
  const double n0 = norm(start);
  if (!(n0 > 0.0) || !std::isfinite(n0)) throw NumericError("Lanczos start vector is zero or not finite");
  scale(start, T(R(1.0 / n0)));

  std::vector<Ten> basis;
  basis.push_back(std::move(start));
  std::vector<double> alpha, beta;
  std::vector<double> y{1.0};
  double theta = 0.0, theta_prev = 0.0, hscale = 0.0;
  KrylovRun<Ten> run;
  const std::size_t max_iter = std::min(cfg.max_iter, dim);
  for (std::size_t j = 0; j < max_iter; ++j) {
    Ten w = matvec(basis[j]);
    const double a = std::real(dot(basis[j], w));
    alpha.push_back(a);
    axpy(w, T(R(-a)), basis[j]);
    if (j > 0) axpy(w, T(R(-beta[j - 1])), basis[j - 1]);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) axpy(w, -dot(q, w), q);
    const double b = norm(w);
    if (!std::isfinite(b) || !std::isfinite(a)) throw NumericError("Lanczos produced non-finite values");
    hscale = std::max(hscale, std::sqrt(a * a + (j ? beta[j - 1] * beta[j - 1] : 0.0)));

    auto [th, vec] = tridiagonal_lowest(alpha, beta);
    theta = th;
    y = std::move(vec);
    run.iterations = j + 1;
    const double tol = std::max(cfg.tol, 8.0 * eps * std::max(1.0, std::abs(theta)));
    if (j + 1 == dim) {  // Krylov space is the whole space
      run.converged = true;
      break;
    }
    if (j > 0 && std::abs(theta - theta_prev) < tol) {
      run.converged = true;
      break;
    }
    if (b <= 64.0 * eps * std::max(1.0, hscale)) {
      run.breakdown = true;
      break;
    }
    theta_prev = theta;
    beta.push_back(b);
    if (j + 1 < max_iter) {
      scale(w, T(R(1.0 / b)));
      basis.push_back(std::move(w));
    }
  }
  Ten x = ops::zeros_like(basis[0]);
  for (std::size_t k = 0; k < y.size(); ++k) axpy(x, T(R(y[k])), basis[k]);
  const double nx = norm(x);
  scale(x, T(R(1.0 / nx)));
  run.theta = theta;
  run.vector = std::move(x);
  return run;
}

}  // namespace detail

/// `dim` is the dimension of the space (caps the Krylov size). On breakdown
/// (an invariant subspace before convergence) the run restarts once from a
/// seeded perturbation of the start vector; a second breakdown is accepted
/// only if both runs agree on the eigenvalue, otherwise SolverError.
template <typename Ten, typename MatVec>
LanczosResult<Ten> lanczos_lowest(MatVec&& matvec, const Ten& start, std::size_t dim, const LanczosSettings& cfg,
                                  std::uint64_t seed) {
  using T = typename Ten::value_type;
  using R = real_t<T>;
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0)) throw ArgumentError("Lanczos settings must be positive");
  if (dim == 0) throw ArgumentError("Lanczos on an empty space");
  Ten x0 = start;
  if (!(norm(x0) > 0.0)) {
    std::mt19937_64 rng(seed);
    x0 = ops::random_like(start, rng);
  }
  auto first = detail::krylov_run(matvec, x0, dim, cfg);
  LanczosResult<Ten> res;
  if (!first.breakdown) {
    res = {first.theta, std::move(first.vector), first.iterations, first.converged, false};
    return res;
  }
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  Ten noise = ops::random_like(start, rng);
  scale(noise, T(R(1e-2 / std::max(norm(noise), 1e-300))));
  Ten x1 = first.vector;
  axpy(x1, T{1}, noise);
  auto second = detail::krylov_run(matvec, x1, dim, cfg);
  const std::size_t iters = first.iterations + second.iterations;
  if (second.breakdown) {
    const double eps = std::numeric_limits<R>::epsilon();
    const double tol = std::max(cfg.tol, 8.0 * eps * std::max(1.0, std::abs(first.theta)));
    if (std::abs(first.theta - second.theta) > tol)
      throw SolverError("Lanczos breakdown persisted after restart (eigenvalues " + std::to_string(first.theta) +
                        " vs " + std::to_string(second.theta) + ")");
  }
  auto& best = second.theta <= first.theta ? second : first;
  res = {best.theta, std::move(best.vector), iters, true, true};
  return res;
}

}  // namespace qttn
