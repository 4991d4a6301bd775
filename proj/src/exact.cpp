#include "qttn/exact/exact.hpp"

#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace qttn::exact {

void DenseProblem::validate() const {
  if (num_qubits == 0 || num_qubits > kMaxQubits)
    throw ArgumentError("exact oracle supports 1.." + std::to_string(kMaxQubits) + " qubits");
  validate_terms(terms, num_qubits);
}

namespace {

struct CompiledTerm {
  double weight;
  std::uint64_t flip;
  std::uint64_t zmask;
};

std::vector<CompiledTerm> compile(const DenseProblem& p) {
  p.validate();
  std::vector<CompiledTerm> out;
  for (const auto& t : p.terms) {
    CompiledTerm c{t.weight, 0, 0};
    for (const auto& f : t.factors) {
      const std::uint64_t bit = std::uint64_t{1} << (p.num_qubits - 1 - f.site);
      (f.op == Pauli::X ? c.flip : c.zmask) |= bit;
    }
    out.push_back(c);
  }
  return out;
}

template <typename T>
void apply(std::span<const T> v, std::span<T> out, const DenseProblem& p) {
  if (v.size() != p.dimension() || out.size() != p.dimension())
    throw ShapeError("statevector length does not match 2^num_qubits");
  const auto terms = compile(p);
  std::fill(out.begin(), out.end(), T{});
  for (const auto& t : terms)
    for (std::uint64_t i = 0; i < v.size(); ++i) {
      const double s = (std::popcount(i & t.zmask) & 1) ? -t.weight : t.weight;
      out[i ^ t.flip] += s * v[i];
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

void apply_hamiltonian(std::span<const double> v, std::span<double> out, const DenseProblem& p) { apply(v, out, p); }

void apply_hamiltonian(std::span<const std::complex<double>> v, std::span<std::complex<double>> out,
                       const DenseProblem& p) {
  apply(v, out, p);
}

std::vector<double> dense_matrix(const DenseProblem& p) {
  if (p.num_qubits > 12) throw ArgumentError("dense_matrix supports at most 12 qubits");
  const auto terms = compile(p);
  const std::size_t d = p.dimension();
  std::vector<double> m(d * d, 0.0);
  for (const auto& t : terms)
    for (std::uint64_t i = 0; i < d; ++i) {
      const double s = (std::popcount(i & t.zmask) & 1) ? -t.weight : t.weight;
      m[(i ^ t.flip) * d + i] += s;
    }
  return m;
}

GroundState ground_state(const DenseProblem& p, const LanczosOptions& opts) {
  p.validate();
  const std::size_t d = p.dimension();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = dist(rng);
  double n0 = std::sqrt(dot(v, v));
  for (auto& x : v) x /= n0;

  std::vector<std::vector<double>> basis{v};
  std::vector<double> alpha, beta;
  std::vector<double> w(d);
  double theta_prev = 0.0;
  GroundState gs;
  Eigen::VectorXd y;
  const std::size_t max_iter = std::min(opts.max_iter, d);
  for (std::size_t j = 0; j < max_iter; ++j) {
    apply_hamiltonian(std::span<const double>(basis[j]), std::span<double>(w), p);
    const double a = dot(basis[j], w);
    alpha.push_back(a);
    for (std::size_t i = 0; i < d; ++i) w[i] -= a * basis[j][i] + (j ? beta[j - 1] * basis[j - 1][i] : 0.0);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) {
        const double c = dot(q, w);
        for (std::size_t i = 0; i < d; ++i) w[i] -= c * q[i];
      }
    const double b = std::sqrt(dot(w, w));

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd(0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta = es.eigenvalues()(0);
    y = es.eigenvectors().col(0);
    gs.iterations = j + 1;
    gs.residual = b * std::abs(y(m - 1));
    gs.energy = theta;
    const bool exhausted = b < 1e-12 * std::max(1.0, std::abs(theta)) || j + 1 == d;
    if (exhausted || (j > 0 && std::abs(theta - theta_prev) < opts.tol && gs.residual < 1e-5)) break;
    if (j + 1 == max_iter)
      throw SolverError("exact Lanczos did not converge in " + std::to_string(max_iter) +
                        " iterations (residual " + std::to_string(gs.residual) + ")");
    theta_prev = theta;
    beta.push_back(b);
    for (auto& x : w) x /= b;
    basis.push_back(w);
  }
  gs.vector.assign(d, 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (std::size_t i = 0; i < d; ++i) gs.vector[i] += y(static_cast<Eigen::Index>(k)) * basis[k][i];
  const double nv = std::sqrt(dot(gs.vector, gs.vector));
  for (auto& x : gs.vector) x /= nv;
  return gs;
}

double ground_energy(const DenseProblem& p, const LanczosOptions& opts) { return ground_state(p, opts).energy; }

double parity_expectation(std::span<const double> v) {
  double s = 0.0;
  for (std::uint64_t i = 0; i < v.size(); ++i) s += ((std::popcount(i) & 1) ? -1.0 : 1.0) * v[i] * v[i];
  return s;
}

double energy_of(std::span<const double> v, const DenseProblem& p) {
  std::vector<double> hv(v.size());
  apply_hamiltonian(v, std::span<double>(hv), p);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    num += v[i] * hv[i];
    den += v[i] * v[i];
  }
  return num / den;
}

}  // namespace qttn::exact
