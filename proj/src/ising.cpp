#include "qttn/model/ising.hpp"

#include <cmath>

namespace qttn {

void IsingModelSpec::validate() const {
  if (N < 2) throw ArgumentError("N must be >= 2");
  if (!std::isfinite(J) || !std::isfinite(g)) throw ArgumentError("couplings must be finite");
}

std::string_view to_string(LeafMapping m) { return m == LeafMapping::morton ? "morton" : "row_major"; }

LeafMapping leaf_mapping_from_string(std::string_view name) {
  if (name == "morton") return LeafMapping::morton;
  if (name == "row_major") return LeafMapping::row_major;
  throw ArgumentError("unknown leaf mapping '" + std::string(name) + "'");
}

std::size_t leaf_index(std::size_t row, std::size_t col, std::size_t N, LeafMapping mapping) {
  if (row >= N || col >= N) throw ArgumentError("lattice site out of range");
  if (mapping == LeafMapping::row_major) return row * N + col;
  if ((N & (N - 1)) != 0) throw ArgumentError("Morton mapping needs N to be a power of two");
  std::size_t idx = 0;
  for (std::size_t b = 0; (std::size_t{1} << b) < N; ++b) {
    idx |= ((row >> b) & 1u) << (2 * b + 1);
    idx |= ((col >> b) & 1u) << (2 * b);
  }
  return idx;
}

std::vector<PauliString> build_hamiltonian(const IsingModelSpec& spec, LeafMapping mapping) {
  spec.validate();
  const std::size_t N = spec.N;
  std::vector<PauliString> terms;
  terms.reserve(spec.num_bonds() + spec.num_sites());
  auto bond = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    terms.push_back({-spec.J, {{a, Pauli::X}, {b, Pauli::X}}});
  };
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) {
      const auto s = leaf_index(r, c, N, mapping);
      if (c + 1 < N) bond(s, leaf_index(r, c + 1, N, mapping));
      if (r + 1 < N) bond(s, leaf_index(r + 1, c, N, mapping));
    }
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) terms.push_back({-spec.g, {{leaf_index(r, c, N, mapping), Pauli::Z}}});
  return terms;
}

std::vector<int> term_charges(const PauliString& term) {
  std::vector<int> out;
  for (const auto& f : term.factors) out.push_back(f.op == Pauli::X ? 1 : 0);
  return out;
}

int total_charge(const PauliString& term) {
  int s = 0;
  for (int c : term_charges(term)) s += c;
  return s & 1;
}

void validate_terms(const std::vector<PauliString>& terms, std::size_t num_sites) {
  for (const auto& t : terms) {
    if (!std::isfinite(t.weight)) throw ArgumentError("term weight must be finite");
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      if (t.factors[i].site >= num_sites)
        throw ArgumentError("term references site " + std::to_string(t.factors[i].site) + " outside the lattice");
      if (i > 0 && t.factors[i].site <= t.factors[i - 1].site)
        throw ArgumentError("term factors must be sorted by site without repeats");
    }
  }
}

}  // namespace qttn
