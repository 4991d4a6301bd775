#include <gtest/gtest.h>

#include "qttn/exact/exact.hpp"
#include "qttn/search/search.hpp"
#include "qttn/ttn/environment.hpp"
#include "qttn/ttn/state.hpp"
#include "test_util.hpp"

namespace qttn {
namespace {

using testing::statevector_energy;

template <typename T>
std::vector<T> amplitudes(const DenseTensor<T>& v) {
  return {v.data().begin(), v.data().end()};
}

template <Scalar T>
T overlap(const DenseTensor<T>& a, const DenseTensor<T>& b) {
  return dot(a, b);
}

std::vector<PauliString> random_pauli_sum(std::size_t n, std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(-1, 1);
  std::uniform_int_distribution<std::size_t> site(0, n - 1), nf(0, 3);
  std::vector<PauliString> out;
  for (std::size_t k = 0; k < count; ++k) {
    PauliString p;
    p.weight = w(rng);
    std::map<std::size_t, Pauli> f;
    const std::size_t m = nf(rng);
    for (std::size_t j = 0; j < m; ++j) f[site(rng)] = (rng() & 1) ? Pauli::X : Pauli::Z;
    for (auto [s, op] : f) p.factors.push_back({s, op});
    out.push_back(p);
  }
  return out;
}

// Even number of X factors so that Z2 states keep their parity.
std::vector<PauliString> even_pauli_sum(std::size_t n, std::uint64_t seed, std::size_t count) {
  auto all = random_pauli_sum(n, seed, count * 3);
  std::vector<PauliString> out;
  for (auto& p : all)
    if (total_charge(p) == 0 && out.size() < count) out.push_back(p);
  return out;
}

TEST(Topology, LayerCountsAndAdjacency) {
  const TTNTopology t(16);
  EXPECT_EQ(t.num_layers(), 4u);
  EXPECT_EQ(t.num_nodes(), 15u);
  for (std::size_t l = 0; l < 4; ++l) EXPECT_EQ(t.nodes_in_layer(l), 16u >> (l + 1));
  EXPECT_EQ(t.node(t.top()).parent, kNoNode);
  for (std::size_t n = 0; n + 1 < t.num_nodes(); ++n) {
    const auto p = t.node(n).parent;
    ASSERT_NE(p, kNoNode);
    EXPECT_EQ(t.node(p).children[t.child_leg(p, n)], n);
  }
  EXPECT_THROW(TTNTopology(6), TopologyError);
  EXPECT_THROW(TTNTopology(1), TopologyError);
}

TEST(Topology, PreorderFromTop) {
  const TTNTopology t(8);
  const auto order = t.sweep_order();
  ASSERT_EQ(order.size(), t.num_nodes());
  EXPECT_EQ(order.front(), t.top());
  // Each node appears after its parent, and the path between consecutive nodes is short.
  std::vector<bool> seen(t.num_nodes(), false);
  for (auto n : order) {
    if (n != t.top()) EXPECT_TRUE(seen[t.node(n).parent]);
    seen[n] = true;
  }
  EXPECT_EQ(t.path(0, 1), (std::vector<std::size_t>{0, 4, 1}));
}

TEST(RandomState, ShapesNormAndCap) {
  const auto s = random_state<DenseTensor<double>>(TTNTopology(4), 4, 1);
  EXPECT_EQ(s.tensor(0).shape(), (Shape{2, 2, 4}));
  EXPECT_EQ(s.tensor(1).shape(), (Shape{2, 2, 4}));
  EXPECT_EQ(s.tensor(2).shape(), (Shape{4, 4, 1}));
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
  EXPECT_LT(s.isometry_audit(), 1e-12);
  EXPECT_NEAR(norm(densify_state(s)), 1.0, 1e-12);

  const auto c = random_state<DenseTensor<double>>(TTNTopology(8), 2, 3);
  for (std::size_t n = 0; n + 1 < c.topology().num_nodes(); ++n) EXPECT_EQ(c.bond_dim(n, kParent), 2u);
  EXPECT_THROW(random_state<DenseTensor<double>>(TTNTopology(8), 1, 3), ArgumentError);
}

TEST(RandomState, LinkDimsNeverExceedCap) {
  const TTNTopology t(64);
  const auto s = random_state<DenseTensor<float>>(t, 16, 2);
  for (std::size_t n = 0; n < t.num_nodes(); ++n) {
    EXPECT_LE(s.bond_dim(n, kParent), natural_bond_dim(t, n, 16));
    EXPECT_EQ(s.bond_dim(n, kParent), natural_bond_dim(t, n, 16));
  }
  EXPECT_LT(s.isometry_audit(), 1e-5);
}

TEST(RandomState, Z2IsEvenAndConsistent) {
  const auto s = random_state<Z2Tensor<double>>(TTNTopology(8), 8, 5);
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
  EXPECT_LT(s.isometry_audit(), 1e-12);
  const auto v = densify_state(s);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::popcount(i) % 2) EXPECT_EQ(v[i], 0.0);
  // Every link holds exactly two sectors.
  for (std::size_t n = 0; n + 1 < s.topology().num_nodes(); ++n) {
    const auto& l = s.tensor(n).link(kParent);
    EXPECT_GT(l.dim(0), 0u);
    EXPECT_GT(l.dim(1), 0u);
  }
}

TEST(MoveCenter, NoOpIsBitwise) {
  auto s = random_state<DenseTensor<double>>(TTNTopology(8), 4, 7);
  const auto before = s.tensors();
  s.move_center(s.center());
  for (std::size_t n = 0; n < before.size(); ++n) EXPECT_EQ(max_abs_diff(before[n], s.tensor(n)), 0.0);
}

TEST(MoveCenter, GaugeInvarianceDenseAndZ2) {
  auto s = random_state<DenseTensor<cdouble>>(TTNTopology(8), 4, 9);
  const auto v0 = densify_state(s);
  s.move_center(0);
  EXPECT_LT(s.isometry_audit(), 1e-12);
  const auto v1 = densify_state(s);
  EXPECT_NEAR(std::abs(overlap(v0, v1)), 1.0, 1e-12);
  s.move_center(3);
  s.move_center(s.topology().top());
  EXPECT_NEAR(std::abs(overlap(v0, densify_state(s))), 1.0, 1e-12);

  auto z = random_state<Z2Tensor<double>>(TTNTopology(8), 4, 9);
  const auto w0 = densify_state(z);
  z.move_center(2);
  EXPECT_LT(z.isometry_audit(), 1e-12);
  EXPECT_NEAR(std::abs(overlap(w0, densify_state(z))), 1.0, 1e-12);
}

TEST(MoveCenter, EnergyInvariant) {
  const auto terms8 = random_pauli_sum(8, 4, 30);
  auto s = random_state<DenseTensor<double>>(TTNTopology(8), 8, 11);
  Environment<DenseTensor<double>> env(s, terms8);
  const double e0 = env.energy(s);
  for (std::size_t target : {0u, 5u, 2u, 6u, 3u}) {
    s.move_center(target);
    EXPECT_NEAR(env.energy(s), e0, 1e-10);
  }
}

TEST(Truncation, ProductStateKeepsRankOne) {
  const TTNTopology t(4);
  std::vector<std::array<double, 2>> local(4, {0.6, 0.8});
  auto p = product_state<double>(t, local, 4);
  const auto rep = p.move_center_svd(0, TruncationParams{4, 1e-9, 0});
  EXPECT_EQ(rep.kept_rank, 1u);
}

TEST(Truncation, ChiCapKeepsLargestValues) {
  const TTNTopology t(16);
  auto s = random_state<DenseTensor<double>>(t, 16, 3);
  const auto child = t.node(t.top()).children[0];
  ASSERT_EQ(s.bond_dim(child, kParent), 16u);
  auto full = s;
  const auto all = full.move_center_svd(child, TruncationParams{16, 0.0, 0});
  const auto rep = s.move_center_svd(child, TruncationParams{8, 0.0, 0});
  EXPECT_EQ(rep.kept_rank, 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(rep.singular_values[i], all.singular_values[i], 1e-12);
  double tail = 0;
  for (std::size_t i = 8; i < all.singular_values.size(); ++i) tail += all.singular_values[i] * all.singular_values[i];
  EXPECT_NEAR(rep.truncation_error, std::sqrt(tail), 1e-12);
}

TEST(Truncation, ErrorEqualsDenseStateDistance) {
  for (int z2 = 0; z2 < 2; ++z2) {
    const TTNTopology t(4);
    auto run = [&](auto s) {
      const auto before = densify_state(s);
      const auto rep = s.move_center_svd(0, TruncationParams{2, 1e-12, 0}, SvdAlgorithm::direct, false);
      auto diff = densify_state(s);
      diff -= before;
      EXPECT_GT(rep.truncation_error, 1e-6);
      EXPECT_NEAR(norm(diff), rep.truncation_error, 1e-12);
    };
    if (z2) run(random_state<Z2Tensor<double>>(t, 4, 21));
    else run(random_state<DenseTensor<double>>(t, 4, 21));
  }
}

TEST(Expectation, IdentityStringAndProductState) {
  auto s = random_state<DenseTensor<double>>(TTNTopology(4), 4, 2);
  EXPECT_NEAR(expectation(s, {PauliString{2.5, {}}}), 2.5, 1e-12);
  const auto zero = basis_state<DenseTensor<double>>(TTNTopology(4), {0, 0, 0, 0});
  std::vector<PauliString> field;
  for (std::size_t i = 0; i < 4; ++i) field.push_back({-1.0, {{i, Pauli::Z}}});
  EXPECT_NEAR(expectation(zero, field), -4.0, 1e-14);
  const auto zz = basis_state<Z2Tensor<double>>(TTNTopology(4), {0, 0, 0, 0});
  EXPECT_NEAR(expectation(zz, field), -4.0, 1e-14);
  EXPECT_THROW(expectation(s, {PauliString{1.0, {{4, Pauli::Z}}}}), ArgumentError);
}

TEST(Expectation, MatchesStatevectorOracle) {
  const auto terms = random_pauli_sum(8, 17, 60);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto d = random_state<DenseTensor<double>>(TTNTopology(8), 6, seed);
    EXPECT_NEAR(expectation(d, terms), statevector_energy(terms, 8, amplitudes(densify_state(d))), 1e-10);
    d.move_center(1);
    EXPECT_NEAR(expectation(d, terms), statevector_energy(terms, 8, amplitudes(densify_state(d))), 1e-10);
    auto c = random_state<DenseTensor<cdouble>>(TTNTopology(8), 6, seed);
    EXPECT_NEAR(expectation(c, terms), statevector_energy(terms, 8, amplitudes(densify_state(c))), 1e-10);
  }
  const auto even = even_pauli_sum(8, 5, 40);
  auto z = random_state<Z2Tensor<double>>(TTNTopology(8), 8, 4);
  EXPECT_NEAR(expectation(z, even), statevector_energy(even, 8, amplitudes(densify_state(z))), 1e-10);
}

TEST(Expectation, IsingOn16SitesMatchesExactModule) {
  const IsingModelSpec spec{4, 1.0, 2.0};
  const auto terms = build_hamiltonian(spec);
  auto s = random_state<DenseTensor<double>>(TTNTopology(16), 8, 6);
  const auto v = densify_state(s);
  exact::DenseProblem p{16, terms};
  EXPECT_NEAR(expectation(s, terms), exact::energy_of(v.data(), p), 1e-10);
}

TEST(DensifyState, BasisAndProductStates) {
  const auto s = basis_state<DenseTensor<double>>(TTNTopology(2), {0, 0});
  const auto v = densify_state(s);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1] + v[2] + v[3], 0.0);
  // Leaf 0 is the most significant bit.
  const auto b = densify_state(basis_state<DenseTensor<double>>(TTNTopology(4), {1, 0, 0, 1}));
  EXPECT_EQ(b[0b1001], 1.0);
  EXPECT_THROW(basis_state<Z2Tensor<double>>(TTNTopology(4), {1, 0, 0, 0}), ChargeError);
  const auto zb = densify_state(basis_state<Z2Tensor<double>>(TTNTopology(4), {1, 0, 0, 1}));
  EXPECT_EQ(zb[0b1001], 1.0);

  // Exactness ceiling: a product state is reproduced exactly.
  std::vector<std::array<double, 2>> local{{0.6, 0.8}, {1, 0}, {0, 1}, {0.8, -0.6}};
  const auto p = densify_state(product_state<double>(TTNTopology(4), local, 4));
  for (std::size_t i = 0; i < 16; ++i) {
    const double expect = local[0][(i >> 3) & 1] * local[1][(i >> 2) & 1] * local[2][(i >> 1) & 1] * local[3][i & 1];
    EXPECT_NEAR(p[i], expect, 1e-12);
  }
  EXPECT_THROW(densify_state(random_state<DenseTensor<float>>(TTNTopology(32), 2, 1)), ArgumentError);
}

TEST(Environment, LazyRecomputation) {
  const auto terms = build_hamiltonian(IsingModelSpec{4, 1.0, 3.0});
  auto s = random_state<DenseTensor<double>>(TTNTopology(16), 8, 1);
  Environment<DenseTensor<double>> env(s, terms);
  const double e0 = env.energy(s);
  const auto r0 = env.renormalizations();
  EXPECT_NEAR(env.energy(s), e0, 1e-12);
  EXPECT_EQ(env.renormalizations(), r0);  // nothing changed, nothing recomputed
  s.move_center(0);
  EXPECT_NEAR(env.energy(s), e0, 1e-10);
  EXPECT_LT(env.renormalizations() - r0, r0);
}

// The effective operator equals P^T H P where P embeds the center tensor in the full statevector.
TEST(Environment, EffectiveOperatorMatchesDenseProjection) {
  const IsingModelSpec spec{2, 1.0, 0.9};
  const auto terms = build_hamiltonian(spec);
  const auto H = testing::kron_hamiltonian(terms, 4);
  for (std::size_t center : {2u, 0u, 1u}) {
    auto s = random_state<DenseTensor<double>>(TTNTopology(4), 4, 33);
    s.move_center(center);
    Environment<DenseTensor<double>> env(s, terms);
    const auto op = env.effective_operator(s);
    const auto& x0 = s.tensor(center);
    const std::size_t m = x0.size();
    Eigen::MatrixXd P(16, static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
      auto ts = s.tensors();
      ts[center] = DenseTensor<double>(x0.shape());
      ts[center][k] = 1.0;
      const TTNState<DenseTensor<double>> probe(s.topology(), ts, center, s.chi(), {});
      const auto v = densify_state(probe);
      for (std::size_t i = 0; i < 16; ++i) P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[i];
    }
    const Eigen::MatrixXd Heff = P.transpose() * H * P;
    for (std::size_t k = 0; k < m; ++k) {
      DenseTensor<double> e(x0.shape());
      e[k] = 1.0;
      const auto col = op.apply(e, {});
      for (std::size_t i = 0; i < m; ++i)
        EXPECT_NEAR(col[i], Heff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), 1e-12);
    }
  }
}

}  // namespace
}  // namespace qttn
