#include <gtest/gtest.h>

#include <sstream>

#include "qttn/model/ising.hpp"
#include "qttn/symmetry/z2_io.hpp"
#include "qttn/symmetry/z2_tensor.hpp"
#include "qttn/ttn/tensor_ops.hpp"
#include "test_util.hpp"

namespace qttn {
namespace {

using Dir = Z2Direction;

Z2Link in(std::size_t a, std::size_t b) { return {{a, b}, Dir::incoming}; }
Z2Link out(std::size_t a, std::size_t b) { return {{a, b}, Dir::outgoing}; }

template <Scalar T = double>
Z2Tensor<T> rnd(std::vector<Z2Link> links, int flux, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_z2<T>(std::move(links), flux, rng);
}

TEST(Z2Densify, EmptyAndSingleBlock) {
  const Z2Tensor<double> e({in(2, 3), out(1, 2)});
  const auto d = densify(e);
  EXPECT_EQ(d.shape(), (Shape{5, 3}));
  EXPECT_EQ(norm(d), 0.0);

  Z2Tensor<double> t({in(2, 1), out(2, 1)});
  t.set_block({0, 0}, DenseTensor<double>({2, 2}, {1, 2, 3, 4}));
  const auto dt = densify(t);
  EXPECT_EQ(dt(0, 0), 1.0);
  EXPECT_EQ(dt(1, 1), 4.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(dt(2, i), 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(dt(i, 2), 0.0);
}

TEST(Z2Densify, SparsifyRoundTrip) {
  for (int flux : {0, 1}) {
    const auto a = rnd({in(2, 3), in(1, 2), out(3, 2)}, flux, 10 + flux);
    const auto back = sparsify(densify(a), a.links(), flux);
    EXPECT_EQ(max_abs_diff(back, a), 0.0);
    back.audit();
    auto bad = densify(a);
    // Put weight into a forbidden position: charges (0,0,1) for flux 0.
    bad(0, 0, 3) += flux == 0 ? 1.0 : 0.0;
    bad(0, 0, 0) += flux == 1 ? 1.0 : 0.0;
    EXPECT_THROW(sparsify(bad, a.links(), flux), ChargeError);
  }
}

TEST(Z2Block, ConservationEnforced) {
  Z2Tensor<double> t({in(1, 1), out(1, 1)});
  EXPECT_THROW(t.set_block({0, 1}, DenseTensor<double>({1, 1}, {1.0})), ChargeError);
  EXPECT_THROW(t.set_block({0, 0}, DenseTensor<double>({2, 1}, {1.0, 2.0})), ShapeError);
}

TEST(Z2Contract, IdentityLeavesInputUnchanged) {
  const auto a = rnd({in(2, 3), out(3, 1)}, 0, 3);
  Z2Tensor<double> id({in(3, 1), out(3, 1)});
  id.set_block({0, 0}, DenseTensor<double>::identity(3));
  id.set_block({1, 1}, DenseTensor<double>::identity(1));
  EXPECT_EQ(max_abs_diff(bcontract(a, id, {1}, {0}), a), 0.0);
}

TEST(Z2Contract, PauliXSquared) {
  const auto x = pauli_z2<double>(Pauli::X);
  EXPECT_EQ(x.flux(), 1);
  const auto xx = bcontract(x, x, {1}, {0});
  EXPECT_EQ(xx.flux(), 0);
  EXPECT_EQ(xx.blocks().size(), 2u);
  ASSERT_NE(xx.find({1, 1}), nullptr);
  EXPECT_EQ(max_abs_diff(densify(xx), DenseTensor<double>::identity(2)), 0.0);
}

TEST(Z2Contract, DensifyCommutesOnSeededInputs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int fa = static_cast<int>(seed % 2), fb = static_cast<int>((seed / 2) % 2);
    const auto a = rnd({in(2, 3), out(1, 2), out(3, 3)}, fa, 100 + seed);
    const auto b = rnd({in(3, 3), in(1, 2), out(2, 2)}, fb, 200 + seed);
    const auto c = bcontract(a, b, {2, 1}, {0, 1});
    c.audit();
    EXPECT_EQ(c.flux(), (fa + fb) % 2);
    EXPECT_LT(max_abs_diff(densify(c), contract(densify(a), densify(b), {2, 1}, {0, 1})), 1e-13);
  }
}

TEST(Z2Contract, ComplexAndBackends) {
  const auto a = rnd<cdouble>({in(4, 5), out(6, 3)}, 1, 7);
  const auto b = rnd<cdouble>({in(6, 3), out(2, 2)}, 0, 8);
  const BackendId ref{BackendKind::reference, 1}, opt{BackendKind::optimized, 4};
  const auto c1 = bcontract(a, b, {1}, {0}, ref), c2 = bcontract(a, b, {1}, {0}, opt);
  EXPECT_LT(max_abs_diff(c1, c2), 1e-12);
  EXPECT_LT(max_abs_diff(densify(c1), contract(densify(a), densify(b), {1}, {0})), 1e-12);
}

TEST(Z2Contract, SectorMismatchAndDirection) {
  const auto a = rnd({in(2, 3), out(1, 2)}, 0, 1);
  const auto b = rnd({in(2, 1), out(2, 2)}, 0, 2);
  EXPECT_THROW(bcontract(a, b, {1}, {0}), ChargeError);
  const auto c = rnd({out(1, 2), out(2, 2)}, 0, 3);
  EXPECT_THROW(bcontract(a, c, {1}, {0}), ChargeError);
}

TEST(Z2Ops, PermuteConjNormDotConvert) {
  const auto a = rnd<cdouble>({in(2, 3), in(1, 2), out(3, 2)}, 1, 5);
  EXPECT_EQ(max_abs_diff(densify(permute(a, {2, 0, 1})), permute(densify(a), {2, 0, 1})), 0.0);
  EXPECT_EQ(max_abs_diff(densify(conj(a)), conj(densify(a))), 0.0);
  EXPECT_EQ(conj(a).link(0).direction, Dir::outgoing);
  EXPECT_NEAR(norm(a), norm(densify(a)), 1e-13);
  const auto b = rnd<cdouble>(a.links(), 1, 6);
  EXPECT_LT(std::abs(dot(a, b) - dot(densify(a), densify(b))), 1e-12);
  const auto s = convert<cfloat>(a);
  EXPECT_LT(max_abs_diff(densify(s), convert<cfloat>(densify(a))), 1e-7);
}

TEST(Z2Svd, GlobalTruncationKeepsLargest) {
  Z2Tensor<double> a({in(1, 1), out(1, 1)});
  a.set_block({0, 0}, DenseTensor<double>({1, 1}, {3.0}));
  a.set_block({1, 1}, DenseTensor<double>({1, 1}, {2.0}));
  const auto r = svd_split(a, {0}, {1}, TruncationParams{1, 1e-9, 0}, SvdAlgorithm::direct);
  ASSERT_EQ(r.s.size(), 1u);
  EXPECT_EQ(r.s[0], 3.0);
  EXPECT_EQ(r.s_charges[0], 0);
  EXPECT_NEAR(r.truncation_error, 2.0, 1e-14);

  // Tie: lower charge wins.
  Z2Tensor<double> t({in(1, 1), out(1, 1)});
  t.set_block({0, 0}, DenseTensor<double>({1, 1}, {2.0}));
  t.set_block({1, 1}, DenseTensor<double>({1, 1}, {2.0}));
  const auto rt = svd_split(t, {0}, {1}, TruncationParams{1, 1e-9, 0}, SvdAlgorithm::direct);
  EXPECT_EQ(rt.s_charges[0], 0);
  const auto both = svd_split(t, {0}, {1}, TruncationParams{2, 1e-9, 0}, SvdAlgorithm::direct);
  EXPECT_EQ(both.s_charges, (std::vector<int>{0, 1}));
}

TEST(Z2Svd, TruncationErrorMatchesDenseSvd) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (auto alg : {SvdAlgorithm::direct, SvdAlgorithm::via_eigh}) {
      const auto a = rnd({in(3, 4), in(2, 2), out(5, 4)}, static_cast<int>(seed % 2), 40 + seed);
      const TruncationParams p{5, 1e-12, 0};
      const auto sp = ops::split_svd(a, 2, p, alg, {});
      sp.iso.audit();
      sp.carry.audit();
      EXPECT_LT(isometry_deviation(sp.iso, 2), 1e-12);
      const auto rec = bcontract(sp.iso, sp.carry, {2}, {0});
      auto diff = densify(rec);
      diff -= densify(a);
      const auto dense = svd_split(densify(a), {0, 1}, {2}, p, SvdAlgorithm::direct);
      EXPECT_NEAR(norm(diff), dense.truncation_error, 1e-10);
      EXPECT_NEAR(sp.truncation_error, dense.truncation_error, 1e-10);
      // Every block dimension is bounded by the dense one.
      for (const auto& [k, b] : a.blocks())
        for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(b.dim(i), a.dim(i));
    }
  }
}

TEST(Z2Qr, ReconstructsAndIsIsometric) {
  for (int flux : {0, 1}) {
    const auto a = rnd<cdouble>({in(2, 3), in(1, 1), out(4, 2)}, flux, 60 + flux);
    const auto sp = ops::split_qr(a, 2, {});
    EXPECT_LT(isometry_deviation(sp.iso, 2), 1e-12);
    EXPECT_LT(max_abs_diff(densify(bcontract(sp.iso, sp.carry, {2}, {0})), densify(a)), 1e-12);
    const auto sp0 = ops::split_qr(a, 0, {});
    EXPECT_LT(isometry_deviation(sp0.iso, 0), 1e-12);
    EXPECT_LT(max_abs_diff(densify(permute(bcontract(sp0.iso, sp0.carry, {0}, {0}), {2, 0, 1})), densify(a)),
              1e-12);
  }
}

TEST(Z2Eigh, BlockwiseMatchesDense) {
  auto a = rnd({in(3, 2), out(3, 2)}, 0, 9);
  const auto h0 = densify(a);
  auto h = h0;
  h += permute(h0, {1, 0});
  const auto hz = sparsify(h, a.links(), 0);
  const auto e = beigh(hz);
  const auto d = eigh_matrix(h);
  ASSERT_EQ(e.values.size(), d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) EXPECT_NEAR(e.values[i], d.values[i], 1e-12);
  for (std::size_t i = 1; i < e.values.size(); ++i) EXPECT_LE(e.values[i - 1], e.values[i]);
  // H V = V diag(lambda), columns ordered charge 0 then charge 1.
  std::vector<double> lam;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < e.values.size(); ++i)
      if (e.charges[i] == c) lam.push_back(e.values[i]);
  auto v = densify(e.vectors);
  const auto hv = densify(bcontract(hz, e.vectors, {1}, {0}));
  for (std::size_t r = 0; r < v.dim(0); ++r)
    for (std::size_t c = 0; c < v.dim(1); ++c) v(r, c) *= lam[c];
  EXPECT_LT(max_abs_diff(hv, v), 1e-12);
  EXPECT_LT(isometry_deviation(e.vectors, 1), 1e-12);
}

TEST(Z2Io, RoundTrip) {
  const auto a = rnd<cfloat>({in(2, 3), out(0, 2), out(3, 2)}, 1, 4);
  std::stringstream ss;
  write_z2(ss, a);
  const auto b = read_z2<cfloat>(ss);
  EXPECT_EQ(b.links(), a.links());
  EXPECT_EQ(b.flux(), 1);
  EXPECT_EQ(max_abs_diff(b, a), 0.0);
  std::stringstream again;
  write_z2(again, a);
  EXPECT_THROW(read_z2<double>(again), Error);
}

TEST(Z2Degenerate, EmptySectorsAreSkipped) {
  const auto a = rnd({in(2, 0), out(2, 0)}, 0, 1);
  EXPECT_EQ(a.blocks().size(), 1u);
  const auto sp = ops::split_svd(a, 1, TruncationParams{4, 1e-9, 0}, SvdAlgorithm::direct, {});
  EXPECT_EQ(sp.iso.link(1).dim(1), 0u);
}

}  // namespace
}  // namespace qttn
