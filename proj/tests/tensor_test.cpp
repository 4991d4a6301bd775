#include <gtest/gtest.h>

#include <sstream>

#include "qttn/tensor/decompose.hpp"
#include "qttn/tensor/kernels.hpp"
#include "qttn/tensor/tensor.hpp"
#include "test_util.hpp"

namespace qttn {
namespace {

using testing::contract_loop;
using testing::matmul_loop;
using testing::seeded;
using testing::seeded_int;

const BackendId kRef{BackendKind::reference, 1};
const BackendId kOpt{BackendKind::optimized, 1};
const BackendId kOpt4{BackendKind::optimized, 4};

TEST(Contract, IdentityTimesVector) {
  const auto v = seeded<double>({2}, 1);
  const auto r = contract(DenseTensor<double>::identity(2), v, {1}, {0});
  EXPECT_EQ(max_abs_diff(r, v), 0.0);
}

TEST(Contract, PauliXSquaredIsIdentity) {
  const auto x = pauli_dense<double>(Pauli::X);
  EXPECT_EQ(max_abs_diff(contract(x, x, {1}, {0}), DenseTensor<double>::identity(2)), 0.0);
}

TEST(Contract, MatrixProductMatchesTripleLoop) {
  for (const auto& be : {kRef, kOpt, kOpt4}) {
    const auto a = seeded_int<double>({2, 3}, 11), b = seeded_int<double>({3, 4}, 12);
    EXPECT_EQ(max_abs_diff(contract(a, b, {1}, {0}, be), matmul_loop(a, b)), 0.0);
  }
}

TEST(Contract, LargerGemmAllPrecisionsBothBackends) {
  // Sizes straddle the blocking factors of the optimized kernel.
  for (std::size_t n : {1u, 7u, 33u, 70u}) {
    const auto a = seeded<cdouble>({n, n + 3}, n), b = seeded<cdouble>({n + 3, n + 1}, n + 100);
    const auto oracle = matmul_loop(a, b);
    EXPECT_LT(max_abs_diff(contract(a, b, {1}, {0}, kRef), oracle), 1e-12);
    EXPECT_LT(max_abs_diff(contract(a, b, {1}, {0}, kOpt4), oracle), 1e-12);
    const auto af = seeded<float>({n, n + 3}, n), bf = seeded<float>({n + 3, n + 1}, n + 7);
    EXPECT_LT(max_abs_diff(contract(af, bf, {1}, {0}, kRef), contract(af, bf, {1}, {0}, kOpt4)), 1e-4);
  }
}

TEST(Contract, GeneralAxesMatchLoopOracle) {
  const auto a = seeded<double>({2, 3, 4}, 3), b = seeded<double>({4, 5, 2}, 4);
  EXPECT_LT(max_abs_diff(contract(a, b, {2, 0}, {0, 2}, kOpt), contract_loop(a, b, {2, 0}, {0, 2})), 1e-13);
  EXPECT_LT(max_abs_diff(contract(a, b, {0}, {2}, kRef), contract_loop(a, b, {0}, {2})), 1e-13);
}

TEST(Contract, Errors) {
  const auto a = seeded<double>({2, 3}, 1), b = seeded<double>({4, 2}, 2);
  EXPECT_THROW(contract(a, b, {1}, {0}), ShapeError);
  const Tensor ta(a), tb(seeded<float>({3, 2}, 3));
  EXPECT_THROW(contract(ta, tb, {1}, {0}), PrecisionError);
}

TEST(Contract, Associativity) {
  const auto A = seeded<double>({3, 4, 5}, 1), B = seeded<double>({5, 2, 6}, 2), C = seeded<double>({6, 3, 2}, 3);
  const auto left = contract(contract(A, B, {2}, {0}), C, {3}, {0});
  const auto right = contract(A, contract(B, C, {2}, {0}), {2}, {0});
  EXPECT_LT(max_abs_diff(left, right), 1e-12);
}

TEST(Permute, InvolutionAndShape) {
  const auto a = seeded<double>({2, 3}, 5);
  EXPECT_EQ(max_abs_diff(permute(permute(a, {1, 0}), {1, 0}), a), 0.0);
  const auto b = seeded<double>({2, 3, 4}, 6);
  EXPECT_EQ(permute(b, {2, 0, 1}).shape(), (Shape{4, 2, 3}));
  EXPECT_THROW(permute(b, {0, 0, 1}), ArgumentError);
  EXPECT_THROW(permute(b, {0, 1}), ArgumentError);
}

TEST(Permute, BackendsAgreeElementwise) {
  const auto a = seeded<cdouble>({5, 7, 3, 4}, 9);
  for (const Axes order : {Axes{3, 1, 0, 2}, Axes{1, 0, 2, 3}, Axes{0, 1, 3, 2}}) {
    const auto r = permute(a, order, kRef), o = permute(a, order, kOpt4);
    EXPECT_EQ(max_abs_diff(r, o), 0.0);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 7; ++j)
        for (std::size_t k = 0; k < 3; ++k)
          for (std::size_t l = 0; l < 4; ++l) {
            const std::array<std::size_t, 4> src{i, j, k, l};
            const std::size_t flat =
                ((src[order[0]] * a.dim(order[1]) + src[order[1]]) * a.dim(order[2]) + src[order[2]]) *
                    a.dim(order[3]) +
                src[order[3]];
            ASSERT_EQ(r[flat], a(i, j, k, l));
          }
  }
}

TEST(Permute, ThenContractEqualsRemappedContract) {
  const auto a = seeded<double>({2, 2, 2}, 21), b = seeded<double>({2, 2}, 22);
  const auto p = permute(a, {2, 0, 1});  // new axis 0 is old axis 2
  EXPECT_LT(max_abs_diff(contract(p, b, {0}, {0}), contract_loop(permute(a, {2, 0, 1}), b, {0}, {0})), 1e-14);
  EXPECT_LT(max_abs_diff(contract(p, b, {0}, {0}), permute(contract_loop(a, b, {2}, {0}), {0, 1, 2})), 1e-14);
}

TEST(FuseSplit, ShapesAndRoundTrip) {
  const auto a = seeded<double>({2, 2, 4}, 1);
  EXPECT_EQ(fuse(a, {{0, 1}, {2}}).shape(), (Shape{4, 4}));
  const auto b = seeded<double>({2, 3, 4}, 2);
  const auto f = fuse(b, {{0}, {1, 2}});
  EXPECT_EQ(max_abs_diff(split(f, 1, {3, 4}), b), 0.0);
  EXPECT_THROW(split(f, 1, {5, 2}), ShapeError);
  EXPECT_THROW(fuse(b, {{1, 0}, {2}}), ShapeError);
}

TEST(FuseSplit, MatmulEqualsRank3Contraction) {
  const auto a = seeded<double>({2, 2, 2}, 31), b = seeded<double>({2, 2, 2}, 32);
  const auto m = contract(fuse(a, {{0}, {1, 2}}), fuse(b, {{0, 1}, {2}}), {1}, {0});
  EXPECT_LT(max_abs_diff(m, contract_loop(a, b, {1, 2}, {0, 1})), 1e-14);
}

TEST(RuntimeTensor, VariantOpsAndPrecisionTags) {
  const auto t = random_tensor({3, 4}, Precision::Z, 5);
  EXPECT_EQ(t.precision(), Precision::Z);
  EXPECT_EQ(permute(t, {1, 0}).shape(), (Shape{4, 3}));
  EXPECT_EQ(contract(t, permute(t, {1, 0}), {1}, {0}).shape(), (Shape{3, 3}));
  EXPECT_THROW(random_tensor({0, 2}, Precision::D, 1), ShapeError);
}

TEST(Svd, RankOneOuterProduct) {
  DenseTensor<double> m({3, 3});
  const double u[3] = {1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0}, v[3] = {0, 0.6, 0.8};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = u[i] * v[j];
  const auto r = svd(Tensor(m), {0}, {1}, 10);
  EXPECT_EQ(r.kept_rank, 1u);
  EXPECT_NEAR(r.singular_values[0], 1.0, 1e-14);
}

TEST(Svd, DiagonalTruncation) {
  DenseTensor<double> m({3, 3});
  m(0, 0) = 3;
  m(1, 1) = 2;
  m(2, 2) = 1;
  for (auto alg : {SvdAlgorithm::direct, SvdAlgorithm::via_eigh}) {
    const auto r = svd(Tensor(m), {0}, {1}, 2, kDefaultSvdCutoff, alg);
    ASSERT_EQ(r.singular_values.size(), 2u);
    EXPECT_NEAR(r.singular_values[0], 3.0, 1e-12);
    EXPECT_NEAR(r.singular_values[1], 2.0, 1e-12);
    EXPECT_NEAR(r.truncation_error, 1.0, 1e-12);
  }
}

TEST(Svd, ViaEighMatchesDirect) {
  const auto m = seeded<double>({8, 8}, 44);
  const auto a = svd_full(m, SvdAlgorithm::direct, kOpt), b = svd_full(m, SvdAlgorithm::via_eigh, kOpt);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(a.s[i], b.s[i], 1e-9 * a.s[0]);
  const auto z = seeded<cdouble>({5, 9}, 45);
  const auto c = svd_full(z, SvdAlgorithm::direct, kOpt), d = svd_full(z, SvdAlgorithm::via_eigh, kOpt);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(c.s[i], d.s[i], 1e-6 * c.s[i]);
}

TEST(Svd, ReconstructionErrorEqualsTruncationError) {
  for (auto alg : {SvdAlgorithm::direct, SvdAlgorithm::via_eigh}) {
    const auto a = seeded<double>({3, 4, 5}, 7);
    const auto sp = svd_split(a, {0, 2}, {1}, TruncationParams{3, 1e-12, 0}, alg);
    auto left = sp.left;
    scale_axis(left, 2, sp.s);
    const auto rec = permute(contract(left, sp.right, {2}, {0}), {0, 2, 1});
    auto diff = rec;
    diff -= a;
    EXPECT_NEAR(norm(diff), sp.truncation_error, 1e-10);
    EXPECT_LT(isometry_deviation(sp.left, 2), 1e-12);
  }
}

TEST(Svd, ZeroMatrixConvention) {
  const DenseTensor<double> z({4, 3});
  const auto r = svd(Tensor(z), {0}, {1}, 3);
  EXPECT_EQ(r.kept_rank, 1u);
  EXPECT_EQ(r.singular_values[0], 0.0);
  const auto& u = r.u.as<double>();
  double n = 0;
  for (std::size_t i = 0; i < 4; ++i) n += u(i, 0) * u(i, 0);
  EXPECT_NEAR(n, 1.0, 1e-12);
}

TEST(Svd, ArgumentAndNumericErrors) {
  const auto m = Tensor(seeded<double>({3, 3}, 1));
  EXPECT_THROW(svd(m, {0}, {1}, 0), ArgumentError);
  EXPECT_THROW(svd(m, {0}, {1}, 2, -1.0), ArgumentError);
  auto bad = seeded<double>({3, 3}, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(svd(Tensor(bad), {0}, {1}, 2), NumericError);
  EXPECT_THROW(qr(Tensor(bad), {0}, {1}), NumericError);
}

// Eckart-Young: the SVD truncation beats random rank-k projections.
TEST(Svd, EckartYoungAgainstRandomIsometries) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 3; ++trial) {
    const auto m = seeded<double>({6, 6}, 500 + trial);
    for (std::size_t k : {1u, 3u}) {
      const auto sp = svd_truncated(m, TruncationParams{k, 0.0, 0}, SvdAlgorithm::direct, kOpt);
      for (int r = 0; r < 100; ++r) {
        auto q = qr_matrix(random_dense<double>({6, k}, rng)).q;  // 6 x k isometry
        const auto proj = contract(q, contract(q, m, {0}, {0}), {1}, {0});
        auto diff = proj;
        diff -= m;
        EXPECT_LE(sp.truncation_error, norm(diff) + 1e-12);
      }
    }
  }
}

TEST(Qr, IdentityAndIsometry) {
  const auto r = qr(Tensor(DenseTensor<double>::identity(4)), {0}, {1});
  EXPECT_LT(max_abs_diff(contract(r.q, r.r, {1}, {0}), Tensor(DenseTensor<double>::identity(4))), 1e-14);
  const auto m = seeded<double>({6, 3}, 8);
  const auto [q, rr] = qr_split(m, {0}, {1});
  EXPECT_LT(column_isometry_deviation(q), 1e-12);
  const auto z = seeded<cdouble>({5, 7}, 9);
  const auto [qz, rz] = qr_split(z, {0}, {1});
  auto diff = contract(qz, rz, {1}, {0});
  diff -= z;
  EXPECT_LT(norm(diff), 1e-12);
  EXPECT_LT(column_isometry_deviation(qz), 1e-12);
}

TEST(Eigh, PauliSpectraAndTwoSiteBlock) {
  for (auto p : {Pauli::Z, Pauli::X}) {
    const auto r = eigh(Tensor(pauli_dense<double>(p)));
    EXPECT_NEAR(r.eigenvalues[0], -1.0, 1e-14);
    EXPECT_NEAR(r.eigenvalues[1], 1.0, 1e-14);
  }
  const double J = 1, g = 1;
  const auto r = eigh(Tensor(DenseTensor<double>({2, 2}, {-2 * g, -J, -J, 2 * g})));
  EXPECT_NEAR(r.eigenvalues[0], -std::sqrt(5.0), 1e-14);
  EXPECT_THROW(eigh(Tensor(DenseTensor<double>({2, 2}, {0, 1, 0, 0}))), ArgumentError);
}

TEST(Eigh, ReconstructionComplex) {
  auto a = seeded<cdouble>({6, 6}, 3);
  auto h = a;
  h += adjoint(a);
  const auto e = eigh_matrix(h);
  for (std::size_t i = 1; i < 6; ++i) EXPECT_LE(e.values[i - 1], e.values[i]);
  DenseTensor<cdouble> vd = e.vectors;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) vd(i, j) *= e.values[j];
  EXPECT_LT(max_abs_diff(contract(vd, conj(e.vectors), {1}, {1}), h), 1e-12);
}

TEST(Convert, RoundTripsAndLossyCheck) {
  const auto s = random_tensor({4, 5}, Precision::S, 3);
  EXPECT_EQ(max_abs_diff(convert(convert(s, Precision::Z), Precision::S), s), 0.0);
  const auto c = convert(random_tensor({3}, Precision::D, 1), Precision::C);
  for (const auto& x : c.as<cfloat>().data()) EXPECT_EQ(x.imag(), 0.0f);
  const auto d = random_tensor({50, 50}, Precision::D, 4);
  EXPECT_NEAR(convert(d, Precision::S).norm() / d.norm(), 1.0, 1e-6);
  const auto z = random_tensor({3, 3}, Precision::Z, 2);
  EXPECT_THROW(convert(z, Precision::D), PrecisionError);
}

TEST(Random, DeterminismAndMean) {
  EXPECT_EQ(max_abs_diff(random_tensor({4, 4}, Precision::D, 9), random_tensor({4, 4}, Precision::D, 9)), 0.0);
  EXPECT_GT(max_abs_diff(random_tensor({4, 4}, Precision::D, 9), random_tensor({4, 4}, Precision::D, 10)), 0.0);
  const auto big = random_tensor({100000}, Precision::D, 77).as<double>();
  double mean = 0, lo = 0, hi = 0;
  for (double x : big.data()) {
    mean += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  EXPECT_LT(std::abs(mean / 1e5), 0.02);
  EXPECT_GE(lo, -1.0);
  EXPECT_LE(hi, 1.0);
}

TEST(Serialization, RoundTripAllPrecisions) {
  for (auto p : {Precision::S, Precision::C, Precision::D, Precision::Z}) {
    const auto t = random_tensor({2, 3, 4}, p, 13);
    std::stringstream ss;
    write_tensor(ss, t);
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 4), "QTTN");
    const auto back = read_tensor(ss);
    EXPECT_EQ(back.precision(), p);
    EXPECT_EQ(max_abs_diff(back, t), 0.0);
  }
  std::stringstream junk("NOPE....");
  EXPECT_THROW(read_tensor(junk), Error);
}

TEST(Kernels, DirectGemmAndPermute) {
  const auto a = seeded<double>({17, 9}, 1), b = seeded<double>({9, 23}, 2);
  std::vector<double> c1(17 * 23), c2(17 * 23);
  kernels::reference::gemm<double>(17, 23, 9, a.raw(), b.raw(), c1.data());
  kernels::omp::gemm<double>(17, 23, 9, a.raw(), b.raw(), c2.data(), 4);
  const auto oracle = matmul_loop(a, b);
  for (std::size_t i = 0; i < c1.size(); ++i) {
    EXPECT_NEAR(c1[i], oracle[i], 1e-13);
    EXPECT_NEAR(c2[i], oracle[i], 1e-13);
  }
}

}  // namespace
}  // namespace qttn
