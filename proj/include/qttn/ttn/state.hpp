#pragma once

// Tree tensor network state with a single isometry center.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "qttn/tensor/tensor.hpp"
#include "qttn/ttn/tensor_ops.hpp"
#include "qttn/ttn/topology.hpp"

namespace qttn {

struct TruncationReport {
  std::size_t kept_rank = 0;
  double truncation_error = 0.0;
  std::vector<double> singular_values;
};

template <NodeTensor Ten>
class TTNState {
 public:
  using tensor_type = Ten;
  using scalar_type = typename Ten::value_type;

  TTNState() = default;
  TTNState(TTNTopology topology, std::vector<Ten> tensors, std::size_t center, std::size_t chi, BackendId backend)
      : topology_(std::move(topology)), tensors_(std::move(tensors)), center_(center), chi_(chi), backend_(backend),
        changed_at_(tensors_.size(), 0) {
    if (tensors_.size() != topology_.num_nodes()) throw TopologyError("tensor count does not match topology");
    if (center_ >= tensors_.size()) throw TopologyError("center out of range");
    for (const auto& t : tensors_)
      if (t.rank() != 3) throw ShapeError("node tensors must have rank 3");
  }

  const TTNTopology& topology() const { return topology_; }
  const Ten& tensor(std::size_t node) const { return tensors_.at(node); }
  const std::vector<Ten>& tensors() const { return tensors_; }
  std::size_t center() const { return center_; }
  std::size_t chi() const { return chi_; }
  const BackendId& backend() const { return backend_; }
  void set_backend(BackendId b) { backend_ = b; }
  static constexpr Precision precision() { return precision_of<scalar_type>(); }
  static constexpr bool symmetric() { return is_z2_tensor_v<Ten>; }

  std::size_t bond_dim(std::size_t node, std::size_t leg) const { return tensors_.at(node).dim(leg); }

  /// Replaces a tensor; the shape may only change on legs whose neighbors are updated consistently by the caller.
  void set_tensor(std::size_t node, Ten t) {
    tensors_.at(node) = std::move(t);
    mark(node);
  }

  /// Change bookkeeping consumed by environment caches.
  std::uint64_t change_counter() const { return counter_; }
  std::uint64_t changed_at(std::size_t node) const { return changed_at_[node]; }

  double norm() const { return qttn::norm(tensors_[center_]); }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("cannot normalize a zero or non-finite state");
    scale(tensors_[center_], scalar_type(real_t<scalar_type>(1.0 / n)));
    mark(center_);
  }

  /// Moves the isometry center along the tree path with QR steps. Exact.
  void move_center(std::size_t target) {
    const auto p = topology_.path(center_, target);
    for (std::size_t i = 1; i < p.size(); ++i) step_qr(p[i]);
  }

  /// Moves the center to the adjacent node `next`, truncating the shared link by SVD.
  TruncationReport move_center_svd(std::size_t next, const TruncationParams& params,
                                   SvdAlgorithm algorithm = SvdAlgorithm::direct, bool renormalize = false) {
    const std::size_t leg = topology_.leg_towards(center_, next);
    auto sp = ops::split_svd(tensors_[center_], leg, params, algorithm, backend_);
    TruncationReport rep{sp.kept_rank, sp.truncation_error, sp.s};
    absorb(next, std::move(sp));
    if (renormalize) normalize();
    return rep;
  }

  /// Largest deviation from the isometry condition over all non-center nodes.
  double isometry_audit() const {
    double dev = 0.0;
    for (std::size_t n = 0; n < tensors_.size(); ++n) {
      if (n == center_) continue;
      const std::size_t leg = topology_.leg_towards(n, topology_.path(n, center_)[1]);
      dev = std::max(dev, ops::isometry_error(tensors_[n], leg, backend_));
    }
    return dev;
  }

  template <Scalar U>
  TTNState<rebind_scalar_t<Ten, U>> converted() const {
    std::vector<rebind_scalar_t<Ten, U>> ts;
    ts.reserve(tensors_.size());
    for (const auto& t : tensors_) ts.push_back(ops::convert_tensor<U>(t));
    return {topology_, std::move(ts), center_, chi_, backend_};
  }

  /// Restores the isometry condition after a lossy conversion: QR sweeps from
  /// the leaves up and from the top down toward the center.
  void reisometrize() {
    const std::size_t target = center_;
    // Bottom-up pass pushes the gauge to the top, then move the center back.
    for (std::size_t n = 0; n < topology_.num_nodes(); ++n) {
      if (n == topology_.top()) break;
      center_ = n;
      step_qr(topology_.node(n).parent);
      // R factors multiply norms up the tree; keep the carried center at unit
      // scale so deep trees stay finite in single precision.
      const double c = qttn::norm(tensors_[center_]);
      if (c > 0.0 && std::isfinite(c)) scale(tensors_[center_], scalar_type(real_t<scalar_type>(1.0 / c)));
    }
    move_center(target);
  }

 private:
  void mark(std::size_t node) { changed_at_[node] = ++counter_; }

  void step_qr(std::size_t next) {
    const std::size_t leg = topology_.leg_towards(center_, next);
    absorb(next, ops::split_qr(tensors_[center_], leg, backend_));
  }

  void absorb(std::size_t next, ops::BondSplit<Ten> sp) {
    const std::size_t back = topology_.leg_towards(next, center_);
    tensors_[next] = ops::apply_on_leg(tensors_[next], sp.carry, back, backend_);
    tensors_[center_] = std::move(sp.iso);
    mark(center_);
    mark(next);
    center_ = next;
  }

  TTNTopology topology_;
  std::vector<Ten> tensors_;
  std::size_t center_ = 0;
  std::size_t chi_ = 0;
  BackendId backend_{};
  std::uint64_t counter_ = 0;
  std::vector<std::uint64_t> changed_at_;
};

// ---------------------------------------------------------------------------
// Construction.

/// Link dimension of the parent leg of `node`: min(chi, 2^sites below), 1 at the top.
inline std::size_t natural_bond_dim(const TTNTopology& topo, std::size_t node, std::size_t chi) {
  if (node == topo.top()) return 1;
  const std::size_t n = topo.node(node).num_sites;
  if (n >= 63) return chi;
  return std::min(chi, std::size_t{1} << n);
}

/// Z2 sector dims of the parent leg given the children's sector dims: the
/// target dimension is split as evenly as the children allow.
inline std::array<std::size_t, 2> z2_parent_sectors(const std::array<std::size_t, 2>& a,
                                                    const std::array<std::size_t, 2>& b, std::size_t target) {
  const std::size_t avail0 = a[0] * b[0] + a[1] * b[1];
  const std::size_t avail1 = a[0] * b[1] + a[1] * b[0];
  target = std::min(target, avail0 + avail1);
  std::size_t p0 = std::min((target + 1) / 2, avail0);
  const std::size_t p1 = std::min(target - p0, avail1);
  p0 = std::min(target - p1, avail0);
  return {p0, p1};
}

namespace detail {

template <NodeTensor Ten>
TTNState<Ten> isometrized(TTNTopology topo, std::vector<Ten> ts, std::size_t chi, const BackendId& be) {
  TTNState<Ten> st(topo, std::move(ts), 0, chi, be);
  st.reisometrize();
  st.move_center(st.topology().top());
  st.normalize();
  return st;
}

}  // namespace detail

/// Random state: entries drawn in double precision (real) from the seed and
/// cast to the state's scalar, then isometrized toward the top and normalized.
template <NodeTensor Ten>
TTNState<Ten> random_state(const TTNTopology& topo, std::size_t chi, std::uint64_t seed, BackendId be = {}) {
  using T = typename Ten::value_type;
  if (chi < 2) throw ArgumentError("bond dimension must be >= 2");
  std::mt19937_64 rng(seed);
  std::vector<Ten> ts;
  ts.reserve(topo.num_nodes());
  if constexpr (is_z2_tensor_v<Ten>) {
    std::vector<std::array<std::size_t, 2>> parent_sectors(topo.num_nodes());
    for (std::size_t n = 0; n < topo.num_nodes(); ++n) {
      const auto& nd = topo.node(n);
      std::array<std::size_t, 2> c0{1, 1}, c1{1, 1};
      if (nd.layer > 0) {
        c0 = parent_sectors[nd.children[0]];
        c1 = parent_sectors[nd.children[1]];
      }
      parent_sectors[n] = n == topo.top() ? std::array<std::size_t, 2>{1, 0}
                                          : z2_parent_sectors(c0, c1, natural_bond_dim(topo, n, chi));
      std::vector<Z2Link> links{{c0, Z2Direction::incoming}, {c1, Z2Direction::incoming},
                                {parent_sectors[n], Z2Direction::outgoing}};
      ts.push_back(convert<T>(random_z2<double>(std::move(links), 0, rng)));
    }
  } else {
    for (std::size_t n = 0; n < topo.num_nodes(); ++n) {
      const auto& nd = topo.node(n);
      const std::size_t d0 = nd.layer == 0 ? 2 : natural_bond_dim(topo, nd.children[0], chi);
      const std::size_t d1 = nd.layer == 0 ? 2 : natural_bond_dim(topo, nd.children[1], chi);
      ts.push_back(convert<T>(random_dense<double>({d0, d1, natural_bond_dim(topo, n, chi)}, rng)));
    }
  }
  return detail::isometrized<Ten>(topo, std::move(ts), chi, be);
}

/// Product state with every link of dimension 1 (dense only); `local[s]` is the
/// (unnormalized) single-site vector of leaf s.
template <Scalar T>
TTNState<DenseTensor<T>> product_state(const TTNTopology& topo, const std::vector<std::array<T, 2>>& local,
                                       std::size_t chi = 2, BackendId be = {}) {
  if (local.size() != topo.num_sites()) throw ArgumentError("product_state: one local vector per site required");
  std::vector<DenseTensor<T>> ts;
  for (std::size_t n = 0; n < topo.num_nodes(); ++n) {
    const auto& nd = topo.node(n);
    if (nd.layer > 0) {
      ts.emplace_back(Shape{1, 1, 1}, std::vector<T>{T{1}});
      continue;
    }
    const auto& u = local[nd.first_site];
    const auto& v = local[nd.first_site + 1];
    DenseTensor<T> t({2, 2, 1});
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) t(i, j, 0) = u[i] * v[j];
    ts.push_back(std::move(t));
  }
  TTNState<DenseTensor<T>> st(topo, std::move(ts), topo.top(), std::max<std::size_t>(chi, 2), be);
  st.reisometrize();
  st.normalize();
  return st;
}

/// Computational basis state |bits> (sigma-z eigenstates) with unit links.
/// For Z2 states the total parity must be even.
template <NodeTensor Ten>
TTNState<Ten> basis_state(const TTNTopology& topo, const std::vector<int>& bits, std::size_t chi = 2,
                          BackendId be = {}) {
  using T = typename Ten::value_type;
  if (bits.size() != topo.num_sites()) throw ArgumentError("basis_state: one bit per site required");
  for (int b : bits)
    if (b != 0 && b != 1) throw ArgumentError("basis_state: bits must be 0 or 1");
  std::vector<Ten> ts;
  std::vector<int> charge(topo.num_nodes());
  for (std::size_t n = 0; n < topo.num_nodes(); ++n) {
    const auto& nd = topo.node(n);
    const int c0 = nd.layer == 0 ? bits[nd.first_site] : charge[nd.children[0]];
    const int c1 = nd.layer == 0 ? bits[nd.first_site + 1] : charge[nd.children[1]];
    charge[n] = c0 ^ c1;
    if constexpr (is_z2_tensor_v<Ten>) {
      auto sector = [](int c, std::size_t d) {
        return c == 0 ? std::array<std::size_t, 2>{d, 0} : std::array<std::size_t, 2>{0, d};
      };
      std::array<std::size_t, 2> s0 = nd.layer == 0 ? std::array<std::size_t, 2>{1, 1} : sector(c0, 1);
      std::array<std::size_t, 2> s1 = nd.layer == 0 ? std::array<std::size_t, 2>{1, 1} : sector(c1, 1);
      if (n == topo.top() && charge[n] != 0) throw ChargeError("basis_state: odd parity is outside the even sector");
      Ten t({{s0, Z2Direction::incoming}, {s1, Z2Direction::incoming}, {sector(charge[n], 1), Z2Direction::outgoing}}, 0);
      t.set_block({static_cast<std::uint8_t>(c0), static_cast<std::uint8_t>(c1), static_cast<std::uint8_t>(charge[n])},
                  DenseTensor<T>({1, 1, 1}, {T{1}}));
      ts.push_back(std::move(t));
    } else {
      if (nd.layer == 0) {
        DenseTensor<T> t({2, 2, 1});
        t(c0, c1, 0) = T{1};
        ts.push_back(std::move(t));
      } else {
        ts.emplace_back(Shape{1, 1, 1}, std::vector<T>{T{1}});
      }
    }
  }
  return TTNState<Ten>(topo, std::move(ts), topo.top(), std::max<std::size_t>(chi, 2), be);
}

/// Full statevector (num_sites <= 16). Leaf s is bit (num_sites - 1 - s) of the index.
template <NodeTensor Ten>
DenseTensor<typename Ten::value_type> densify_state(const TTNState<Ten>& st) {
  using T = typename Ten::value_type;
  const auto& topo = st.topology();
  if (topo.num_sites() > 16) throw ArgumentError("densify_state supports at most 16 sites");
  const BackendId& be = st.backend();
  std::vector<DenseTensor<T>> sub(topo.num_nodes());  // (2^sites, parent dim)
  for (std::size_t n = 0; n < topo.num_nodes(); ++n) {
    const auto& nd = topo.node(n);
    auto t = ops::to_dense(st.tensor(n));
    if (nd.layer == 0) {
      sub[n] = t.reshaped({t.dim(0) * t.dim(1), t.dim(2)});
      continue;
    }
    const auto& a = sub[nd.children[0]];
    const auto& b = sub[nd.children[1]];
    auto x = contract(a, t, {1}, {0}, be);      // (A, d1, dp)
    auto y = contract(x, b, {1}, {1}, be);      // (A, dp, B)
    auto z = permute(y, {0, 2, 1}, be);         // (A, B, dp)
    sub[n] = z.reshaped({a.dim(0) * b.dim(0), t.dim(2)});
    sub[nd.children[0]] = {};
    sub[nd.children[1]] = {};
  }
  auto& top = sub[topo.top()];
  return top.reshaped({top.size()});
}

/// True when the parent link equals the product of the child links, i.e. nothing
/// below this node has been truncated.
template <NodeTensor Ten>
bool is_ergt(const TTNState<Ten>& st, std::size_t node) {
  const auto& t = st.tensor(node);
  return t.dim(kParent) == t.dim(kChild0) * t.dim(kChild1);
}

}  // namespace qttn
