#pragma once

// Z2-graded block-sparse tensors. Each link splits into a charge-0 and a
// charge-1 sector; a block is stored per charge tuple whose charge sum is
// congruent to the tensor's flux mod 2. Node tensors of a state carry flux
// 0; renormalized sigma-x operators carry flux 1.
//
// In dense form the charge-0 sector of every link comes first.

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "qttn/tensor/decompose.hpp"
#include "qttn/tensor/dense.hpp"
#include "qttn/tensor/linalg.hpp"

namespace qttn {

enum class Z2Direction : std::uint8_t { incoming = 0, outgoing = 1 };

inline Z2Direction flip(Z2Direction d) {
  return d == Z2Direction::incoming ? Z2Direction::outgoing : Z2Direction::incoming;
}

struct Z2Link {
  std::array<std::size_t, 2> sector_dims{0, 0};
  Z2Direction direction = Z2Direction::incoming;

  std::size_t dim(int charge) const { return sector_dims[static_cast<std::size_t>(charge)]; }
  std::size_t total() const { return sector_dims[0] + sector_dims[1]; }
  std::size_t offset(int charge) const { return charge == 0 ? 0 : sector_dims[0]; }
  Z2Link flipped() const { return {sector_dims, flip(direction)}; }

  friend bool operator==(const Z2Link&, const Z2Link&) = default;
};

using ChargeKey = std::vector<std::uint8_t>;

namespace z2detail {

inline int charge_sum(const ChargeKey& key) {
  int s = 0;
  for (auto c : key) s += c;
  return s & 1;
}

inline Shape block_shape(const std::vector<Z2Link>& links, const ChargeKey& key) {
  Shape shape(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) shape[i] = links[i].dim(key[i]);
  return shape;
}

/// Calls f(key) for every charge tuple with sum == flux and non-empty sectors,
/// in lexicographic order.
template <typename F>
void for_each_allowed(const std::vector<Z2Link>& links, int flux, F&& f) {
  const std::size_t r = links.size();
  if (r >= 31) throw ArgumentError("rank too large");
  ChargeKey key(r, 0);
  for (std::uint32_t bits = 0; bits < (1u << r); ++bits) {
    bool ok = true;
    for (std::size_t i = 0; i < r; ++i) {
      key[i] = static_cast<std::uint8_t>((bits >> (r - 1 - i)) & 1u);
      if (links[i].dim(key[i]) == 0) ok = false;
    }
    if (ok && charge_sum(key) == flux) f(key);
  }
}

inline void check_flux(int flux) {
  if (flux != 0 && flux != 1) throw ChargeError("flux must be 0 or 1");
}

}  // namespace z2detail

template <Scalar T>
class Z2Tensor {
 public:
  using value_type = T;
  using BlockMap = std::map<ChargeKey, DenseTensor<T>>;

  /// Rank 0, flux 0, no blocks (the zero scalar).
  Z2Tensor() = default;
  explicit Z2Tensor(std::vector<Z2Link> links, int flux = 0) : links_(std::move(links)), flux_(flux) {
    z2detail::check_flux(flux);
  }

  const std::vector<Z2Link>& links() const { return links_; }
  const Z2Link& link(std::size_t i) const { return links_.at(i); }
  std::size_t rank() const { return links_.size(); }
  int flux() const { return flux_; }
  Shape shape() const {
    Shape s;
    for (const auto& l : links_) s.push_back(l.total());
    return s;
  }
  std::size_t dim(std::size_t axis) const { return links_.at(axis).total(); }

  const BlockMap& blocks() const { return blocks_; }
  BlockMap& mutable_blocks() { return blocks_; }

  bool allowed(const ChargeKey& key) const {
    if (key.size() != links_.size()) return false;
    for (auto c : key)
      if (c > 1) return false;
    return z2detail::charge_sum(key) == flux_;
  }

  Shape block_shape(const ChargeKey& key) const { return z2detail::block_shape(links_, key); }

  const DenseTensor<T>* find(const ChargeKey& key) const {
    auto it = blocks_.find(key);
    return it == blocks_.end() ? nullptr : &it->second;
  }

  void set_block(const ChargeKey& key, DenseTensor<T> block) {
    if (!allowed(key)) throw ChargeError("block violates charge conservation");
    if (block.shape() != block_shape(key)) throw ShapeError("block shape does not match sector dims");
    if (block.size() == 0) {
      blocks_.erase(key);
      return;
    }
    blocks_[key] = std::move(block);
  }

  /// Block for `key`, inserting zeros if absent.
  DenseTensor<T>& block(const ChargeKey& key) {
    auto it = blocks_.find(key);
    if (it != blocks_.end()) return it->second;
    if (!allowed(key)) throw ChargeError("block violates charge conservation");
    return blocks_.emplace(key, DenseTensor<T>(block_shape(key))).first->second;
  }

  /// Every allowed non-empty block allocated with zeros.
  static Z2Tensor zeros(std::vector<Z2Link> links, int flux = 0) {
    Z2Tensor t(std::move(links), flux);
    z2detail::for_each_allowed(t.links_, flux, [&](const ChargeKey& k) { t.blocks_.emplace(k, DenseTensor<T>(t.block_shape(k))); });
    return t;
  }

  std::size_t stored_elements() const {
    std::size_t n = 0;
    for (const auto& [k, b] : blocks_) n += b.size();
    return n;
  }

  /// Throws ChargeError if any stored block violates the conservation rule or its sector dims.
  void audit() const {
    for (const auto& [k, b] : blocks_) {
      if (!allowed(k)) throw ChargeError("stored block violates charge conservation");
      if (b.shape() != block_shape(k)) throw ShapeError("stored block has wrong shape");
    }
  }

 private:
  std::vector<Z2Link> links_;
  int flux_ = 0;
  BlockMap blocks_;
};

template <Scalar T>
DenseTensor<T> densify(const Z2Tensor<T>& a) {
  DenseTensor<T> out(a.shape());
  const std::size_t r = a.rank();
  const Shape full = a.shape();
  for (const auto& [key, blk] : a.blocks()) {
    Shape off(r);
    for (std::size_t i = 0; i < r; ++i) off[i] = a.link(i).offset(key[i]);
    const Shape& bs = blk.shape();
    std::vector<std::size_t> idx(r, 0);
    for (std::size_t e = 0; e < blk.size(); ++e) {
      std::size_t flat = 0;
      for (std::size_t i = 0; i < r; ++i) flat = flat * full[i] + off[i] + idx[i];
      out[flat] = blk[e];
      for (std::size_t i = r; i-- > 0;) {
        if (++idx[i] < bs[i]) break;
        idx[i] = 0;
      }
    }
  }
  return out;
}

/// Extracts the allowed blocks of `dense`. Entries outside allowed blocks
/// must not exceed `tolerance` in magnitude, else ChargeError.
template <Scalar T>
Z2Tensor<T> sparsify(const DenseTensor<T>& dense, std::vector<Z2Link> links, int flux, double tolerance = 0.0) {
  Z2Tensor<T> out(std::move(links), flux);
  if (dense.shape() != out.shape()) throw ShapeError("sparsify: dense shape does not match links");
  const std::size_t r = out.rank();
  const Shape full = out.shape();
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t e = 0; e < dense.size(); ++e) {
    ChargeKey key(r);
    std::size_t flat = 0;
    Shape local(r);
    for (std::size_t i = 0; i < r; ++i) {
      key[i] = idx[i] >= out.link(i).sector_dims[0] ? 1 : 0;
      local[i] = idx[i] - out.link(i).offset(key[i]);
    }
    const T v = dense[e];
    if (out.allowed(key)) {
      auto& blk = out.block(key);
      const Shape& bs = blk.shape();
      for (std::size_t i = 0; i < r; ++i) flat = flat * bs[i] + local[i];
      blk[flat] = v;
    } else if (std::abs(v) > tolerance) {
      throw ChargeError("sparsify: non-zero entry in a forbidden block");
    }
    for (std::size_t i = r; i-- > 0;) {
      if (++idx[i] < full[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

template <Scalar T>
Z2Tensor<T> bcontract(const Z2Tensor<T>& a, const Z2Tensor<T>& b, const Axes& axes_a, const Axes& axes_b,
                      const BackendId& backend = {}) {
  if (axes_a.size() != axes_b.size()) throw ArgumentError("bcontract: axis lists differ in length");
  std::vector<bool> ca(a.rank(), false), cb(b.rank(), false);
  for (std::size_t i = 0; i < axes_a.size(); ++i) {
    const auto x = axes_a[i], y = axes_b[i];
    if (x >= a.rank() || y >= b.rank() || ca[x] || cb[y]) throw ArgumentError("bcontract: invalid axes");
    ca[x] = cb[y] = true;
    if (a.link(x).sector_dims != b.link(y).sector_dims)
      throw ChargeError("bcontract: paired links have different sector dims");
    if (a.link(x).direction == b.link(y).direction)
      throw ChargeError("bcontract: paired links must have opposite directions");
  }
  std::vector<Z2Link> links;
  Axes free_a, free_b;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!ca[i]) {
      free_a.push_back(i);
      links.push_back(a.link(i));
    }
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!cb[i]) {
      free_b.push_back(i);
      links.push_back(b.link(i));
    }
  Z2Tensor<T> out(std::move(links), (a.flux() + b.flux()) & 1);
  ChargeKey key;
  for (const auto& [ka, blka] : a.blocks()) {
    for (const auto& [kb, blkb] : b.blocks()) {
      bool match = true;
      for (std::size_t i = 0; i < axes_a.size() && match; ++i) match = ka[axes_a[i]] == kb[axes_b[i]];
      if (!match) continue;
      key.clear();
      for (auto i : free_a) key.push_back(ka[i]);
      for (auto i : free_b) key.push_back(kb[i]);
      auto prod = contract(blka, blkb, axes_a, axes_b, backend);
      auto it = out.mutable_blocks().find(key);
      if (it == out.mutable_blocks().end()) out.mutable_blocks().emplace(key, std::move(prod));
      else it->second += prod;
    }
  }
  return out;
}

template <Scalar T>
Z2Tensor<T> contract(const Z2Tensor<T>& a, const Z2Tensor<T>& b, const Axes& axes_a, const Axes& axes_b,
                     const BackendId& backend = {}) {
  return bcontract(a, b, axes_a, axes_b, backend);
}

template <Scalar T>
Z2Tensor<T> permute(const Z2Tensor<T>& a, const Axes& order, const BackendId& backend = {}) {
  detail::check_permutation(order, a.rank());
  std::vector<Z2Link> links;
  for (auto o : order) links.push_back(a.link(o));
  Z2Tensor<T> out(std::move(links), a.flux());
  for (const auto& [k, b] : a.blocks()) {
    ChargeKey nk;
    for (auto o : order) nk.push_back(k[o]);
    out.mutable_blocks().emplace(std::move(nk), permute(b, order, backend));
  }
  return out;
}

/// Complex conjugate with all link directions reversed.
template <Scalar T>
Z2Tensor<T> conj(const Z2Tensor<T>& a) {
  std::vector<Z2Link> links;
  for (const auto& l : a.links()) links.push_back(l.flipped());
  Z2Tensor<T> out(std::move(links), a.flux());
  for (const auto& [k, b] : a.blocks()) out.mutable_blocks().emplace(k, conj(b));
  return out;
}

template <Scalar T>
T dot(const Z2Tensor<T>& a, const Z2Tensor<T>& b) {
  T s{};
  for (const auto& [k, blk] : a.blocks())
    if (const auto* o = b.find(k)) s += dot(blk, *o);
  return s;
}

template <Scalar T>
double norm(const Z2Tensor<T>& a) {
  double s = 0.0;
  for (const auto& [k, b] : a.blocks()) {
    const double n = norm(b);
    s += n * n;
  }
  return std::sqrt(s);
}

template <Scalar T>
void scale(Z2Tensor<T>& a, T s) {
  for (auto& [k, b] : a.mutable_blocks()) b *= s;
}

template <Scalar T>
void axpy(Z2Tensor<T>& y, T alpha, const Z2Tensor<T>& x) {
  if (x.flux() != y.flux()) throw ChargeError("axpy: flux mismatch");
  for (std::size_t i = 0; i < x.rank(); ++i)
    if (x.rank() != y.rank() || x.link(i).sector_dims != y.link(i).sector_dims)
      throw ShapeError("axpy: link mismatch");
  for (const auto& [k, b] : x.blocks()) axpy(y.block(k), alpha, b);
}

template <Scalar T>
double max_abs_diff(const Z2Tensor<T>& a, const Z2Tensor<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (const auto& [k, blk] : a.blocks()) {
    if (const auto* o = b.find(k)) m = std::max(m, max_abs_diff(blk, *o));
    else
      for (const auto& x : blk.data()) m = std::max(m, static_cast<double>(std::abs(x)));
  }
  for (const auto& [k, blk] : b.blocks())
    if (!a.find(k))
      for (const auto& x : blk.data()) m = std::max(m, static_cast<double>(std::abs(x)));
  return m;
}

template <Scalar T>
bool all_finite(const Z2Tensor<T>& a) {
  for (const auto& [k, b] : a.blocks())
    if (!all_finite(b)) return false;
  return true;
}

template <Scalar U, Scalar T>
Z2Tensor<U> convert(const Z2Tensor<T>& a) {
  Z2Tensor<U> out(a.links(), a.flux());
  for (const auto& [k, b] : a.blocks()) out.mutable_blocks().emplace(k, convert<U>(b));
  return out;
}

template <Scalar T, typename Rng>
Z2Tensor<T> random_z2(std::vector<Z2Link> links, int flux, Rng& rng) {
  auto t = Z2Tensor<T>::zeros(std::move(links), flux);
  for (auto& [k, b] : t.mutable_blocks()) b = random_dense<T>(b.shape(), rng);
  return t;
}

// ---------------------------------------------------------------------------
// Decompositions. A (left | right) partition groups blocks by the charge sum
// of the left links; each group is one dense matrix.

namespace z2detail {

/// Charge tuples over a subset of links with the given charge sum, each with
/// its row (or column) offset inside the sector matrix.
struct SectorIndex {
  std::vector<ChargeKey> keys;
  std::vector<std::size_t> offsets;
  std::vector<Shape> shapes;
  std::size_t total = 0;
};

inline SectorIndex sector_index(const std::vector<Z2Link>& links, int charge) {
  SectorIndex idx;
  for_each_allowed(links, charge, [&](const ChargeKey& k) {
    Shape s = block_shape(links, k);
    idx.keys.push_back(k);
    idx.offsets.push_back(idx.total);
    idx.total += shape_size(s);
    idx.shapes.push_back(std::move(s));
  });
  return idx;
}

template <Scalar T>
struct SectorMatrices {
  std::vector<Z2Link> left_links, right_links;
  std::array<SectorIndex, 2> rows, cols;  // indexed by left charge sum
  std::array<DenseTensor<T>, 2> mats;
};

template <Scalar T>
SectorMatrices<T> sector_matrices(const Z2Tensor<T>& a, const Axes& left, const Axes& right, const BackendId& be) {
  detail::check_partition(left, right, a.rank());
  SectorMatrices<T> sm;
  for (auto ax : left) sm.left_links.push_back(a.link(ax));
  for (auto ax : right) sm.right_links.push_back(a.link(ax));
  Axes order = left;
  order.insert(order.end(), right.begin(), right.end());
  for (int c = 0; c < 2; ++c) {
    sm.rows[c] = sector_index(sm.left_links, c);
    sm.cols[c] = sector_index(sm.right_links, (a.flux() + c) & 1);
    sm.mats[c] = DenseTensor<T>({sm.rows[c].total, sm.cols[c].total});
  }
  for (const auto& [k, blk] : a.blocks()) {
    ChargeKey kl, kr;
    for (auto ax : left) kl.push_back(k[ax]);
    for (auto ax : right) kr.push_back(k[ax]);
    const int c = charge_sum(kl);
    const auto& ri = sm.rows[c];
    const auto& ci = sm.cols[c];
    const auto rpos = std::find(ri.keys.begin(), ri.keys.end(), kl) - ri.keys.begin();
    const auto cpos = std::find(ci.keys.begin(), ci.keys.end(), kr) - ci.keys.begin();
    const std::size_t r0 = ri.offsets[rpos], c0 = ci.offsets[cpos];
    const std::size_t nr = shape_size(ri.shapes[rpos]), nc = shape_size(ci.shapes[cpos]);
    const auto p = permute(blk, order, be);
    auto& m = sm.mats[c];
    const std::size_t ld = m.dim(1);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) m[(r0 + i) * ld + c0 + j] = p[i * nc + j];
  }
  return sm;
}

/// Cuts rows [r0, r0+nr) and columns [c0, c0+nc) of a row-major matrix.
template <Scalar T>
DenseTensor<T> submatrix(const DenseTensor<T>& m, std::size_t r0, std::size_t nr, std::size_t c0, std::size_t nc) {
  DenseTensor<T> out({nr, nc});
  const std::size_t ld = m.dim(1);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) out[i * nc + j] = m[(r0 + i) * ld + c0 + j];
  return out;
}

}  // namespace z2detail

template <Scalar T>
struct Z2SvdSplit {
  Z2Tensor<T> left;   // (left links..., k), flux 0
  std::vector<double> s;  // kept values, non-increasing, merged over charges
  std::vector<int> s_charges;
  Z2Tensor<T> right;  // (k, right links...), flux of the input
  double truncation_error = 0.0;
  std::size_t kept_rank = 0;
};

/// Block-wise SVD with global truncation. The new link on `left` gets
/// direction `new_dir`; the matching link on `right` the opposite.
/// Ties in the global ordering go to the lower charge, then the lower index.
template <Scalar T>
Z2SvdSplit<T> svd_split(const Z2Tensor<T>& a, const Axes& left, const Axes& right, const TruncationParams& params,
                        SvdAlgorithm algorithm, const BackendId& be = {},
                        Z2Direction new_dir = Z2Direction::outgoing) {
  auto sm = z2detail::sector_matrices(a, left, right, be);
  std::array<MatrixSvd<T>, 2> svds;
  struct Entry {
    double s;
    int charge;
    std::size_t index;
  };
  std::vector<Entry> all;
  for (int c = 0; c < 2; ++c) {
    if (sm.rows[c].total == 0 || sm.cols[c].total == 0) continue;
    svds[c] = svd_full(sm.mats[c], algorithm, be);
    for (std::size_t i = 0; i < svds[c].s.size(); ++i) all.push_back({svds[c].s[i], c, i});
  }
  if (all.empty()) throw ShapeError("svd_split: no admissible sector");
  std::stable_sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) {
    if (x.s != y.s) return x.s > y.s;
    if (x.charge != y.charge) return x.charge < y.charge;
    return x.index < y.index;
  });
  std::vector<double> values;
  for (const auto& e : all) values.push_back(e.s);
  const std::size_t kept = choose_rank(values, params);
  std::array<std::size_t, 2> k{0, 0};
  Z2SvdSplit<T> out;
  for (std::size_t i = 0; i < kept; ++i) {
    ++k[all[i].charge];
    out.s.push_back(all[i].s);
    out.s_charges.push_back(all[i].charge);
  }
  out.kept_rank = kept;
  out.truncation_error = discarded_weight(values, kept);

  Z2Link bond{{k[0], k[1]}, new_dir};
  auto llinks = sm.left_links;
  llinks.push_back(bond);
  std::vector<Z2Link> rlinks{bond.flipped()};
  rlinks.insert(rlinks.end(), sm.right_links.begin(), sm.right_links.end());
  out.left = Z2Tensor<T>(llinks, 0);
  out.right = Z2Tensor<T>(rlinks, a.flux());
  for (int c = 0; c < 2; ++c) {
    if (k[c] == 0) continue;
    // Kept singular vectors of a sector are its leading ones, in order.
    const auto& u = svds[c].u;
    const auto& v = svds[c].v;
    const auto& ri = sm.rows[c];
    for (std::size_t b = 0; b < ri.keys.size(); ++b) {
      ChargeKey key = ri.keys[b];
      key.push_back(static_cast<std::uint8_t>(c));
      const std::size_t nr = shape_size(ri.shapes[b]);
      out.left.set_block(key, z2detail::submatrix(u, ri.offsets[b], nr, 0, k[c]).reshaped(detail::with_trailing(ri.shapes[b], k[c])));
    }
    const auto& ci = sm.cols[c];
    for (std::size_t b = 0; b < ci.keys.size(); ++b) {
      ChargeKey key{static_cast<std::uint8_t>(c)};
      key.insert(key.end(), ci.keys[b].begin(), ci.keys[b].end());
      const std::size_t nc = shape_size(ci.shapes[b]);
      out.right.set_block(key, z2detail::submatrix(v, 0, k[c], ci.offsets[b], nc).reshaped(detail::with_leading(k[c], ci.shapes[b])));
    }
  }
  return out;
}

/// Block-wise thin QR. Q: (left links..., k) with flux 0, R: (k, right links...).
template <Scalar T>
std::pair<Z2Tensor<T>, Z2Tensor<T>> qr_split(const Z2Tensor<T>& a, const Axes& left, const Axes& right,
                                             const BackendId& be = {},
                                             Z2Direction new_dir = Z2Direction::outgoing) {
  auto sm = z2detail::sector_matrices(a, left, right, be);
  std::array<MatrixQr<T>, 2> qrs;
  std::array<std::size_t, 2> k{0, 0};
  for (int c = 0; c < 2; ++c) {
    if (sm.rows[c].total == 0 || sm.cols[c].total == 0) continue;
    qrs[c] = qr_matrix(sm.mats[c]);
    k[c] = qrs[c].q.dim(1);
  }
  Z2Link bond{{k[0], k[1]}, new_dir};
  auto llinks = sm.left_links;
  llinks.push_back(bond);
  std::vector<Z2Link> rlinks{bond.flipped()};
  rlinks.insert(rlinks.end(), sm.right_links.begin(), sm.right_links.end());
  Z2Tensor<T> q(llinks, 0), r(rlinks, a.flux());
  for (int c = 0; c < 2; ++c) {
    if (k[c] == 0) continue;
    const auto& ri = sm.rows[c];
    for (std::size_t b = 0; b < ri.keys.size(); ++b) {
      ChargeKey key = ri.keys[b];
      key.push_back(static_cast<std::uint8_t>(c));
      q.set_block(key, z2detail::submatrix(qrs[c].q, ri.offsets[b], shape_size(ri.shapes[b]), 0, k[c])
                           .reshaped(detail::with_trailing(ri.shapes[b], k[c])));
    }
    const auto& ci = sm.cols[c];
    for (std::size_t b = 0; b < ci.keys.size(); ++b) {
      ChargeKey key{static_cast<std::uint8_t>(c)};
      key.insert(key.end(), ci.keys[b].begin(), ci.keys[b].end());
      r.set_block(key, z2detail::submatrix(qrs[c].r, 0, k[c], ci.offsets[b], shape_size(ci.shapes[b]))
                           .reshaped(detail::with_leading(k[c], ci.shapes[b])));
    }
  }
  return {std::move(q), std::move(r)};
}

template <Scalar T>
struct Z2Eigh {
  std::vector<double> values;  // ascending over both charges
  std::vector<int> charges;    // charge of each value
  Z2Tensor<T> vectors;         // (first-half links..., k); new link charge c holds sector-c vectors
};

/// Block-wise Hermitian eigendecomposition of a flux-0 tensor of rank 2m,
/// matricized as (first m links) x (last m links).
template <Scalar T>
Z2Eigh<T> beigh(const Z2Tensor<T>& a, const BackendId& be = {}) {
  if (a.rank() == 0 || a.rank() % 2) throw ShapeError("beigh expects an even-rank tensor");
  if (a.flux() != 0) throw ChargeError("beigh expects a flux-0 tensor");
  Axes left, right;
  for (std::size_t i = 0; i < a.rank(); ++i) (i < a.rank() / 2 ? left : right).push_back(i);
  auto sm = z2detail::sector_matrices(a, left, right, be);
  std::array<MatrixEigh<T>, 2> eig;
  std::array<std::size_t, 2> k{0, 0};
  struct Entry {
    double v;
    int charge;
    std::size_t index;
  };
  std::vector<Entry> all;
  for (int c = 0; c < 2; ++c) {
    if (sm.rows[c].total != sm.cols[c].total) throw ShapeError("beigh: non-square sector");
    if (sm.rows[c].total == 0) continue;
    eig[c] = eigh_matrix(sm.mats[c]);
    k[c] = eig[c].values.size();
    for (std::size_t i = 0; i < k[c]; ++i) all.push_back({eig[c].values[i], c, i});
  }
  std::stable_sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) {
    if (x.v != y.v) return x.v < y.v;
    if (x.charge != y.charge) return x.charge < y.charge;
    return x.index < y.index;
  });
  Z2Eigh<T> out;
  for (const auto& e : all) {
    out.values.push_back(e.v);
    out.charges.push_back(e.charge);
  }
  auto links = sm.left_links;
  links.push_back(Z2Link{{k[0], k[1]}, Z2Direction::outgoing});
  out.vectors = Z2Tensor<T>(links, 0);
  for (int c = 0; c < 2; ++c) {
    if (k[c] == 0) continue;
    const auto& ri = sm.rows[c];
    for (std::size_t b = 0; b < ri.keys.size(); ++b) {
      ChargeKey key = ri.keys[b];
      key.push_back(static_cast<std::uint8_t>(c));
      out.vectors.set_block(key, z2detail::submatrix(eig[c].vectors, ri.offsets[b], shape_size(ri.shapes[b]), 0, k[c])
                                     .reshaped(detail::with_trailing(ri.shapes[b], k[c])));
    }
  }
  return out;
}

/// Deviation from being an isometry from all other links onto `axis`.
template <Scalar T>
double isometry_deviation(const Z2Tensor<T>& a, std::size_t axis, const BackendId& be = {}) {
  Axes others;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (i != axis) others.push_back(i);
  const auto gram = bcontract(conj(a), a, others, others, be);
  double dev = 0.0;
  for (int c = 0; c < 2; ++c) {
    const std::size_t n = a.link(axis).dim(c);
    if (n == 0) continue;
    const ChargeKey key{static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(c)};
    const auto* blk = gram.find(key);
    dev = std::max(dev, blk ? max_abs_diff(*blk, DenseTensor<T>::identity(n)) : 1.0);
  }
  return dev;
}

}  // namespace qttn
