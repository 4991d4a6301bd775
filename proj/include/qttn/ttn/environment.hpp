#pragma once

// Cached renormalized operators for a Pauli-sum Hamiltonian on a TTN.
//
// Every tree edge carries two environments, one per direction. The
// environment flowing out of a region R holds
//   * `hblock`: the weighted sum of all terms supported inside R, and
//   * `ops`: for each term straddling the boundary of R, the renormalized
//     product of its factors inside R, keyed by that factor set.
// Operators act on the link that bounds R and are indexed [out, in].
// Environments are recomputed lazily; a state's change log tells which
// ones are stale.

#include <map>
#include <optional>
#include <vector>

#include "qttn/model/ising.hpp"
#include "qttn/ttn/state.hpp"

namespace qttn {

using FactorKey = std::vector<PauliFactor>;

inline bool operator<(const PauliFactor& a, const PauliFactor& b) {
  return a.site != b.site ? a.site < b.site : a.op < b.op;
}

/// Sum of operator products acting on the legs of one rank-3 tensor.
template <NodeTensor Ten>
struct LocalOperator {
  struct Pair {
    std::size_t leg_a = 0;
    const Ten* a = nullptr;
    std::size_t leg_b = 0;
    Ten b;  // weighted sum of partner operators
  };
  struct Product {
    double weight = 0.0;
    std::vector<std::pair<std::size_t, const Ten*>> factors;
  };

  std::array<const Ten*, 3> single{nullptr, nullptr, nullptr};
  std::vector<Pair> pairs;
  std::vector<Product> products;
  double constant = 0.0;

  bool empty() const {
    return !single[0] && !single[1] && !single[2] && pairs.empty() && products.empty() && constant == 0.0;
  }

  std::size_t cost_terms() const {
    std::size_t n = pairs.size() * 2 + products.size() * 3;
    for (auto* s : single) n += s != nullptr;
    return n;
  }

  Ten apply(const Ten& x, const BackendId& be) const {
    using T = typename Ten::value_type;
    Ten y = ops::zeros_like(x);
    for (std::size_t leg = 0; leg < 3; ++leg)
      if (single[leg]) axpy(y, T{1}, ops::apply_on_leg(x, *single[leg], leg, be));
    for (const auto& p : pairs) {
      auto z = ops::apply_on_leg(x, *p.a, p.leg_a, be);
      axpy(y, T{1}, ops::apply_on_leg(z, p.b, p.leg_b, be));
    }
    for (const auto& pr : products) {
      Ten z = x;
      for (const auto& [leg, op] : pr.factors) z = ops::apply_on_leg(z, *op, leg, be);
      axpy(y, T(real_t<T>(pr.weight)), z);
    }
    if (constant != 0.0) axpy(y, T(real_t<T>(constant)), x);
    return y;
  }
};

template <NodeTensor Ten>
class Environment {
 public:
  using T = typename Ten::value_type;

  struct Edge {
    bool valid = false;
    std::optional<Ten> hblock;
    std::map<FactorKey, Ten> ops;
  };

  Environment(const TTNState<Ten>& state, std::vector<PauliString> terms)
      : topo_(state.topology()), terms_(std::move(terms)), down_(topo_.num_nodes()), up_(topo_.num_nodes()),
        leaf_(topo_.num_sites()) {
    validate_terms(terms_, topo_.num_sites());
    build_leaves();
    last_sync_ = state.change_counter();
  }

  const std::vector<PauliString>& terms() const { return terms_; }

  /// Marks environments that depend on tensors changed since the last sync.
  void sync(const TTNState<Ten>& state) {
    if (!(state.topology() == topo_)) throw TopologyError("environment belongs to a different topology");
    if (state.change_counter() == last_sync_) return;
    for (std::size_t n = 0; n < topo_.num_nodes(); ++n)
      if (state.changed_at(n) > last_sync_) invalidate(n);
    last_sync_ = state.change_counter();
  }

  /// Effective Hamiltonian at the center of `state`.
  LocalOperator<Ten> effective_operator(const TTNState<Ten>& state) {
    sync(state);
    const std::size_t node = state.center();
    std::array<const Edge*, 3> edges{};
    std::array<Region, 3> regions{};
    for (std::size_t leg = 0; leg < 3; ++leg) {
      edges[leg] = inbound(state, node, leg);
      regions[leg] = inbound_region(node, leg);
    }
    LocalOperator<Ten> op;
    for (std::size_t leg = 0; leg < 3; ++leg)
      if (edges[leg] && edges[leg]->hblock) op.single[leg] = &*edges[leg]->hblock;

    std::vector<PairItem> pair_items;
    for (const auto& t : terms_) {
      if (t.factors.empty()) {
        op.constant += t.weight;
        continue;
      }
      std::array<FactorKey, 3> parts;
      for (const auto& f : t.factors)
        for (std::size_t leg = 0; leg < 3; ++leg)
          if (regions[leg].contains(f.site)) parts[leg].push_back(f);
      std::vector<std::size_t> legs;
      for (std::size_t leg = 0; leg < 3; ++leg)
        if (!parts[leg].empty()) legs.push_back(leg);
      if (legs.size() < 2) continue;  // inside one hblock
      if (legs.size() == 2) {
        pair_items.push_back({t.weight, legs[0], &edges[legs[0]]->ops.at(parts[legs[0]]), legs[1],
                              &edges[legs[1]]->ops.at(parts[legs[1]])});
      } else {
        typename LocalOperator<Ten>::Product pr{t.weight, {}};
        for (auto leg : legs) pr.factors.push_back({leg, &edges[leg]->ops.at(parts[leg])});
        op.products.push_back(std::move(pr));
      }
    }
    op.pairs = group_pairs(pair_items);
    return op;
  }

  /// <psi|H|psi> / <psi|psi> evaluated at the center.
  double energy(const TTNState<Ten>& state) {
    const auto op = effective_operator(state);
    const auto& x = state.tensor(state.center());
    const auto hx = op.apply(x, state.backend());
    const T num = dot(x, hx);
    const double den = std::real(dot(x, x));
    if (!(den > 0.0)) throw NumericError("energy of a zero state");
    const double e = std::real(num) / den;
    if constexpr (is_complex_v<T> && std::is_same_v<real_t<T>, double>) {
      if (std::abs(std::imag(num)) / den > 1e-10 * std::max(1.0, std::abs(e)))
        throw NumericError("energy has a non-negligible imaginary part");
    }
    return e;
  }

  std::size_t renormalizations() const { return renormalizations_; }

 private:
  /// Sites of a subtree, its complement, or nothing.
  struct Region {
    std::size_t first = 0;
    std::size_t count = 0;
    bool complement = false;
    bool contains(std::size_t s) const {
      const bool in = s >= first && s < first + count;
      return complement ? !in : in;
    }
  };

  struct PairItem {
    double weight;
    std::size_t leg_a;
    const Ten* a;
    std::size_t leg_b;
    const Ten* b;
  };

  Region inbound_region(std::size_t node, std::size_t leg) const {
    const auto& nd = topo_.node(node);
    if (leg == kParent) {
      if (node == topo_.top()) return {0, 0, false};
      return {nd.first_site, nd.num_sites, true};
    }
    if (nd.layer == 0) return {nd.first_site + leg, 1, false};
    const auto& c = topo_.node(nd.children[leg]);
    return {c.first_site, c.num_sites, false};
  }

  /// Environment flowing into `node` through `leg`; null at the top's selector.
  const Edge* inbound(const TTNState<Ten>& st, std::size_t node, std::size_t leg) {
    const auto& nd = topo_.node(node);
    if (leg == kParent) return node == topo_.top() ? nullptr : &up(st, node);
    if (nd.layer == 0) return &leaf_[nd.first_site + leg];
    return &down(st, nd.children[leg]);
  }

  Edge& down(const TTNState<Ten>& st, std::size_t n) {
    auto& e = down_[n];
    if (!e.valid) {
      e = renormalize(st, n, kParent);
      e.valid = true;
    }
    return e;
  }

  Edge& up(const TTNState<Ten>& st, std::size_t n) {
    auto& e = up_[n];
    if (!e.valid) {
      const std::size_t p = topo_.node(n).parent;
      e = renormalize(st, p, topo_.child_leg(p, n));
      e.valid = true;
    }
    return e;
  }

  /// Environment leaving `node` through `out_leg`, built from the other two inbound ones.
  Edge renormalize(const TTNState<Ten>& st, std::size_t node, std::size_t out_leg) {
    ++renormalizations_;
    const BackendId& be = st.backend();
    std::array<std::size_t, 2> in_legs{};
    for (std::size_t leg = 0, k = 0; leg < 3; ++leg)
      if (leg != out_leg) in_legs[k++] = leg;
    std::array<const Edge*, 2> in{};
    std::array<Region, 2> reg{};
    for (int i = 0; i < 2; ++i) {
      in[i] = inbound(st, node, in_legs[i]);
      reg[i] = inbound_region(node, in_legs[i]);
    }
    const Ten& t = st.tensor(node);
    const Ten tc = conj(t);
    const Axes others{in_legs[0], in_legs[1]};
    auto close = [&](const Ten& y) { return contract(tc, y, others, others, be); };

    Edge out;
    LocalOperator<Ten> internal;
    for (int i = 0; i < 2; ++i)
      if (in[i] && in[i]->hblock) internal.single[in_legs[i]] = &*in[i]->hblock;
    std::vector<PairItem> pair_items;
    std::map<FactorKey, std::array<const Ten*, 2>> boundary;
    for (const auto& t_ : terms_) {
      std::array<FactorKey, 2> parts;
      bool outside = false;
      for (const auto& f : t_.factors) {
        if (reg[0].contains(f.site)) parts[0].push_back(f);
        else if (reg[1].contains(f.site)) parts[1].push_back(f);
        else outside = true;
      }
      if (parts[0].empty() && parts[1].empty()) continue;
      if (!outside) {
        if (parts[0].empty() || parts[1].empty()) continue;  // already inside one hblock
        pair_items.push_back({t_.weight, in_legs[0], &in[0]->ops.at(parts[0]), in_legs[1], &in[1]->ops.at(parts[1])});
        continue;
      }
      FactorKey key = parts[0];
      key.insert(key.end(), parts[1].begin(), parts[1].end());
      std::sort(key.begin(), key.end());
      if (boundary.count(key)) continue;
      boundary[key] = {parts[0].empty() ? nullptr : &in[0]->ops.at(parts[0]),
                       parts[1].empty() ? nullptr : &in[1]->ops.at(parts[1])};
    }
    internal.pairs = group_pairs(pair_items);
    if (!internal.empty()) out.hblock = close(internal.apply(t, be));
    for (const auto& [key, factors] : boundary) {
      Ten y = t;
      for (int i = 0; i < 2; ++i)
        if (factors[i]) y = ops::apply_on_leg(y, *factors[i], in_legs[i], be);
      out.ops.emplace(key, close(y));
    }
    return out;
  }

  /// Groups two-leg products sharing an operator so each group costs two applications.
  std::vector<typename LocalOperator<Ten>::Pair> group_pairs(const std::vector<PairItem>& items) const {
    std::vector<typename LocalOperator<Ten>::Pair> out;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<PairItem>> by_legs;
    for (const auto& it : items) by_legs[{it.leg_a, it.leg_b}].push_back(it);
    for (auto& [legs, list] : by_legs) {
      std::map<const Ten*, int> da, db;
      for (const auto& it : list) {
        ++da[it.a];
        ++db[it.b];
      }
      const bool key_on_a = da.size() <= db.size();
      std::map<const Ten*, std::size_t> slot;
      for (const auto& it : list) {
        const Ten* key = key_on_a ? it.a : it.b;
        const Ten* partner = key_on_a ? it.b : it.a;
        Ten scaled = *partner;
        scale(scaled, T(real_t<T>(it.weight)));
        auto s = slot.find(key);
        if (s == slot.end()) {
          slot[key] = out.size();
          out.push_back({key_on_a ? it.leg_a : it.leg_b, key, key_on_a ? it.leg_b : it.leg_a, std::move(scaled)});
        } else {
          axpy(out[s->second].b, T{1}, scaled);
        }
      }
    }
    return out;
  }

  void build_leaves() {
    for (std::size_t s = 0; s < topo_.num_sites(); ++s) {
      auto& e = leaf_[s];
      e.valid = true;
      for (const auto& t : terms_) {
        auto it = std::find_if(t.factors.begin(), t.factors.end(), [&](const PauliFactor& f) { return f.site == s; });
        if (it == t.factors.end()) continue;
        const Ten p = pauli_op(it->op);
        if (t.factors.size() == 1) {
          Ten w = p;
          scale(w, T(real_t<T>(t.weight)));
          if (e.hblock) axpy(*e.hblock, T{1}, w);
          else e.hblock = std::move(w);
        } else {
          e.ops.emplace(FactorKey{*it}, p);
        }
      }
    }
  }

  static Ten pauli_op(Pauli p) {
    if constexpr (is_z2_tensor_v<Ten>) return pauli_z2<T>(p);
    else return pauli_dense<T>(p);
  }

  void invalidate(std::size_t changed) {
    for (std::size_t n = 0; n < topo_.num_nodes(); ++n) {
      if (topo_.is_ancestor_or_self(n, changed)) down_[n] = Edge{};
      else up_[n] = Edge{};
    }
  }

  TTNTopology topo_;
  std::vector<PauliString> terms_;
  std::vector<Edge> down_, up_, leaf_;
  std::uint64_t last_sync_ = 0;
  std::size_t renormalizations_ = 0;
};

/// sum_k w_k <psi|P_k|psi> for a normalized state.
template <NodeTensor Ten>
double expectation(const TTNState<Ten>& state, const std::vector<PauliString>& terms) {
  Environment<Ten> env(state, terms);
  return env.energy(state);
}

}  // namespace qttn
