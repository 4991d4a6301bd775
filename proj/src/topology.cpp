#include "qttn/ttn/topology.hpp"

#include <algorithm>
#include <string>

#include "qttn/tensor/errors.hpp"

namespace qttn {

TTNTopology::TTNTopology(std::size_t num_sites) : num_sites_(num_sites) {
  if (num_sites < 2 || (num_sites & (num_sites - 1)) != 0)
    throw TopologyError("number of sites must be a power of two >= 2, got " + std::to_string(num_sites));
  while ((std::size_t{1} << num_layers_) < num_sites) ++num_layers_;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < num_layers_; ++l) {
    layer_offset_.push_back(offset);
    offset += nodes_in_layer(l);
  }
  nodes_.resize(offset);
  for (std::size_t l = 0; l < num_layers_; ++l)
    for (std::size_t p = 0; p < nodes_in_layer(l); ++p) {
      auto& n = nodes_[layer_offset_[l] + p];
      n.layer = l;
      n.position = p;
      n.num_sites = std::size_t{2} << l;
      n.first_site = p * n.num_sites;
      if (l > 0) {
        n.children[0] = layer_offset_[l - 1] + 2 * p;
        n.children[1] = layer_offset_[l - 1] + 2 * p + 1;
        nodes_[n.children[0]].parent = layer_offset_[l] + p;
        nodes_[n.children[1]].parent = layer_offset_[l] + p;
      }
    }
}

std::size_t TTNTopology::node_id(std::size_t layer, std::size_t position) const {
  if (layer >= num_layers_ || position >= nodes_in_layer(layer)) throw TopologyError("node out of range");
  return layer_offset_[layer] + position;
}

std::size_t TTNTopology::child_leg(std::size_t parent, std::size_t child) const {
  const auto& p = node(parent);
  if (p.children[0] == child) return kChild0;
  if (p.children[1] == child) return kChild1;
  throw TopologyError("node is not a child of the given parent");
}

std::size_t TTNTopology::neighbor(std::size_t id, std::size_t leg) const {
  const auto& n = node(id);
  if (leg == kParent) return n.parent;
  if (leg > kParent) throw TopologyError("invalid leg");
  return n.children[leg];
}

std::size_t TTNTopology::leg_towards(std::size_t id, std::size_t other) const {
  if (node(id).parent == other) return kParent;
  return child_leg(id, other);
}

bool TTNTopology::is_ancestor_or_self(std::size_t ancestor, std::size_t id) const {
  for (std::size_t n = id; n != kNoNode; n = node(n).parent)
    if (n == ancestor) return true;
  return false;
}

std::vector<std::size_t> TTNTopology::path(std::size_t from, std::size_t to) const {
  node(from);
  node(to);
  std::vector<std::size_t> up, down;
  std::size_t a = from, b = to;
  while (a != b) {
    if (node(a).layer <= node(b).layer) {
      up.push_back(a);
      a = node(a).parent;
    } else {
      down.push_back(b);
      b = node(b).parent;
    }
  }
  up.push_back(a);
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

std::vector<std::size_t> TTNTopology::sweep_order() const {
  std::vector<std::size_t> order, stack{top()};
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    order.push_back(n);
    const auto& nd = node(n);
    if (nd.layer > 0) {
      stack.push_back(nd.children[1]);
      stack.push_back(nd.children[0]);
    }
  }
  return order;
}

}  // namespace qttn
