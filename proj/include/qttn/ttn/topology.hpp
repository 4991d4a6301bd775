#pragma once

// Binary tree over 2^L leaves. Nodes are numbered layer by layer from the
// lowest layer, so the top node is the last one. Every node tensor has legs
// (child 0, child 1, parent).

#include <cstddef>
#include <vector>

namespace qttn {

inline constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

enum Leg : std::size_t { kChild0 = 0, kChild1 = 1, kParent = 2 };

struct TTNNode {
  std::size_t layer = 0;
  std::size_t position = 0;
  std::size_t parent = kNoNode;
  std::size_t children[2] = {kNoNode, kNoNode};  // node ids; kNoNode on layer 0
  std::size_t first_site = 0;                    // leaves covered: [first_site, first_site + num_sites)
  std::size_t num_sites = 0;
};

class TTNTopology {
 public:
  TTNTopology() = default;
  /// Throws TopologyError unless num_sites is a power of two >= 2.
  explicit TTNTopology(std::size_t num_sites);

  std::size_t num_sites() const { return num_sites_; }
  std::size_t num_layers() const { return num_layers_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t top() const { return nodes_.size() - 1; }
  const TTNNode& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t node_id(std::size_t layer, std::size_t position) const;
  std::size_t nodes_in_layer(std::size_t layer) const { return num_sites_ >> (layer + 1); }

  /// Which child leg of `parent` connects to `child`.
  std::size_t child_leg(std::size_t parent, std::size_t child) const;
  /// Neighbor across `leg`, or kNoNode for physical legs and the top's selector.
  std::size_t neighbor(std::size_t node, std::size_t leg) const;
  /// Leg of `node` that points at the adjacent node `other`.
  std::size_t leg_towards(std::size_t node, std::size_t other) const;

  bool is_ancestor_or_self(std::size_t ancestor, std::size_t node) const;
  bool in_subtree(std::size_t root, std::size_t site) const {
    const auto& n = node(root);
    return site >= n.first_site && site < n.first_site + n.num_sites;
  }

  /// Nodes from `from` to `to` inclusive along the tree path.
  std::vector<std::size_t> path(std::size_t from, std::size_t to) const;
  /// Depth-first preorder from the top: the order in which a sweep visits nodes.
  std::vector<std::size_t> sweep_order() const;

  friend bool operator==(const TTNTopology& a, const TTNTopology& b) { return a.num_sites_ == b.num_sites_; }

 private:
  std::size_t num_sites_ = 0;
  std::size_t num_layers_ = 0;
  std::vector<std::size_t> layer_offset_;
  std::vector<TTNNode> nodes_;
};

}  // namespace qttn
