#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sdcps/core/types.hpp"
#include "sdcps/topology/graph.hpp"

namespace sdcps {

/// Rooted controller tree. The root is the single GLOBAL controller; hosts
/// hang off switches and switches off local controllers.
class Hierarchy {
 public:
  void add_root(NodeId id, NodeRole role = NodeRole::Global);
  void add_child(NodeId parent, NodeId child, NodeRole role);

  /// Moves `child` (and its subtree) under `new_parent`; levels are updated.
  void reparent(NodeId child, NodeId new_parent);

  bool contains(NodeId id) const { return level_.contains(id); }
  NodeId root() const { return root_; }
  std::optional<NodeId> parent(NodeId id) const;
  int level(NodeId id) const;
  NodeRole role(NodeId id) const;
  std::vector<NodeId> children(NodeId id) const;
  std::vector<NodeId> nodes() const;
  std::vector<NodeId> nodes_with_role(NodeRole role) const;
  std::size_t size() const { return level_.size(); }
  int height() const;

  /// `id`, its parent, ..., root.
  std::vector<NodeId> path_to_root(NodeId id) const;
  bool is_ancestor_or_self(NodeId ancestor, NodeId node) const;

  /// Closest ancestor-or-self carrying `role`, if any.
  std::optional<NodeId> ancestor_with_role(NodeId id, NodeRole role) const;

  /// Nodes under `id` including itself, ascending.
  std::vector<NodeId> subtree(NodeId id) const;

  /// Tree shape and role placement checks; returns an empty string when
  /// valid, otherwise the first violation found.
  std::string validate() const;

  const std::map<NodeId, NodeId>& parent_map() const { return parent_; }

 private:
  void relevel(NodeId id, int level);

  NodeId root_ = kNoNode;
  std::map<NodeId, NodeId> parent_;
  std::map<NodeId, int> level_;
  std::map<NodeId, NodeRole> role_;
  std::map<NodeId, std::vector<NodeId>> children_;
};

struct BuiltTopology {
  Hierarchy hierarchy;
  NetGraph graph;
  std::vector<NodeId> locals;
  std::vector<NodeId> switches;
  std::vector<NodeId> hosts;
};

/// Depth-3 tree: id 0 is the global root, then the locals, the switches
/// (grouped by local) and the hosts (grouped by switch). The graph mirrors
/// the tree edges plus a full mesh among sibling switches.
BuiltTopology build_hierarchy(int n_local, int switches_per_local, int hosts_per_switch);

}  // namespace sdcps
