#include "sdcps/topology/hierarchy.hpp"

#include <algorithm>
#include <string>

#include "sdcps/core/error.hpp"

namespace sdcps {

namespace {

std::string node_name(NodeId id) { return "node " + std::to_string(id.value); }

}  // namespace

void Hierarchy::add_root(NodeId id, NodeRole role) {
  root_ = id;
  level_[id] = 0;
  role_[id] = role;
  children_.try_emplace(id);
}

void Hierarchy::add_child(NodeId parent, NodeId child, NodeRole role) {
  if (!contains(parent)) throw Error(ErrorCode::UnknownNode, node_name(parent));
  parent_[child] = parent;
  level_[child] = level_.at(parent) + 1;
  role_[child] = role;
  children_[parent].push_back(child);
  children_.try_emplace(child);
}

void Hierarchy::relevel(NodeId id, int level) {
  level_[id] = level;
  for (NodeId c : children_.at(id)) relevel(c, level + 1);
}

void Hierarchy::reparent(NodeId child, NodeId new_parent) {
  if (!contains(child)) throw Error(ErrorCode::UnknownNode, node_name(child));
  if (!contains(new_parent)) throw Error(ErrorCode::UnknownNode, node_name(new_parent));
  auto& siblings = children_[parent_.at(child)];
  siblings.erase(std::remove(siblings.begin(), siblings.end(), child), siblings.end());
  parent_[child] = new_parent;
  auto& adopted = children_[new_parent];
  adopted.insert(std::upper_bound(adopted.begin(), adopted.end(), child), child);
  relevel(child, level_.at(new_parent) + 1);
}

std::optional<NodeId> Hierarchy::parent(NodeId id) const {
  auto it = parent_.find(id);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

int Hierarchy::level(NodeId id) const {
  auto it = level_.find(id);
  if (it == level_.end()) throw Error(ErrorCode::UnknownNode, node_name(id));
  return it->second;
}

NodeRole Hierarchy::role(NodeId id) const {
  auto it = role_.find(id);
  if (it == role_.end()) throw Error(ErrorCode::UnknownNode, node_name(id));
  return it->second;
}

std::vector<NodeId> Hierarchy::children(NodeId id) const {
  auto it = children_.find(id);
  if (it == children_.end()) throw Error(ErrorCode::UnknownNode, node_name(id));
  return it->second;
}

std::vector<NodeId> Hierarchy::nodes() const {
  std::vector<NodeId> out;
  out.reserve(level_.size());
  for (const auto& [id, lvl] : level_) out.push_back(id);
  return out;
}

std::vector<NodeId> Hierarchy::nodes_with_role(NodeRole role) const {
  std::vector<NodeId> out;
  for (const auto& [id, r] : role_) {
    if (r == role) out.push_back(id);
  }
  return out;
}

int Hierarchy::height() const {
  int h = 0;
  for (const auto& [id, lvl] : level_) h = std::max(h, lvl);
  return h;
}

std::vector<NodeId> Hierarchy::path_to_root(NodeId id) const {
  if (!contains(id)) throw Error(ErrorCode::UnknownNode, node_name(id));
  std::vector<NodeId> path{id};
  for (auto p = parent(id); p; p = parent(*p)) path.push_back(*p);
  return path;
}

bool Hierarchy::is_ancestor_or_self(NodeId ancestor, NodeId node) const {
  if (!contains(node)) return false;
  for (std::optional<NodeId> cur = node; cur; cur = parent(*cur)) {
    if (*cur == ancestor) return true;
  }
  return false;
}

std::optional<NodeId> Hierarchy::ancestor_with_role(NodeId id, NodeRole role) const {
  for (std::optional<NodeId> cur = id; cur; cur = parent(*cur)) {
    if (role_.at(*cur) == role) return cur;
  }
  return std::nullopt;
}

std::vector<NodeId> Hierarchy::subtree(NodeId id) const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    out.push_back(v);
    for (NodeId c : children(v)) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Hierarchy::validate() const {
  if (root_ == kNoNode) return "no root";
  if (role_.at(root_) != NodeRole::Global) return "root is not GLOBAL";
  if (nodes_with_role(NodeRole::Global).size() != 1) return "more than one GLOBAL node";
  if (parent_.size() + 1 != level_.size()) return "edge count differs from vertex count - 1";
  for (const auto& [id, r] : role_) {
    if (id == root_) continue;
    // Walking up must reach the root without revisiting.
    std::size_t steps = 0;
    for (std::optional<NodeId> cur = id; cur && *cur != root_; cur = parent(*cur)) {
      if (++steps > level_.size()) return "cycle through " + node_name(id);
    }
    const NodeRole pr = role_.at(parent_.at(id));
    if (r == NodeRole::Host && pr != NodeRole::Switch) return node_name(id) + " HOST without SWITCH parent";
    if (r == NodeRole::Switch && pr != NodeRole::Local) return node_name(id) + " SWITCH without LOCAL parent";
    if (level_.at(id) != level_.at(parent_.at(id)) + 1) return node_name(id) + " level inconsistent";
  }
  return {};
}

BuiltTopology build_hierarchy(int n_local, int switches_per_local, int hosts_per_switch) {
  if (n_local < 1 || switches_per_local < 1 || hosts_per_switch < 1) {
    throw Error(ErrorCode::InvalidCount, "n_local, switches_per_local and hosts_per_switch must all be >= 1");
  }
  BuiltTopology t;
  std::uint32_t next = 0;
  const NodeId root{next++};
  t.hierarchy.add_root(root);
  t.graph.add_vertex(root, NodeRole::Global);

  for (int l = 0; l < n_local; ++l) {
    const NodeId local{next++};
    t.locals.push_back(local);
    t.hierarchy.add_child(root, local, NodeRole::Local);
    t.graph.add_vertex(local, NodeRole::Local);
    t.graph.add_edge(root, local);
  }
  for (NodeId local : t.locals) {
    std::vector<NodeId> siblings;
    for (int s = 0; s < switches_per_local; ++s) {
      const NodeId sw{next++};
      siblings.push_back(sw);
      t.switches.push_back(sw);
      t.hierarchy.add_child(local, sw, NodeRole::Switch);
      t.graph.add_vertex(sw, NodeRole::Switch);
      t.graph.add_edge(local, sw);
    }
    for (std::size_t i = 0; i < siblings.size(); ++i) {
      for (std::size_t j = i + 1; j < siblings.size(); ++j) t.graph.add_edge(siblings[i], siblings[j]);
    }
  }
  for (NodeId sw : t.switches) {
    for (int h = 0; h < hosts_per_switch; ++h) {
      const NodeId host{next++};
      t.hosts.push_back(host);
      t.hierarchy.add_child(sw, host, NodeRole::Host);
      t.graph.add_vertex(host, NodeRole::Host);
      t.graph.add_edge(sw, host);
    }
  }
  return t;
}

}  // namespace sdcps
