#include "sdcps/control/routing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <set>

#include "sdcps/core/error.hpp"

namespace sdcps {

namespace {

bool same_cost(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

struct DisjointSets {
  std::map<NodeId, NodeId> parent;

  NodeId find(NodeId x) {
    auto it = parent.find(x);
    if (it == parent.end()) return parent[x] = x;
    if (it->second == x) return x;
    return it->second = find(it->second);
  }
  bool unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// First hop from `from` toward every node in its tree component.
std::map<NodeId, NodeId> tree_first_hops(const NetGraph& tree, NodeId from) {
  std::map<NodeId, NodeId> first;
  std::deque<NodeId> queue;
  for (const auto& [v, w] : tree.adjacency(from)) {
    first[v] = v;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (const auto& [v, w] : tree.adjacency(u)) {
      if (v == from || first.contains(v)) continue;
      first[v] = first[u];
      queue.push_back(v);
    }
  }
  return first;
}

ForwardingTable shortest_table(const NetGraph& graph, NodeId owner, std::vector<std::pair<NodeId, NodeId>>& missing) {
  ForwardingTable t{owner, {}, graph.epoch()};
  const auto from_owner = distances_from(graph, owner);
  std::vector<std::pair<NodeId, std::map<NodeId, double>>> via;
  for (const auto& [v, w] : graph.adjacency(owner)) via.emplace_back(v, distances_from(graph, v));
  for (const auto& [dst, role] : graph.vertices()) {
    if (dst == owner) continue;
    auto d = from_owner.find(dst);
    if (d == from_owner.end()) {
      missing.emplace_back(owner, dst);
      continue;
    }
    // Neighbours come in ascending id order, so the first optimal one is the
    // lexicographically smallest continuation.
    for (const auto& [v, dv] : via) {
      auto it = dv.find(dst);
      if (it != dv.end() && same_cost(*graph.weight(owner, v) + it->second, d->second)) {
        t.entries[dst] = v;
        break;
      }
    }
  }
  return t;
}

}  // namespace

std::string_view to_string(RoutePolicy p) { return p == RoutePolicy::Shortest ? "SHORTEST" : "MST"; }

RoutePolicy route_policy_from_string(std::string_view s) {
  if (s == "SHORTEST") return RoutePolicy::Shortest;
  if (s == "MST") return RoutePolicy::Mst;
  throw Error(ErrorCode::BadValue, "route policy " + std::string(s));
}

std::map<NodeId, double> distances_from(const NetGraph& graph, NodeId src) {
  std::map<NodeId, double> dist;
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[src] = 0.0;
  heap.emplace(0.0, src);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : graph.adjacency(u)) {
      const double nd = d + w;
      auto it = dist.find(v);
      if (it == dist.end() || nd < it->second) {
        dist[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

NetGraph minimum_spanning_forest(const NetGraph& graph) {
  NetGraph forest;
  for (const auto& [v, role] : graph.vertices()) forest.add_vertex(v, role);
  auto edges = graph.edges();
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
  });
  DisjointSets sets;
  for (const Edge& e : edges) {
    if (sets.unite(e.a, e.b)) forest.add_edge(e.a, e.b, e.weight);
  }
  return forest;
}

Path compute_path(const NetGraph& graph, NodeId src, NodeId dst, RoutePolicy policy) {
  if (!graph.has_vertex(src) || !graph.has_vertex(dst)) throw Error(ErrorCode::UnknownNode, "path endpoint");
  Path path{{src}, 0.0};
  if (src == dst) return path;
  const NetGraph* g = &graph;
  NetGraph forest;
  if (policy == RoutePolicy::Mst) {
    forest = minimum_spanning_forest(graph);
    g = &forest;
  }
  // Distances to dst; walk greedily from src through the smallest-id
  // neighbour that stays on an optimal path.
  const auto to_dst = distances_from(*g, dst);
  if (!to_dst.contains(src)) {
    throw Error(ErrorCode::Unreachable, std::to_string(src.value) + " -> " + std::to_string(dst.value));
  }
  NodeId u = src;
  while (u != dst) {
    const double du = to_dst.at(u);
    NodeId next = kNoNode;
    for (const auto& [v, w] : g->adjacency(u)) {
      auto it = to_dst.find(v);
      if (it != to_dst.end() && same_cost(w + it->second, du) && it->second < du) {
        next = v;
        break;
      }
    }
    if (next == kNoNode) throw Error(ErrorCode::Unreachable, "no descending neighbour");
    path.cost += *graph.weight(u, next);
    path.nodes.push_back(next);
    u = next;
  }
  return path;
}

std::optional<NodeId> ForwardingTable::next_hop(NodeId dst) const {
  auto it = entries.find(dst);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

TableSet generate_forwarding_tables(const NetGraph& graph, std::span<const NodeId> owners, RoutePolicy policy) {
  TableSet set;
  if (policy == RoutePolicy::Shortest) {
    for (NodeId o : owners) set.tables.emplace(o, shortest_table(graph, o, set.unreachable));
    return set;
  }
  const NetGraph forest = minimum_spanning_forest(graph);
  for (NodeId o : owners) {
    ForwardingTable t{o, tree_first_hops(forest, o), graph.epoch()};
    for (const auto& [dst, role] : graph.vertices()) {
      if (dst != o && !t.entries.contains(dst)) set.unreachable.emplace_back(o, dst);
    }
    set.tables.emplace(o, std::move(t));
  }
  return set;
}

const TableSet& SdnController::regenerate_all(const NetGraph& graph) {
  set_ = generate_forwarding_tables(graph, owners_, policy_);
  return set_;
}

std::vector<NodeId> SdnController::on_network_change(const NetGraph& graph, const LinkChange& change) {
  std::set<NodeId> affected;
  for (NodeId end : {change.a, change.b}) {
    if (!graph.has_vertex(end)) continue;
    for (NodeId v : graph.component_of(end)) affected.insert(v);
  }
  std::vector<NodeId> owners;
  for (NodeId o : owners_) {
    if (affected.contains(o)) owners.push_back(o);
  }
  TableSet fresh = generate_forwarding_tables(graph, owners, policy_);
  std::erase_if(set_.unreachable, [&](const auto& p) { return affected.contains(p.first); });
  for (auto& [o, t] : fresh.tables) set_.tables[o] = std::move(t);
  set_.unreachable.insert(set_.unreachable.end(), fresh.unreachable.begin(), fresh.unreachable.end());
  return owners;
}

const ForwardingTable& SdnController::table(NodeId owner) const {
  auto it = set_.tables.find(owner);
  if (it == set_.tables.end()) throw Error(ErrorCode::UnknownNode, "no table for " + std::to_string(owner.value));
  return it->second;
}

void SdnController::dump(std::ostream& os) const { dump_tables(set_, os); }

void dump_tables(const TableSet& set, std::ostream& os) {
  for (const auto& [owner, t] : set.tables) {
    for (const auto& [dst, hop] : t.entries) {
      os << owner.value << ',' << dst.value << ',' << hop.value << ',' << t.epoch << '\n';
    }
  }
}

}  // namespace sdcps
