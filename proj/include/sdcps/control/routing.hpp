#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sdcps/core/types.hpp"
#include "sdcps/topology/graph.hpp"

namespace sdcps {

enum class RoutePolicy { Shortest, Mst };

std::string_view to_string(RoutePolicy p);
RoutePolicy route_policy_from_string(std::string_view s);

struct Path {
  std::vector<NodeId> nodes;
  double cost = 0.0;
};

/// Shortest: minimum total weight, ties to the lexicographically smallest id
/// sequence. Mst: the tree path in the minimum spanning forest built with
/// edges ordered by (weight, a, b). Throws Unreachable.
Path compute_path(const NetGraph& graph, NodeId src, NodeId dst, RoutePolicy policy = RoutePolicy::Shortest);

/// Single-source distances over the reachable part of the graph.
std::map<NodeId, double> distances_from(const NetGraph& graph, NodeId src);

/// Kruskal forest, edges ordered by (weight, a, b).
NetGraph minimum_spanning_forest(const NetGraph& graph);

struct ForwardingTable {
  NodeId owner;
  std::map<NodeId, NodeId> entries;  // destination -> next hop
  std::uint64_t epoch = 0;

  std::optional<NodeId> next_hop(NodeId dst) const;
};

struct TableSet {
  std::map<NodeId, ForwardingTable> tables;
  std::vector<std::pair<NodeId, NodeId>> unreachable;  // (owner, destination)
};

/// One table per owner with an entry for every other vertex it can reach.
TableSet generate_forwarding_tables(const NetGraph& graph, std::span<const NodeId> owners,
                                    RoutePolicy policy = RoutePolicy::Shortest);

/// Path calculation, forwarding-table generation and network status
/// tracking for a fixed set of table owners.
class SdnController {
 public:
  SdnController(std::vector<NodeId> owners, RoutePolicy policy = RoutePolicy::Shortest)
      : owners_(std::move(owners)), policy_(policy) {}

  const TableSet& regenerate_all(const NetGraph& graph);

  /// Call after `change` has been applied. Regenerates the tables of every
  /// owner in the components now holding the change's endpoints and returns
  /// those owners.
  std::vector<NodeId> on_network_change(const NetGraph& graph, const LinkChange& change);

  const TableSet& tables() const { return set_; }
  const ForwardingTable& table(NodeId owner) const;
  RoutePolicy policy() const { return policy_; }

  /// `switch,dst,next_hop,epoch` rows, owners and destinations ascending.
  void dump(std::ostream& os) const;

 private:
  std::vector<NodeId> owners_;
  RoutePolicy policy_;
  TableSet set_;
};

void dump_tables(const TableSet& set, std::ostream& os);

}  // namespace sdcps
