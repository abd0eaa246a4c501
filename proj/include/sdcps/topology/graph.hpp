#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <tuple>
#include <vector>

#include "sdcps/core/types.hpp"

namespace sdcps {

enum class LinkChangeKind { Add, Remove, Reweight };

struct LinkChange {
  LinkChangeKind kind = LinkChangeKind::Add;
  NodeId a;
  NodeId b;
  double weight = 1.0;  // ignored for Remove
};

struct Edge {
  NodeId a;  // a < b
  NodeId b;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// The communication graph G(k). Undirected, no self-loops, positive
/// weights. Every applied change bumps the epoch and is kept in a change log
/// so neighborhoods at earlier epochs can be reconstructed.
class NetGraph {
 public:
  using Listener = std::function<void(const LinkChange&, std::uint64_t epoch)>;

  NetGraph() = default;
  NetGraph(const NetGraph& other);
  NetGraph& operator=(const NetGraph& other);
  NetGraph(NetGraph&&) = default;
  NetGraph& operator=(NetGraph&&) = default;

  void add_vertex(NodeId id, NodeRole role);
  bool has_vertex(NodeId id) const { return roles_.contains(id); }
  NodeRole role(NodeId id) const;
  const std::map<NodeId, NodeRole>& vertices() const { return roles_; }
  std::size_t vertex_count() const { return roles_.size(); }

  /// Construction-time edge insertion. Does not bump the epoch.
  void add_edge(NodeId a, NodeId b, double weight = 1.0);

  /// Applies a runtime change, bumps the epoch and notifies listeners.
  /// Returns the new epoch.
  std::uint64_t apply_link_event(const LinkChange& change);

  std::set<NodeId> neighbors(NodeId i) const;
  std::set<NodeId> neighbors_at(NodeId i, std::uint64_t epoch) const;
  const std::map<NodeId, double>& adjacency(NodeId i) const;

  std::optional<double> weight(NodeId a, NodeId b) const;
  bool has_edge(NodeId a, NodeId b) const { return weight(a, b).has_value(); }
  std::size_t edge_count() const;
  std::vector<Edge> edges() const;

  std::uint64_t epoch() const { return epoch_; }

  /// Vertices reachable from `start`, in ascending id order.
  std::vector<NodeId> component_of(NodeId start) const;

  std::size_t subscribe(Listener listener);
  void unsubscribe(std::size_t token);

  /// `#epoch N` header, then one `i j weight` line per edge with i < j.
  void dump(std::ostream& os) const;

 private:
  struct LoggedChange {
    std::uint64_t epoch;
    LinkChange change;
    double previous_weight;
  };

  void check_vertex(NodeId id) const;

  std::map<NodeId, NodeRole> roles_;
  std::map<NodeId, std::map<NodeId, double>> adj_;
  std::uint64_t epoch_ = 0;
  std::vector<LoggedChange> log_;
  std::map<std::size_t, Listener> listeners_;
  std::size_t next_token_ = 0;
};

}  // namespace sdcps
