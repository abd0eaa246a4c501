#include "sdcps/topology/graph.hpp"

#include <deque>
#include <string>

#include "sdcps/core/error.hpp"

namespace sdcps {

namespace {

std::string edge_name(NodeId a, NodeId b) {
  return "(" + std::to_string(a.value) + "," + std::to_string(b.value) + ")";
}

const std::map<NodeId, double> kNoNeighbors;

}  // namespace

// Listeners belong to the original owner; copies start unsubscribed.
NetGraph::NetGraph(const NetGraph& other)
    : roles_(other.roles_), adj_(other.adj_), epoch_(other.epoch_), log_(other.log_) {}

NetGraph& NetGraph::operator=(const NetGraph& other) {
  if (this != &other) {
    roles_ = other.roles_;
    adj_ = other.adj_;
    epoch_ = other.epoch_;
    log_ = other.log_;
    listeners_.clear();
  }
  return *this;
}

void NetGraph::check_vertex(NodeId id) const {
  if (!has_vertex(id)) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id.value));
}

void NetGraph::add_vertex(NodeId id, NodeRole role) {
  roles_[id] = role;
  adj_.try_emplace(id);
}

NodeRole NetGraph::role(NodeId id) const {
  check_vertex(id);
  return roles_.at(id);
}

void NetGraph::add_edge(NodeId a, NodeId b, double weight) {
  check_vertex(a);
  check_vertex(b);
  if (a == b) throw Error(ErrorCode::DuplicateEdge, "self-loop at " + std::to_string(a.value));
  if (!(weight > 0.0)) throw Error(ErrorCode::InvalidCount, "edge weight must be positive");
  if (has_edge(a, b)) throw Error(ErrorCode::DuplicateEdge, edge_name(a, b));
  adj_[a][b] = weight;
  adj_[b][a] = weight;
}

std::uint64_t NetGraph::apply_link_event(const LinkChange& change) {
  check_vertex(change.a);
  check_vertex(change.b);
  if (change.a == change.b) throw Error(ErrorCode::DuplicateEdge, "self-loop at " + std::to_string(change.a.value));
  const auto existing = weight(change.a, change.b);
  switch (change.kind) {
    case LinkChangeKind::Add:
      if (existing) throw Error(ErrorCode::DuplicateEdge, edge_name(change.a, change.b));
      if (!(change.weight > 0.0)) throw Error(ErrorCode::InvalidCount, "edge weight must be positive");
      adj_[change.a][change.b] = change.weight;
      adj_[change.b][change.a] = change.weight;
      break;
    case LinkChangeKind::Remove:
      if (!existing) throw Error(ErrorCode::NoSuchEdge, edge_name(change.a, change.b));
      adj_[change.a].erase(change.b);
      adj_[change.b].erase(change.a);
      break;
    case LinkChangeKind::Reweight:
      if (!existing) throw Error(ErrorCode::NoSuchEdge, edge_name(change.a, change.b));
      if (!(change.weight > 0.0)) throw Error(ErrorCode::InvalidCount, "edge weight must be positive");
      adj_[change.a][change.b] = change.weight;
      adj_[change.b][change.a] = change.weight;
      break;
  }
  ++epoch_;
  log_.push_back({epoch_, change, existing.value_or(0.0)});
  // Copy so a listener may unsubscribe itself.
  const auto listeners = listeners_;
  for (const auto& [token, fn] : listeners) fn(change, epoch_);
  return epoch_;
}

std::set<NodeId> NetGraph::neighbors(NodeId i) const {
  check_vertex(i);
  std::set<NodeId> out;
  for (const auto& [j, w] : adj_.at(i)) out.insert(j);
  return out;
}

std::set<NodeId> NetGraph::neighbors_at(NodeId i, std::uint64_t epoch) const {
  std::set<NodeId> out = neighbors(i);
  for (auto it = log_.rbegin(); it != log_.rend() && it->epoch > epoch; ++it) {
    const LinkChange& c = it->change;
    if (c.a != i && c.b != i) continue;
    const NodeId other = c.a == i ? c.b : c.a;
    if (c.kind == LinkChangeKind::Add) out.erase(other);
    if (c.kind == LinkChangeKind::Remove) out.insert(other);
  }
  return out;
}

const std::map<NodeId, double>& NetGraph::adjacency(NodeId i) const {
  auto it = adj_.find(i);
  return it == adj_.end() ? kNoNeighbors : it->second;
}

std::optional<double> NetGraph::weight(NodeId a, NodeId b) const {
  auto it = adj_.find(a);
  if (it == adj_.end()) return std::nullopt;
  auto jt = it->second.find(b);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::size_t NetGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& [v, nbrs] : adj_) twice += nbrs.size();
  return twice / 2;
}

std::vector<Edge> NetGraph::edges() const {
  std::vector<Edge> out;
  for (const auto& [a, nbrs] : adj_) {
    for (const auto& [b, w] : nbrs) {
      if (a < b) out.push_back({a, b, w});
    }
  }
  return out;
}

std::vector<NodeId> NetGraph::component_of(NodeId start) const {
  check_vertex(start);
  std::set<NodeId> seen{start};
  std::deque<NodeId> frontier{start};
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop_front();
    for (const auto& [u, w] : adjacency(v)) {
      if (seen.insert(u).second) frontier.push_back(u);
    }
  }
  return {seen.begin(), seen.end()};
}

std::size_t NetGraph::subscribe(Listener listener) {
  const std::size_t token = next_token_++;
  listeners_.emplace(token, std::move(listener));
  return token;
}

void NetGraph::unsubscribe(std::size_t token) { listeners_.erase(token); }

void NetGraph::dump(std::ostream& os) const {
  os << "#epoch " << epoch_ << '\n';
  for (const Edge& e : edges()) os << e.a.value << ' ' << e.b.value << ' ' << e.weight << '\n';
}

}  // namespace sdcps
