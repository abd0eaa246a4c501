#include "sdcps/topology/partition.hpp"

#include <string>

#include "sdcps/core/error.hpp"

namespace sdcps {

std::vector<Partition> partition_nodes(std::span<const NodeId> locals, int p) {
  if (p < 1 || static_cast<std::size_t>(p) > locals.size()) {
    throw Error(ErrorCode::TooManyPartitions,
                std::to_string(p) + " partitions requested for " + std::to_string(locals.size()) + " locals");
  }
  const std::size_t n = locals.size();
  const std::size_t parts = static_cast<std::size_t>(p);
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;

  std::vector<Partition> out;
  out.reserve(parts);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    const std::size_t size = base + (i < extra ? 1 : 0);
    Partition part;
    part.id = i;
    part.members.assign(locals.begin() + static_cast<std::ptrdiff_t>(cursor),
                        locals.begin() + static_cast<std::ptrdiff_t>(cursor + size));
    part.area_coordinator = part.members.front();
    cursor += size;
    out.push_back(std::move(part));
  }
  return out;
}

std::vector<Cluster> assign_clusters(const std::map<NodeId, Vec2>& positions, std::span<const Vec2> centers,
                                     std::span<const NodeId> coordinators) {
  if (centers.empty()) throw Error(ErrorCode::NoCenters, "at least one cluster center is required");
  if (!coordinators.empty() && coordinators.size() != centers.size()) {
    throw Error(ErrorCode::InvalidCount, "one coordinator per center expected");
  }
  std::vector<Cluster> out(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    out[c].id = c;
    out[c].center = centers[c];
    if (!coordinators.empty()) out[c].coordinator = coordinators[c];
  }
  for (const auto& [node, pos] : positions) {
    std::size_t best = 0;
    double best_d2 = 0.0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double dx = pos.x - centers[c].x;
      const double dy = pos.y - centers[c].y;
      const double d2 = dx * dx + dy * dy;
      // Strict comparison keeps the lowest id on ties.
      if (c == 0 || d2 < best_d2) {
        best = c;
        best_d2 = d2;
      }
    }
    out[best].members.push_back(node);
  }
  return out;
}

}  // namespace sdcps
