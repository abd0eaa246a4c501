#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "sdcps/core/types.hpp"

namespace sdcps {

struct Partition {
  std::size_t id = 0;
  NodeId area_coordinator;
  std::vector<NodeId> members;
};

/// Splits `locals` into `p` contiguous partitions whose sizes differ by at
/// most one (larger ones first). The first member of each partition carries
/// the area-coordinator role.
std::vector<Partition> partition_nodes(std::span<const NodeId> locals, int p);

struct Cluster {
  std::size_t id = 0;
  NodeId coordinator = kNoNode;
  Vec2 center;
  std::vector<NodeId> members;
};

/// Nearest-center assignment (Euclidean); ties go to the lowest cluster id.
/// `coordinators`, when non-empty, must have one entry per center.
std::vector<Cluster> assign_clusters(const std::map<NodeId, Vec2>& positions, std::span<const Vec2> centers,
                                     std::span<const NodeId> coordinators = {});

}  // namespace sdcps
