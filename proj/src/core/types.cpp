#include "sdcps/core/types.hpp"

#include <string>

#include "sdcps/core/error.hpp"

namespace sdcps {

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::Global: return "GLOBAL";
    case NodeRole::Super: return "SUPER";
    case NodeRole::AreaCoord: return "AREA_COORD";
    case NodeRole::Local: return "LOCAL";
    case NodeRole::Switch: return "SWITCH";
    case NodeRole::Host: return "HOST";
  }
  return "?";
}

NodeRole node_role_from_string(std::string_view s) {
  for (NodeRole r : {NodeRole::Global, NodeRole::Super, NodeRole::AreaCoord, NodeRole::Local, NodeRole::Switch,
                     NodeRole::Host}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::BadValue, "unknown node role '" + std::string(s) + "'");
}

}  // namespace sdcps
