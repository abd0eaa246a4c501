#include "sdcps/security/policy.hpp"

#include "sdcps/core/error.hpp"

namespace sdcps {

std::string_view to_string(Effect e) { return e == Effect::Allow ? "ALLOW" : "DENY"; }

Effect effect_from_string(std::string_view s) {
  if (s == "ALLOW") return Effect::Allow;
  if (s == "DENY") return Effect::Deny;
  throw Error(ErrorCode::BadValue, "effect " + std::string(s));
}

Comparison comparison_from_string(std::string_view s) {
  if (s == "<") return Comparison::Lt;
  if (s == "<=") return Comparison::Le;
  if (s == ">") return Comparison::Gt;
  if (s == ">=") return Comparison::Ge;
  if (s == "==") return Comparison::Eq;
  if (s == "!=") return Comparison::Ne;
  throw Error(ErrorCode::BadValue, "comparison " + std::string(s));
}

bool Condition::holds(const std::map<std::string, double>& state) const {
  auto it = state.find(variable);
  if (it == state.end()) return false;
  const double v = it->second;
  switch (cmp) {
    case Comparison::Lt: return v < value;
    case Comparison::Le: return v <= value;
    case Comparison::Gt: return v > value;
    case Comparison::Ge: return v >= value;
    case Comparison::Eq: return v == value;
    case Comparison::Ne: return v != value;
  }
  return false;
}

PolicyDecision check_policy(const PolicySet& policies, std::string_view subject_role, std::string_view action,
                            std::string_view object, const std::map<std::string, double>& state) {
  for (std::size_t i = 0; i < policies.rules.size(); ++i) {
    const PolicyRule& r = policies.rules[i];
    if (r.subject_role && *r.subject_role != subject_role) continue;
    if (r.action && *r.action != action) continue;
    if (r.object && *r.object != object) continue;
    if (r.condition && !r.condition->holds(state)) continue;
    return {r.effect, i};
  }
  return {policies.default_effect, std::nullopt};
}

PolicySet default_policies(double temperature_limit) {
  PolicySet p;
  p.rules.push_back({std::nullopt, "heat-on", std::nullopt, Condition{"temperature", Comparison::Lt, temperature_limit},
                     Effect::Allow});
  p.rules.push_back({std::nullopt, "heat-off", std::nullopt, std::nullopt, Effect::Allow});
  p.rules.push_back({"SUPERVISOR", "actuate", std::nullopt, std::nullopt, Effect::Allow});
  p.rules.push_back({"CONTROLLER", "actuate", std::nullopt, std::nullopt, Effect::Allow});
  p.rules.push_back({std::nullopt, "actuate", std::nullopt, std::nullopt, Effect::Deny});
  p.rules.push_back({std::nullopt, "read", std::nullopt, std::nullopt, Effect::Allow});
  p.rules.push_back({std::nullopt, "deliver", std::nullopt, std::nullopt, Effect::Allow});
  p.default_effect = Effect::Deny;
  return p;
}

}  // namespace sdcps
