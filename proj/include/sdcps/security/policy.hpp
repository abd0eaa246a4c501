#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdcps {

enum class Effect { Allow, Deny };
enum class Comparison { Lt, Le, Gt, Ge, Eq, Ne };

std::string_view to_string(Effect e);
Effect effect_from_string(std::string_view s);
Comparison comparison_from_string(std::string_view s);

struct Condition {
  std::string variable;
  Comparison cmp = Comparison::Le;
  double value = 0.0;

  /// False when the variable is absent from `state`.
  bool holds(const std::map<std::string, double>& state) const;
};

/// Unset fields match anything.
struct PolicyRule {
  std::optional<std::string> subject_role;
  std::optional<std::string> action;
  std::optional<std::string> object;
  std::optional<Condition> condition;
  Effect effect = Effect::Deny;
};

struct PolicySet {
  std::vector<PolicyRule> rules;
  Effect default_effect = Effect::Deny;
};

struct PolicyDecision {
  Effect effect = Effect::Deny;
  std::optional<std::size_t> rule;  // index of the matching rule; none for the default
};

/// First matching rule wins; the default applies otherwise.
PolicyDecision check_policy(const PolicySet& policies, std::string_view subject_role, std::string_view action,
                            std::string_view object, const std::map<std::string, double>& state = {});

/// Roles and thresholds used by the simulator: supervisors may actuate,
/// users may only read, heating follows the room temperature bound.
PolicySet default_policies(double temperature_limit = 25.0);

}  // namespace sdcps
