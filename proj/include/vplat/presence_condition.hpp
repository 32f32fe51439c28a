// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vplat {

// Propositional formula over feature names. Immutable; copies share nodes.
//
// Canonical text form is infix with `|`, `&`, `!`, `true`, `false`, binary
// operators left-associative and parenthesised only where needed to re-parse
// to the same tree. Precedence: `!` > `&` > `|`.
class PresenceCondition {
 public:
  enum class Kind { True, False, Literal, Not, And, Or };

  PresenceCondition();  // true

  static PresenceCondition constant(bool value);
  static PresenceCondition literal(std::string feature);
  static PresenceCondition negation(PresenceCondition operand);
  static PresenceCondition conjunction(PresenceCondition lhs, PresenceCondition rhs);
  static PresenceCondition disjunction(PresenceCondition lhs, PresenceCondition rhs);

  // Throws Error(InvalidArgument) on malformed text.
  static PresenceCondition parse(std::string_view text);

  Kind kind() const;
  const std::string& name() const;  // Literal only
  PresenceCondition lhs() const;    // Not/And/Or (operand for Not)
  PresenceCondition rhs() const;    // And/Or

  std::string to_string() const;

  // Unselected literals evaluate to false.
  bool evaluate(const std::set<std::string>& selected) const;

  // Returns `feature | *this`.
  PresenceCondition disjoin_feature(std::string_view feature) const;

  // Distinct literal names in order of first appearance (left to right).
  std::vector<std::string> literals() const;
  bool mentions(std::string_view feature) const;

  PresenceCondition rename_literal(std::string_view from, std::string_view to) const;
  PresenceCondition replace_literal(std::string_view feature, bool value) const;

  friend bool operator==(const PresenceCondition& a, const PresenceCondition& b);

 private:
  struct Node;
  explicit PresenceCondition(std::shared_ptr<const Node> node);

  std::shared_ptr<const Node> node_;
};

}  // namespace vplat
