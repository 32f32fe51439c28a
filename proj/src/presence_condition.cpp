// SPDX-License-Identifier: Apache-2.0
#include "vplat/presence_condition.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "vplat/error.hpp"
#include "vplat/names.hpp"

namespace vplat {

struct PresenceCondition::Node {
  Kind kind;
  std::string name;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

int precedence(PresenceCondition::Kind kind) {
  switch (kind) {
    case PresenceCondition::Kind::Or: return 1;
    case PresenceCondition::Kind::And: return 2;
    case PresenceCondition::Kind::Not: return 3;
    default: return 4;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PresenceCondition parse_all() {
    PresenceCondition pc = parse_or();
    skip_space();
    if (pos_ != text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
    return pc;
  }

 private:
  PresenceCondition parse_or() {
    PresenceCondition lhs = parse_and();
    while (consume('|')) lhs = PresenceCondition::disjunction(lhs, parse_and());
    return lhs;
  }

  PresenceCondition parse_and() {
    PresenceCondition lhs = parse_unary();
    while (consume('&')) lhs = PresenceCondition::conjunction(lhs, parse_unary());
    return lhs;
  }

  PresenceCondition parse_unary() {
    if (consume('!')) return PresenceCondition::negation(parse_unary());
    if (consume('(')) {
      PresenceCondition inner = parse_or();
      if (!consume(')')) error("expected ')'");
      return inner;
    }
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_delimiter(text_[pos_])) ++pos_;
    std::string_view word = text_.substr(start, pos_ - start);
    if (word.empty()) error("expected operand");
    if (word == "true") return PresenceCondition::constant(true);
    if (word == "false") return PresenceCondition::constant(false);
    if (!is_valid_feature_name(word)) error("invalid literal '" + std::string(word) + "'");
    return PresenceCondition::literal(std::string(word));
  }

  static bool is_delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '|' || c == '&' ||
           c == '!' || c == '(' || c == ')';
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::InvalidArgument, "presence condition '" + std::string(text_) + "': " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

PresenceCondition::PresenceCondition() : PresenceCondition(constant(true)) {}

PresenceCondition::PresenceCondition(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

PresenceCondition PresenceCondition::constant(bool value) {
  static const auto kTrue = std::make_shared<const Node>(Node{Kind::True, {}, {}, {}});
  static const auto kFalse = std::make_shared<const Node>(Node{Kind::False, {}, {}, {}});
  return PresenceCondition(value ? kTrue : kFalse);
}

PresenceCondition PresenceCondition::literal(std::string feature) {
  return PresenceCondition(std::make_shared<const Node>(Node{Kind::Literal, std::move(feature), {}, {}}));
}

PresenceCondition PresenceCondition::negation(PresenceCondition operand) {
  return PresenceCondition(std::make_shared<const Node>(Node{Kind::Not, {}, operand.node_, {}}));
}

PresenceCondition PresenceCondition::conjunction(PresenceCondition lhs, PresenceCondition rhs) {
  return PresenceCondition(
      std::make_shared<const Node>(Node{Kind::And, {}, lhs.node_, rhs.node_}));
}

PresenceCondition PresenceCondition::disjunction(PresenceCondition lhs, PresenceCondition rhs) {
  return PresenceCondition(
      std::make_shared<const Node>(Node{Kind::Or, {}, lhs.node_, rhs.node_}));
}

PresenceCondition PresenceCondition::parse(std::string_view text) {
  return Parser(text).parse_all();
}

PresenceCondition::Kind PresenceCondition::kind() const { return node_->kind; }
const std::string& PresenceCondition::name() const { return node_->name; }
PresenceCondition PresenceCondition::lhs() const { return PresenceCondition(node_->lhs); }
PresenceCondition PresenceCondition::rhs() const { return PresenceCondition(node_->rhs); }

std::string PresenceCondition::to_string() const {
  switch (kind()) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Literal: return name();
    case Kind::Not: {
      PresenceCondition operand = lhs();
      std::string inner = operand.to_string();
      if (precedence(operand.kind()) < precedence(Kind::Not)) inner = "(" + inner + ")";
      return "!" + inner;
    }
    case Kind::And:
    case Kind::Or: {
      const int own = precedence(kind());
      PresenceCondition left = lhs();
      PresenceCondition right = rhs();
      std::string l = left.to_string();
      std::string r = right.to_string();
      if (precedence(left.kind()) < own) l = "(" + l + ")";
      if (precedence(right.kind()) <= own) r = "(" + r + ")";
      return l + (kind() == Kind::And ? " & " : " | ") + r;
    }
  }
  return {};
}

bool PresenceCondition::evaluate(const std::set<std::string>& selected) const {
  switch (kind()) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Literal: return selected.count(name()) > 0;
    case Kind::Not: return !lhs().evaluate(selected);
    case Kind::And: return lhs().evaluate(selected) && rhs().evaluate(selected);
    case Kind::Or: return lhs().evaluate(selected) || rhs().evaluate(selected);
  }
  return false;
}

PresenceCondition PresenceCondition::disjoin_feature(std::string_view feature) const {
  return disjunction(literal(std::string(feature)), *this);
}

std::vector<std::string> PresenceCondition::literals() const {
  std::vector<std::string> out;
  std::vector<const Node*> stack{node_.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (n->kind == Kind::Literal) {
      if (std::find(out.begin(), out.end(), n->name) == out.end()) out.push_back(n->name);
      continue;
    }
    if (n->rhs) stack.push_back(n->rhs.get());
    if (n->lhs) stack.push_back(n->lhs.get());
  }
  return out;
}

bool PresenceCondition::mentions(std::string_view feature) const {
  const auto lits = literals();
  return std::find(lits.begin(), lits.end(), feature) != lits.end();
}

PresenceCondition PresenceCondition::rename_literal(std::string_view from, std::string_view to) const {
  switch (kind()) {
    case Kind::True:
    case Kind::False:
      return *this;
    case Kind::Literal:
      return name() == from ? literal(std::string(to)) : *this;
    case Kind::Not:
      return negation(lhs().rename_literal(from, to));
    case Kind::And:
      return conjunction(lhs().rename_literal(from, to), rhs().rename_literal(from, to));
    case Kind::Or:
      return disjunction(lhs().rename_literal(from, to), rhs().rename_literal(from, to));
  }
  return *this;
}

PresenceCondition PresenceCondition::replace_literal(std::string_view feature, bool value) const {
  switch (kind()) {
    case Kind::True:
    case Kind::False:
      return *this;
    case Kind::Literal:
      return name() == feature ? constant(value) : *this;
    case Kind::Not:
      return negation(lhs().replace_literal(feature, value));
    case Kind::And:
      return conjunction(lhs().replace_literal(feature, value), rhs().replace_literal(feature, value));
    case Kind::Or:
      return disjunction(lhs().replace_literal(feature, value), rhs().replace_literal(feature, value));
  }
  return *this;
}

bool operator==(const PresenceCondition& a, const PresenceCondition& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case PresenceCondition::Kind::True:
    case PresenceCondition::Kind::False:
      return true;
    case PresenceCondition::Kind::Literal:
      return a.name() == b.name();
    case PresenceCondition::Kind::Not:
      return a.lhs() == b.lhs();
    case PresenceCondition::Kind::And:
    case PresenceCondition::Kind::Or:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
  return false;
}

}  // namespace vplat
