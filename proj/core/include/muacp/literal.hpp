#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace muacp::agent {

/// A ground literal `[¬]name(arg1,...,argk)`. Arguments are ground terms and may nest,
/// e.g. `done(move(a,b))`.
struct Literal {
  bool negated = false;
  std::string atom;
  std::vector<std::string> args;

  Literal negation() const;
  /// Same literal with the sign cleared.
  Literal positive() const;

  /// Canonical text: no whitespace, `¬` prefix for negation, `name` alone when there are no args.
  std::string to_string() const;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// UTF-8 negation sign used in the canonical form. `~` and `!` are accepted when parsing.
inline constexpr std::string_view kNegation = "\xC2\xAC";

/// Parses a literal, ignoring whitespace. Returns nullopt for anything that is not ground and
/// well-bracketed.
std::optional<Literal> parse_literal(std::string_view text);

/// Strips whitespace and re-renders, so equal literals compare byte-for-byte.
std::optional<std::string> canonical_literal(std::string_view text);

/// `done(α)` for an action literal α.
Literal done_of(const Literal& action);

/// Set of ground literals that never holds a literal and its negation at once.
class KnowledgeBase {
 public:
  /// Inserts `l`, removing its negation first. Returns false when `l` was already present.
  bool insert(const Literal& l);
  bool erase(const Literal& l);
  bool contains(const Literal& l) const { return facts_.count(l) != 0; }
  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }
  const std::set<Literal>& facts() const { return facts_; }

  /// True iff no literal and its negation are both present.
  bool consistent() const;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  std::set<Literal> facts_;
};

}  // namespace muacp::agent
