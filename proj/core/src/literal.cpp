#include "muacp/literal.hpp"

#include <cctype>

namespace muacp::agent {

namespace {

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '\'';
}

std::string strip_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      out.push_back(c);
    }
  }
  return out;
}

// Validates a ground term `name` or `name(t1,...,tk)` over [pos, end); returns the end position.
std::optional<std::size_t> scan_term(const std::string& s, std::size_t pos) {
  const std::size_t start = pos;
  while (pos < s.size() && name_char(s[pos])) {
    ++pos;
  }
  if (pos == start) {
    return std::nullopt;
  }
  if (pos < s.size() && s[pos] == '(') {
    ++pos;
    if (pos < s.size() && s[pos] == ')') {
      return pos + 1;
    }
    while (true) {
      auto next = scan_term(s, pos);
      if (!next) {
        return std::nullopt;
      }
      pos = *next;
      if (pos >= s.size()) {
        return std::nullopt;
      }
      if (s[pos] == ',') {
        ++pos;
        continue;
      }
      if (s[pos] == ')') {
        return pos + 1;
      }
      return std::nullopt;
    }
  }
  return pos;
}

}  // namespace

Literal Literal::negation() const {
  Literal l = *this;
  l.negated = !negated;
  return l;
}

Literal Literal::positive() const {
  Literal l = *this;
  l.negated = false;
  return l;
}

std::string Literal::to_string() const {
  std::string s;
  if (negated) {
    s += kNegation;
  }
  s += atom;
  if (!args.empty()) {
    s += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i > 0) {
        s += ',';
      }
      s += args[i];
    }
    s += ')';
  }
  return s;
}

std::optional<Literal> parse_literal(std::string_view text) {
  std::string s = strip_ws(text);
  Literal l;
  std::size_t pos = 0;
  if (s.compare(0, kNegation.size(), kNegation) == 0) {
    l.negated = true;
    pos = kNegation.size();
  } else if (!s.empty() && (s[0] == '~' || s[0] == '!')) {
    l.negated = true;
    pos = 1;
  }
  const auto end = scan_term(s, pos);
  if (!end || *end != s.size()) {
    return std::nullopt;
  }
  const std::size_t open = s.find('(', pos);
  if (open == std::string::npos) {
    l.atom = s.substr(pos);
    return l;
  }
  l.atom = s.substr(pos, open - pos);
  // Split the argument list at depth-1 commas.
  int depth = 0;
  std::size_t arg_start = open + 1;
  for (std::size_t i = open + 1; i + 1 < s.size(); ++i) {
    const char c = s[i];
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    } else if (c == ',' && depth == 0) {
      l.args.push_back(s.substr(arg_start, i - arg_start));
      arg_start = i + 1;
    }
  }
  if (arg_start < s.size() - 1) {
    l.args.push_back(s.substr(arg_start, s.size() - 1 - arg_start));
  }
  return l;
}

std::optional<std::string> canonical_literal(std::string_view text) {
  auto l = parse_literal(text);
  if (!l) {
    return std::nullopt;
  }
  return l->to_string();
}

Literal done_of(const Literal& action) {
  Literal d;
  d.atom = "done";
  d.args.push_back(action.positive().to_string());
  return d;
}

bool KnowledgeBase::insert(const Literal& l) {
  facts_.erase(l.negation());
  return facts_.insert(l).second;
}

bool KnowledgeBase::erase(const Literal& l) {
  return facts_.erase(l) != 0;
}

bool KnowledgeBase::consistent() const {
  for (const auto& l : facts_) {
    if (!l.negated && facts_.count(l.negation()) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace muacp::agent
