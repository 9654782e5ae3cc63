#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include "muacp/fipa.hpp"

namespace muacp::fipa {

std::vector<std::string> ConversationAutomaton::roles() const {
  std::set<std::string> r;
  for (const auto& t : transitions) {
    r.insert(t.sender_role);
    r.insert(t.receiver_role);
  }
  return {r.begin(), r.end()};
}

void ConversationAutomaton::validate(std::uint32_t max_nesting) const {
  if (states.empty()) {
    throw Error("automaton '" + name + "' has no states");
  }
  const auto n = static_cast<std::uint32_t>(states.size());
  if (initial >= n) {
    throw Error("automaton '" + name + "': initial state out of range");
  }
  for (auto q : accepting) {
    if (q >= n) {
      throw Error("automaton '" + name + "': accepting state out of range");
    }
  }
  for (const auto& t : transitions) {
    if (t.from >= n || t.to >= n) {
      throw Error("automaton '" + name + "': transition references a missing state");
    }
    if (t.sender_role.empty() || t.receiver_role.empty() || t.sender_role == t.receiver_role) {
      throw Error("automaton '" + name + "': transition needs two distinct roles");
    }
  }
  if (nesting_depth == 0 || nesting_depth > max_nesting) {
    throw Error("automaton '" + name + "': nesting depth " + std::to_string(nesting_depth) + " outside [1, " +
                std::to_string(max_nesting) + "]");
  }
}

bool ConversationAutomaton::deterministic() const {
  std::set<std::tuple<std::uint32_t, Performative, std::string, std::string, std::uint32_t, std::string>> seen;
  for (const auto& t : transitions) {
    if (!seen.emplace(t.from, t.performative, t.sender_role, t.receiver_role, t.conversation, t.content).second) {
      return false;
    }
  }
  return true;
}

std::set<std::uint32_t> ConversationAutomaton::coreachable() const {
  std::set<std::uint32_t> live(accepting.begin(), accepting.end());
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& t : transitions) {
      if (live.count(t.to) != 0 && live.insert(t.from).second) {
        grew = true;
      }
    }
  }
  return live;
}

FipaAction ConversationAutomaton::action_of(const Transition& t) const {
  FipaAction a{t.performative, t.sender_role, t.receiver_role, t.content, t.conversation};
  if (a.content.empty()) {
    std::string n(performative_name(t.performative));
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    a.content = n;
  }
  return a;
}

ConversationAutomaton product(const ConversationAutomaton& a, const ConversationAutomaton& b) {
  ConversationAutomaton p;
  p.name = a.name + "*" + b.name;
  const auto nb = static_cast<std::uint32_t>(b.size());
  auto idx = [nb](std::uint32_t i, std::uint32_t j) { return i * nb + j; };
  for (const auto& sa : a.states) {
    for (const auto& sb : b.states) {
      p.states.push_back(sa + "|" + sb);
    }
  }
  p.initial = idx(a.initial, b.initial);
  for (auto qa : a.accepting) {
    for (auto qb : b.accepting) {
      p.accepting.insert(idx(qa, qb));
    }
  }
  std::uint32_t offset = 0;
  for (const auto& t : a.transitions) {
    offset = std::max(offset, t.conversation + 1);
  }
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    for (std::uint32_t j = 0; j < b.size(); ++j) {
      for (const auto& t : a.transitions) {
        if (t.from == i) {
          Transition c = t;
          c.from = idx(i, j);
          c.to = idx(t.to, j);
          p.transitions.push_back(c);
        }
      }
      for (const auto& t : b.transitions) {
        if (t.from == j) {
          Transition c = t;
          c.from = idx(i, j);
          c.to = idx(i, t.to);
          c.conversation += offset;
          p.transitions.push_back(c);
        }
      }
    }
  }
  p.nesting_depth = a.nesting_depth + b.nesting_depth;
  return p;
}

namespace {

void check_limits(const ConversationAutomaton& a, std::size_t max_len, const EnumerationLimits& limits) {
  if (max_len > limits.max_len_cap) {
    throw TooLarge("max_len " + std::to_string(max_len) + " exceeds " + std::to_string(limits.max_len_cap));
  }
  if (a.size() * max_len > limits.explosion_cap) {
    throw TooLarge("automaton '" + a.name + "': " + std::to_string(a.size()) + " states x length " +
                   std::to_string(max_len) + " exceeds the explosion cap");
  }
}

struct Walker {
  const ConversationAutomaton& a;
  const std::set<std::uint32_t> live;
  std::size_t max_len;
  std::size_t max_traces;
  bool prefixes;
  std::vector<FipaTrace> out;
  FipaTrace path;

  void emit() {
    if (out.size() >= max_traces) {
      throw TooLarge("automaton '" + a.name + "' yields more than " + std::to_string(max_traces) + " traces");
    }
    out.push_back(path);
  }

  void walk(std::uint32_t q) {
    if (!prefixes && a.accepting.count(q) != 0) {
      emit();
    }
    if (path.size() == max_len) {
      return;
    }
    for (const auto& t : a.transitions) {
      if (t.from != q || live.count(t.to) == 0) {
        continue;
      }
      path.push_back(a.action_of(t));
      if (prefixes) {
        emit();
      }
      walk(t.to);
      path.pop_back();
    }
  }
};

}  // namespace

std::vector<FipaTrace> enumerate_traces(const ConversationAutomaton& a, std::size_t max_len,
                                        const EnumerationLimits& limits) {
  a.validate();
  check_limits(a, max_len, limits);
  Walker w{a, a.coreachable(), max_len, limits.max_traces, true, {}, {}};
  if (w.live.count(a.initial) != 0) {
    w.walk(a.initial);
  }
  return std::move(w.out);
}

std::vector<FipaTrace> accepting_runs(const ConversationAutomaton& a, std::size_t max_len,
                                      const EnumerationLimits& limits) {
  a.validate();
  check_limits(a, max_len, limits);
  Walker w{a, a.coreachable(), max_len, limits.max_traces, false, {}, {}};
  if (w.live.count(a.initial) != 0) {
    w.walk(a.initial);
  }
  return std::move(w.out);
}

}  // namespace muacp::fipa
