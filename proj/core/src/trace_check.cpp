#include <algorithm>
#include <map>

#include "muacp/agent.hpp"
#include "muacp/fipa.hpp"
#include "muacp/literal.hpp"
#include "muacp/simnet.hpp"

namespace muacp::fipa {

namespace {

constexpr std::uint16_t kCidBase = 0x0100;
constexpr Tick kSettleTicks = 64;

std::uint16_t cid_of(std::uint32_t conversation) {
  return static_cast<std::uint16_t>(kCidBase + conversation);
}

bool same(const ObservableAction& x, const ObservableAction& y) {
  return x.tag == y.tag && x.sender == y.sender && x.receiver == y.receiver && x.content == y.content &&
         x.cid == y.cid;
}

std::string describe(const ObservableAction& o) {
  return o.tag + "(" + std::to_string(o.sender.value) + "->" + std::to_string(o.receiver.value) + ", " + o.content +
         ", cid " + std::to_string(o.cid) + ")";
}

class Harness {
 public:
  Harness(const ConversationAutomaton& a, const FipaTrace& trace) : net_(lossless()) {
    const auto roles = a.roles();
    for (std::size_t i = 0; i < roles.size(); ++i) {
      ids_[roles[i]] = AgentId{static_cast<std::uint32_t>(i + 1)};
    }
    for (const auto& act : trace) {
      for (const auto* r : {&act.sender, &act.receiver}) {
        if (ids_.count(*r) == 0) {
          ids_[*r] = AgentId{static_cast<std::uint32_t>(ids_.size() + 1)};
        }
      }
    }
    const resources::ResourceVector plenty{1LL << 40, 1LL << 40, 1LL << 40, 1LL << 40};
    for (const auto& [role, id] : ids_) {
      net_.add(id, std::make_unique<simnet::AgentProcess>(id, resources::ResourceBudget(plenty)));
    }
  }

  AgentId id(const std::string& role) const { return ids_.at(role); }
  simnet::AgentProcess& proc(const std::string& role) { return net_.get<simnet::AgentProcess>(id(role)); }
  simnet::Network& net() { return net_; }

  /// Projection of every send so far, in send order.
  const ObservableTrace& projected() {
    const auto& recs = net_.log().records();
    for (; scanned_ < recs.size(); ++scanned_) {
      const auto& r = recs[scanned_];
      if (r.kind != simnet::EventKind::kSend) {
        continue;
      }
      ++messages_;
      if (auto o = project(r.from, r.to, wire::decode(wire::from_hex(r.wire_hex)))) {
        trace_.push_back(std::move(*o));
        consumed_.push_back(false);
      }
    }
    return trace_;
  }

  std::size_t messages() {
    projected();
    return messages_;
  }

  /// Index of the first unconsumed projected action equal to `want`. Skipped actions count as
  /// delayed on the channel, except that one agent's messages within a conversation keep their
  /// order; `blocked` is set when that would be violated.
  std::optional<std::size_t> find(const ObservableAction& want, bool& blocked) {
    projected();
    blocked = false;
    for (std::size_t j = 0; j < trace_.size(); ++j) {
      if (consumed_[j]) {
        continue;
      }
      if (same(trace_[j], want)) {
        return j;
      }
      if (trace_[j].cid == want.cid && trace_[j].sender == want.sender) {
        blocked = true;
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  void consume(std::size_t j) { consumed_[j] = true; }

 private:
  static simnet::SimConfig lossless() {
    simnet::SimConfig c;
    c.gst = 0;
    c.delta = 1;
    c.delay_min = 1;
    c.delay_max = 1;
    return c;
  }

  simnet::Network net_;
  std::map<std::string, AgentId> ids_;
  ObservableTrace trace_;
  std::vector<bool> consumed_;
  std::size_t scanned_ = 0;
  std::size_t messages_ = 0;
};

ObservableAction expected(const FipaAction& a, Harness& h) {
  ObservableAction o;
  o.tag = std::string(performative_name(a.performative));
  o.sender = h.id(a.sender);
  o.receiver = h.id(a.receiver);
  o.cid = cid_of(a.conversation);
  switch (a.performative) {
    case Performative::kInform:
    case Performative::kRequest:
    case Performative::kQueryIf:
      o.content = agent::canonical_literal(a.content).value_or(a.content);
      break;
    case Performative::kNotUnderstood:
      break;
    default:
      o.content = a.content;
      break;
  }
  return o;
}

std::uint16_t last_received_id(const agent::Agent& ag, AgentId from) {
  const auto& h = ag.history();
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (it->direction == agent::Direction::kReceived && it->peer == from) {
      return it->message.header.message_id;
    }
  }
  return 0;
}

std::optional<std::string> effect_failure(const FipaAction& a, Harness& h) {
  auto& receiver = h.proc(a.receiver).agent();
  switch (a.performative) {
    case Performative::kInform: {
      auto lit = agent::parse_literal(a.content);
      if (lit && !receiver.kb().contains(*lit)) {
        return "receiver does not believe " + lit->to_string();
      }
      break;
    }
    case Performative::kRequest: {
      auto lit = agent::parse_literal(a.content);
      if (lit && !receiver.kb().contains(agent::done_of(*lit))) {
        return "requested action " + lit->to_string() + " was not performed";
      }
      break;
    }
    case Performative::kSubscribe: {
      const auto& subs = receiver.subscriptions();
      auto it = subs.find(a.content);
      if (it == subs.end() || it->second.count(h.id(a.sender)) == 0) {
        return "subscription to '" + a.content + "' not registered";
      }
      break;
    }
    default:
      break;
  }
  return std::nullopt;
}

}  // namespace

TraceOutcome check_trace(const ConversationAutomaton& a, const FipaTrace& trace, const Translator& tau) {
  Harness h(a, trace);
  TraceOutcome out;

  // A speaker only informs what it believes.
  for (const auto& act : trace) {
    if (act.performative == Performative::kInform) {
      if (auto lit = agent::parse_literal(act.content)) {
        h.proc(act.sender).agent().kb().insert(*lit);
      }
    }
  }

  std::vector<ObservableAction> templates;
  auto fail = [&](std::string reason) {
    out.covered = false;
    out.reason = std::move(reason);
    out.messages = h.messages();
    out.projected = h.projected();
    return out;
  };

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const FipaAction& act = trace[i];
    const ObservableAction want = expected(act, h);
    bool blocked = false;
    auto hit = h.find(want, blocked);
    if (!hit && !blocked) {
      const AgentId from = h.id(act.sender);
      const AgentId to = h.id(act.receiver);
      auto& sender = h.proc(act.sender);
      const auto emitted = tau(act, cid_of(act.conversation), last_received_id(sender.agent(), to));
      h.net().act_as(from, [&](simnet::Context& ctx, simnet::Process&) {
        for (const auto& e : emitted) {
          if (e.from_receiver) {
            if (auto t = project(to, from, e.message)) {
              templates.push_back(*t);
            }
            continue;
          }
          wire::Message m = e.message;
          const auto fresh = sender.agent().make_message(m.header.verb);
          m.header.message_id = fresh.header.message_id;
          m.header.sequence = fresh.header.sequence;
          sender.send(ctx, to, m);
        }
      });
      h.net().run_until_quiescent(kSettleTicks);
      hit = h.find(want, blocked);
    }
    if (!hit) {
      return fail("step " + std::to_string(i + 1) + ": no message projects to " + describe(want) +
                  (blocked ? " (the sender already sent a different message in this conversation)" : ""));
    }
    h.consume(*hit);
  }

  const auto& projected = h.projected();
  for (const auto& t : templates) {
    if (std::none_of(projected.begin(), projected.end(), [&](const ObservableAction& o) { return same(o, t); })) {
      return fail("expected reply " + describe(t) + " never sent");
    }
  }
  for (const auto& act : trace) {
    if (auto why = effect_failure(act, h)) {
      return fail(to_string(act) + ": " + *why);
    }
  }
  // One CID per conversation and no CID outside the conversations of this trace.
  std::set<std::uint16_t> cids;
  for (const auto& act : trace) {
    cids.insert(cid_of(act.conversation));
  }
  for (const auto& o : projected) {
    if (cids.count(o.cid) == 0) {
      return fail("message " + describe(o) + " carries a foreign correlation id");
    }
  }

  out.covered = true;
  out.messages = h.messages();
  out.projected = projected;
  return out;
}

InclusionReport check_trace_inclusion(const ConversationAutomaton& a, std::size_t max_len, const Translator& tau) {
  InclusionReport r;
  r.protocol = a.name;
  r.max_len = max_len;
  for (const auto& trace : enumerate_traces(a, max_len)) {
    ++r.traces_checked;
    auto outcome = check_trace(a, trace, tau);
    if (!outcome.covered) {
      r.uncovered.push_back({trace, outcome.reason});
    }
  }
  return r;
}

ProceduralBound procedural_bound_check(const ConversationAutomaton& a) {
  if (!a.deterministic()) {
    throw Error("automaton '" + a.name + "' is not deterministic");
  }
  ProceduralBound b;
  b.k = a.size();
  EnumerationLimits limits;
  limits.max_len_cap = std::max(limits.max_len_cap, b.k);
  for (const auto& run : accepting_runs(a, b.k, limits)) {
    ++b.runs;
    const auto outcome = check_trace(a, run);
    b.max_messages_observed = std::max(b.max_messages_observed, outcome.messages);
    if ((outcome.messages > b.k || !outcome.covered) && !b.offending_run) {
      b.offending_run = run;
    }
  }
  return b;
}

}  // namespace muacp::fipa
