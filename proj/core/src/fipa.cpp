#include "muacp/fipa.hpp"

#include <algorithm>
#include <cctype>

#include "muacp/agent.hpp"
#include "muacp/literal.hpp"

namespace muacp::fipa {

using wire::Message;
using wire::OptionType;
using wire::Verb;

namespace {

struct NameEntry {
  Performative p;
  std::string_view name;
};

constexpr std::array<NameEntry, 13> kNames = {{
    {Performative::kInform, "INFORM"},
    {Performative::kRequest, "REQUEST"},
    {Performative::kQueryIf, "QUERY_IF"},
    {Performative::kSubscribe, "SUBSCRIBE"},
    {Performative::kNotUnderstood, "NOT_UNDERSTOOD"},
    {Performative::kAgree, "AGREE"},
    {Performative::kRefuse, "REFUSE"},
    {Performative::kCfp, "CFP"},
    {Performative::kPropose, "PROPOSE"},
    {Performative::kAcceptProposal, "ACCEPT_PROPOSAL"},
    {Performative::kRejectProposal, "REJECT_PROPOSAL"},
    {Performative::kForward, "FORWARD"},
    {Performative::kProxy, "PROXY"},
}};

std::string canonical_or_raw(const std::string& s) {
  auto c = agent::canonical_literal(s);
  return c ? *c : s;
}

}  // namespace

std::string_view performative_name(Performative p) {
  for (const auto& e : kNames) {
    if (e.p == p) {
      return e.name;
    }
  }
  return "?";
}

std::optional<Performative> performative_from_name(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::toupper(c));
  });
  for (const auto& e : kNames) {
    if (e.name == upper) {
      return e.p;
    }
  }
  return std::nullopt;
}

std::optional<Performative> performative_from_code(std::uint8_t code) {
  for (const auto& e : kNames) {
    if (static_cast<std::uint8_t>(e.p) == code) {
      return e.p;
    }
  }
  return std::nullopt;
}

bool is_procedural(Performative p) {
  switch (p) {
    case Performative::kInform:
    case Performative::kRequest:
    case Performative::kQueryIf:
    case Performative::kSubscribe:
    case Performative::kNotUnderstood:
      return false;
    default:
      return true;
  }
}

std::string to_string(const FipaAction& a) {
  std::string s(performative_name(a.performative));
  s += "(" + a.sender + "->" + a.receiver;
  if (!a.content.empty()) {
    s += ", " + a.content;
  }
  if (a.conversation != 0) {
    s += ", conv " + std::to_string(a.conversation);
  }
  return s + ")";
}

std::string to_string(const FipaTrace& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) {
      s += ", ";
    }
    s += to_string(t[i]);
  }
  return s + "]";
}

std::vector<Emitted> translate(const FipaAction& a, std::uint16_t cid, std::uint16_t original_message_id) {
  Message m;
  m.header.correlation_id = cid;
  std::vector<Emitted> out;

  switch (a.performative) {
    case Performative::kInform:
      m = agent::literal_message(Verb::kTell, canonical_or_raw(a.content), wire::content_type::kLiteral);
      m.header.correlation_id = cid;
      out.push_back({std::move(m), false});
      break;

    case Performative::kRequest: {
      const std::string action = canonical_or_raw(a.content);
      m = agent::literal_message(Verb::kAsk, action, wire::content_type::kAction);
      m.header.correlation_id = cid;
      out.push_back({std::move(m), false});
      // What the receiver is expected to send back once the action is done.
      std::string done = "done(" + action + ")";
      if (auto lit = agent::parse_literal(action)) {
        done = agent::done_of(*lit).to_string();
      }
      Message reply = agent::literal_message(Verb::kTell, done, wire::content_type::kLiteral);
      reply.header.flags = wire::flag::kResponse;
      reply.header.correlation_id = cid;
      out.push_back({std::move(reply), true});
      break;
    }

    case Performative::kQueryIf:
      m = agent::literal_message(Verb::kAsk, canonical_or_raw(a.content), wire::content_type::kLiteral);
      m.header.correlation_id = cid;
      out.push_back({std::move(m), false});
      break;

    case Performative::kSubscribe:
      m.header.verb = Verb::kObserve;
      m.add(OptionType::kTopic, wire::to_bytes(a.content));
      out.push_back({std::move(m), false});
      break;

    case Performative::kNotUnderstood: {
      m.header.verb = Verb::kPing;
      Bytes err{agent::err_code::kNotUnderstood};
      const auto id = wire::be16(original_message_id);
      err.insert(err.end(), id.begin(), id.end());
      m.add(OptionType::kErr, std::move(err));
      out.push_back({std::move(m), false});
      break;
    }

    default: {
      // Procedural encoding: a base verb tagged with the performative and the conversation.
      const bool asks = a.performative == Performative::kCfp || a.performative == Performative::kForward ||
                        a.performative == Performative::kProxy;
      m.header.verb = asks ? Verb::kAsk : Verb::kTell;
      m.add(OptionType::kProc, {static_cast<std::uint8_t>(a.performative)});
      m.add(OptionType::kCid, wire::be16(cid));
      m.payload = wire::to_bytes(a.content);
      out.push_back({std::move(m), false});
      break;
    }
  }
  return out;
}

std::vector<Emitted> translate_request_as_ping(const FipaAction& a, std::uint16_t cid, std::uint16_t original) {
  if (a.performative != Performative::kRequest) {
    return translate(a, cid, original);
  }
  Message m;
  m.header.verb = Verb::kPing;
  m.header.correlation_id = cid;
  return {{std::move(m), false}};
}

std::optional<ObservableAction> project(AgentId from, AgentId to, const Message& m) {
  ObservableAction o;
  o.sender = from;
  o.receiver = to;
  o.cid = m.header.correlation_id;

  if (const auto* proc = m.find(OptionType::kProc); proc != nullptr && proc->value.size() == 1) {
    if (auto p = performative_from_code(proc->value[0])) {
      o.tag = std::string(performative_name(*p));
      o.content = wire::to_string(m.payload);
      return o;
    }
  }
  const auto* err = m.find(OptionType::kErr);
  const std::string content = canonical_or_raw(wire::to_string(m.payload));
  switch (m.header.verb) {
    case Verb::kPing:
      if (err == nullptr) {
        return std::nullopt;
      }
      o.tag = "NOT_UNDERSTOOD";
      return o;
    case Verb::kTell:
      o.tag = err != nullptr ? "UNKNOWN" : "INFORM";
      o.content = content;
      return o;
    case Verb::kAsk: {
      const auto* ct = m.find(OptionType::kContentType);
      const bool action = ct != nullptr && ct->value.size() == 1 && ct->value[0] == wire::content_type::kAction;
      o.tag = action ? "REQUEST" : "QUERY_IF";
      o.content = content;
      return o;
    }
    case Verb::kObserve:
      o.tag = "SUBSCRIBE";
      o.content = agent::topic_of(m).value_or("");
      return o;
  }
  return std::nullopt;
}

}  // namespace muacp::fipa
