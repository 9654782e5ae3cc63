#include "doctest.h"
#include "muacp/agent.hpp"
#include "muacp/literal.hpp"

using namespace muacp;
using namespace muacp::agent;
using wire::Message;
using wire::OptionType;
using wire::Verb;

namespace {

const AgentId kA{1};
const AgentId kB{2};
const resources::ResourceVector kPlenty{1'000'000, 1'000'000, 1'000'000, 1'000'000};

Agent make(AgentId id, AgentConfig cfg = {}) {
  return Agent(id, resources::ResourceBudget(kPlenty), cfg);
}

TransitionLabel from_b(const Message& m) {
  return TransitionLabel{kB, kA, m, 0};
}

Message tell(Agent& sender, const std::string& lit) {
  Message m = sender.make_message(Verb::kTell);
  m.payload = wire::to_bytes(lit);
  m.add(OptionType::kContentType, {wire::content_type::kLiteral});
  return m;
}

}  // namespace

TEST_CASE("literal parsing and canonical form") {
  const auto l = parse_literal(" on( a , b ) ");
  REQUIRE(l);
  CHECK(l->atom == "on");
  CHECK(l->args == std::vector<std::string>{"a", "b"});
  CHECK(l->to_string() == "on(a,b)");
  CHECK(parse_literal("~p(1)")->negated);
  CHECK(parse_literal("!p(1)")->to_string() == "\xC2\xACp(1)");
  CHECK(parse_literal("done(move(a,b))")->args == std::vector<std::string>{"move(a,b)"});
  CHECK(parse_literal("door")->args.empty());
  CHECK_FALSE(parse_literal("p(").has_value());
  CHECK_FALSE(parse_literal("").has_value());
  CHECK_FALSE(parse_literal("p(a))").has_value());
  CHECK(done_of(*parse_literal("open(valve1)")).to_string() == "done(open(valve1))");
}

TEST_CASE("knowledge base stays consistent") {
  KnowledgeBase kb;
  const auto p = *parse_literal("p(1)");
  CHECK(kb.insert(p));
  CHECK_FALSE(kb.insert(p));
  CHECK(kb.size() == 1);
  CHECK(kb.insert(p.negation()));
  CHECK(kb.contains(p.negation()));
  CHECK_FALSE(kb.contains(p));
  CHECK(kb.consistent());
}

TEST_CASE("send charges wire bytes and grows history") {
  Agent a = make(kA);
  const Message m = tell(a, "p(1)");
  const auto before = a.budget().remaining().bandwidth;
  const auto r = a.send(m, kB, 0);
  CHECK(r.status == StepStatus::kOk);
  REQUIRE(r.label);
  CHECK(r.label->receiver == kB);
  CHECK(a.history().size() == 1);
  CHECK(before - a.budget().remaining().bandwidth == static_cast<resources::Amount>(wire::wire_size(m)));
}

TEST_CASE("send with no bandwidth left is infeasible and changes nothing") {
  Agent a(kA, resources::ResourceBudget({0, 0, 0, 0}));
  const Message m = tell(a, "p(1)");
  const auto r = a.send(m, kB, 0);
  CHECK(r.status == StepStatus::kInfeasible);
  CHECK(a.history().empty());
  CHECK(a.budget().remaining() == resources::ResourceVector{});
}

TEST_CASE("history is a ring of H_cap entries") {
  AgentConfig cfg;
  cfg.history_capacity = 2;
  Agent a = make(kA, cfg);
  Message m1 = tell(a, "p(1)");
  Message m2 = tell(a, "p(2)");
  Message m3 = tell(a, "p(3)");
  a.send(m1, kB, 0);
  a.send(m2, kB, 1);
  a.send(m3, kB, 2);
  REQUIRE(a.history().size() == 2);
  CHECK(a.history().front().message == m2);
  CHECK(a.history().back().message == m3);
}

TEST_CASE("receiving TELL adds the literal; a negation replaces it") {
  Agent a = make(kA);
  Agent b = make(kB);
  a.receive(from_b(tell(b, "p(1)")), 0);
  CHECK(a.kb().contains(*parse_literal("p(1)")));
  a.receive(from_b(tell(b, "p(1)")), 1);
  CHECK(a.kb().size() == 1);
  a.receive(from_b(tell(b, "~p(1)")), 2);
  CHECK(a.kb().contains(*parse_literal("~p(1)")));
  CHECK_FALSE(a.kb().contains(*parse_literal("p(1)")));
}

TEST_CASE("PING is echoed as a response with the same correlation id") {
  Agent a = make(kA);
  Agent b = make(kB);
  Message ping = b.make_message(Verb::kPing);
  ping.header.correlation_id = 77;
  const auto r = a.receive(from_b(ping), 0);
  REQUIRE(r.replies.size() == 1);
  const Message& reply = r.replies[0].message;
  CHECK(reply.header.verb == Verb::kPing);
  CHECK(reply.header.has_flag(wire::flag::kResponse));
  CHECK(reply.header.correlation_id == 77);
  CHECK(reply.header.sequence == ping.header.message_id);
  CHECK(r.replies[0].to == kB);
}

TEST_CASE("ASK is answered from the knowledge base") {
  Agent a = make(kA);
  Agent b = make(kB);
  a.kb().insert(*parse_literal("door(open)"));
  a.kb().insert(*parse_literal("~light(on)"));

  auto ask = [&](const std::string& q, std::uint8_t ct = wire::content_type::kLiteral) {
    Message m = literal_message(Verb::kAsk, q, ct);
    m.header.message_id = 5;
    m.header.correlation_id = 9;
    auto r = a.receive(from_b(m), 0);
    REQUIRE(r.replies.size() == 1);
    return r.replies[0].message;
  };
  const Message yes = ask("door(open)");
  CHECK(yes.header.verb == Verb::kTell);
  CHECK(yes.header.correlation_id == 9);
  CHECK(wire::to_string(yes.payload) == "door(open)");
  CHECK(yes.find(OptionType::kErr) == nullptr);

  const Message neg = ask("light(on)");
  CHECK(wire::to_string(neg.payload) == "\xC2\xACl" "ight(on)");

  const Message unknown = ask("temp(hot)");
  REQUIRE(unknown.find(OptionType::kErr) != nullptr);
  CHECK(unknown.find(OptionType::kErr)->value[0] == err_code::kUnknown);

  const Message done = ask("open(valve1)", wire::content_type::kAction);
  CHECK(wire::to_string(done.payload) == "done(open(valve1))");
  CHECK(a.kb().contains(*parse_literal("done(open(valve1))")));
}

TEST_CASE("unparseable content gets an ERROR-flagged reply") {
  Agent a = make(kA);
  Agent b = make(kB);
  Message m = b.make_message(Verb::kTell);
  m.payload = wire::to_bytes("not a literal((");
  const auto r = a.receive(from_b(m), 0);
  REQUIRE(r.replies.size() == 1);
  CHECK(r.replies[0].message.header.has_flag(wire::flag::kError));
  CHECK(r.replies[0].message.find(OptionType::kErr)->value[0] == err_code::kBadContent);
}

TEST_CASE("malformed messages are answered with NOT-UNDERSTOOD") {
  Agent a = make(kA);
  Message m;
  m.header.verb = Verb::kTell;
  m.header.message_id = 0x0102;
  m.payload.assign(70000, 'x');
  const auto r = a.receive(from_b(m), 0);
  CHECK(r.status == StepStatus::kMalformed);
  REQUIRE(r.replies.size() == 1);
  const auto* err = r.replies[0].message.find(OptionType::kErr);
  REQUIRE(err != nullptr);
  CHECK(err->value == Bytes{err_code::kNotUnderstood, 0x01, 0x02});
}

TEST_CASE("OBSERVE then publish sends exactly one TELL per distinct subscriber") {
  Agent a = make(kA);
  Message obs;
  obs.header.verb = Verb::kObserve;
  obs.add(OptionType::kTopic, wire::to_bytes("temperature"));
  a.receive(TransitionLabel{kB, kA, obs, 0}, 0);
  a.receive(TransitionLabel{kB, kA, obs, 0}, 1);
  a.receive(TransitionLabel{AgentId{3}, kA, obs, 0}, 2);
  const auto out = a.publish("temperature", *parse_literal("temp(21)"));
  REQUIRE(out.size() == 2);
  CHECK(out[0].to == kB);
  CHECK(out[1].to == AgentId{3});
  for (const auto& o : out) {
    CHECK(o.message.header.verb == Verb::kTell);
    CHECK(topic_of(o.message) == "temperature");
  }
  CHECK(a.publish("humidity", *parse_literal("h(1)")).empty());
}

TEST_CASE("timers: nothing expired is the identity") {
  Agent a = make(kA);
  const auto r = a.fire_timers(100);
  CHECK(r.notices.empty());
  CHECK(r.retransmissions.empty());
}

TEST_CASE("an unanswered ASK times out with an ERROR-flagged TELL(unknown)") {
  AgentConfig cfg;
  cfg.ask_timeout = 10;
  Agent a = make(kA, cfg);
  Message ask = literal_message(Verb::kAsk, "p(1)", wire::content_type::kLiteral);
  ask.header.message_id = 1;
  ask.header.correlation_id = 4;
  a.send(ask, kB, 0);
  CHECK(a.pending_asks().size() == 1);
  CHECK(a.timers().size() == 1);
  CHECK(a.fire_timers(9).notices.empty());
  const auto r = a.fire_timers(10);
  CHECK(a.pending_asks().empty());
  REQUIRE(r.notices.size() == 1);
  CHECK(r.notices[0].header.has_flag(wire::flag::kError));
  CHECK(r.notices[0].header.correlation_id == 4);
  CHECK(wire::to_string(r.notices[0].payload) == "unknown");
}

TEST_CASE("answers cancel the pending ASK") {
  Agent a = make(kA);
  Agent b = make(kB);
  b.kb().insert(*parse_literal("p(1)"));
  Message ask = a.make_message(Verb::kAsk);
  ask.header.correlation_id = a.next_correlation_id();
  ask.payload = wire::to_bytes("p(1)");
  a.send(ask, kB, 0);
  const auto r = b.receive(TransitionLabel{kA, kB, ask, 0}, 1);
  REQUIRE(r.replies.size() == 1);
  a.receive(TransitionLabel{kB, kA, r.replies[0].message, 0}, 2);
  CHECK(a.pending_asks().empty());
  REQUIRE(a.answers().size() == 1);
  CHECK(a.answers()[0].content == "p(1)");
  CHECK_FALSE(a.answers()[0].unknown);
  CHECK(a.kb().contains(*parse_literal("p(1)")));
}

TEST_CASE("QoS-1 messages are retransmitted with the same id until acknowledged") {
  AgentConfig cfg;
  cfg.retry_interval = 5;
  Agent a = make(kA, cfg);
  Agent b = make(kB);
  Message m = tell(a, "p(1)");
  m.header.qos = 1;
  a.send(m, kB, 0);
  auto r = a.fire_timers(5);
  REQUIRE(r.retransmissions.size() == 1);
  CHECK(r.retransmissions[0].message.header.message_id == m.header.message_id);
  CHECK(r.retransmissions[0].message == m);

  // The receiver has no natural reply to a TELL, so it acknowledges with an empty PING.
  const auto rr = b.receive(TransitionLabel{kA, kB, m, 0}, 6);
  REQUIRE(rr.replies.size() == 1);
  CHECK(rr.replies[0].message.header.verb == Verb::kPing);
  CHECK(rr.replies[0].message.header.sequence == m.header.message_id);
  a.receive(TransitionLabel{kB, kA, rr.replies[0].message, 0}, 7);
  CHECK(a.retransmissions().empty());
  CHECK(a.fire_timers(100).retransmissions.empty());
}

TEST_CASE("retry limit abandons a QoS-1 message") {
  AgentConfig cfg;
  cfg.retry_interval = 5;
  cfg.retry_limit = 12;
  Agent a = make(kA, cfg);
  Message m = tell(a, "p(1)");
  m.header.qos = 1;
  a.send(m, kB, 0);
  CHECK(a.fire_timers(5).retransmissions.size() == 1);
  CHECK(a.fire_timers(10).retransmissions.size() == 1);
  CHECK(a.fire_timers(15).retransmissions.empty());
  CHECK(a.retransmissions().empty());
}

TEST_CASE("identical inputs give identical agents") {
  auto run = [] {
    Agent a = make(kA);
    Agent b = make(kB);
    for (int i = 0; i < 5; ++i) {
      a.receive(TransitionLabel{kB, kA, tell(b, "p(" + std::to_string(i) + ")"), 0}, i);
    }
    return std::make_pair(a.kb(), a.budget().remaining());
  };
  CHECK(run() == run());
}
