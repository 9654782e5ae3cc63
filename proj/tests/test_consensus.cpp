#include "doctest.h"
#include "muacp/consensus.hpp"

using namespace muacp;
using namespace muacp::consensus;

namespace {

std::filesystem::path config(const std::string& name) {
  return std::filesystem::path(MUACP_SOURCE_DIR) / "configs" / name;
}

wire::Message prepare(std::uint32_t round, std::uint32_t proposer) {
  return encode_prepare(Ballot{round, proposer}, 1);
}

wire::Message accept(std::uint32_t round, std::uint32_t proposer, std::string v) {
  PaxosMessage p;
  p.kind = Kind::kAccept;
  p.ballot = {round, proposer};
  p.decree = 1;
  p.value = Bytes(v.begin(), v.end());
  return encode(p);
}

Bytes bytes(const std::string& s) {
  return Bytes(s.begin(), s.end());
}

}  // namespace

TEST_CASE("ballots order by round then proposer and use 8 bytes") {
  CHECK(encode_ballot({1, 2}) == Bytes{0, 0, 0, 1, 0, 0, 0, 2});
  CHECK(decode_ballot(encode_ballot({7, 3})) == Ballot{7, 3});
  CHECK_FALSE(decode_ballot(Bytes{1, 2, 3}).has_value());
  CHECK(Ballot{1, 9} < Ballot{2, 1});
  CHECK(Ballot{2, 1} < Ballot{2, 2});
}

TEST_CASE("quorum is a strict majority") {
  CHECK_FALSE(is_quorum(1, 3));
  CHECK(is_quorum(2, 3));
  CHECK_FALSE(is_quorum(2, 4));
  CHECK(is_quorum(3, 4));
  CHECK(is_quorum(3, 5));
}

TEST_CASE("every message kind survives encode and decode") {
  PaxosMessage promise;
  promise.kind = Kind::kPromise;
  promise.ballot = {3, 1};
  promise.decree = 9;
  promise.prior = Accepted{Ballot{2, 2}, bytes("v2")};
  PaxosMessage nack;
  nack.kind = Kind::kNack;
  nack.ballot = {5, 2};
  nack.rejected = {3, 1};
  nack.accept_phase = true;
  nack.decree = 9;
  PaxosMessage decide;
  decide.kind = Kind::kDecide;
  decide.ballot = {3, 1};
  decide.value = bytes("v");
  decide.decree = 9;
  for (const auto& p : {promise, nack, decide, decode(accept(2, 1, "x")), decode(prepare(4, 4))}) {
    const auto m = encode(p);
    CHECK(wire::validate(m).ok());
    CHECK(decode(m) == p);
    CHECK(wire::decode(wire::encode(m)) == m);
  }
  wire::Message junk;
  CHECK_THROWS_AS(decode(junk), Malformed);
  CHECK_FALSE(try_decode(junk).has_value());
}

TEST_CASE("acceptor promises and nacks") {
  AcceptorRecord empty;
  const auto s1 = on_prepare(empty, prepare(1, 1));
  CHECK(s1.next.promised == Ballot{1, 1});
  const auto r1 = decode(s1.reply);
  CHECK(r1.kind == Kind::kPromise);
  CHECK_FALSE(r1.prior.has_value());
  CHECK(s1.reply.header.correlation_id == prepare_cid(Ballot{1, 1}));

  // Same ballot again: re-promised, state unchanged.
  const auto again = on_prepare(s1.next, prepare(1, 1));
  CHECK(decode(again.reply).kind == Kind::kPromise);
  CHECK(again.next == s1.next);

  // Lower ballot: nack naming the promised ballot, state unchanged.
  const auto low = on_prepare(s1.next, prepare(0, 2));
  const auto nack = decode(low.reply);
  CHECK(nack.kind == Kind::kNack);
  CHECK(nack.ballot == Ballot{1, 1});
  CHECK(nack.rejected == Ballot{0, 2});
  CHECK(low.next == s1.next);
}

TEST_CASE("acceptor accepts at or above the promise and reports it later") {
  AcceptorRecord acc = on_prepare({}, prepare(2, 1)).next;
  const auto lower = on_accept(acc, accept(1, 3, "z"));
  CHECK(decode(lower.reply).kind == Kind::kNack);
  CHECK_FALSE(lower.next.accepted.has_value());

  const auto ok = on_accept(acc, accept(2, 1, "a"));
  CHECK(decode(ok.reply).kind == Kind::kAccepted);
  CHECK(ok.next.accepted == Accepted{Ballot{2, 1}, bytes("a")});

  const auto p = decode(on_prepare(ok.next, prepare(3, 2)).reply);
  CHECK(p.kind == Kind::kPromise);
  CHECK(p.prior == Accepted{Ballot{2, 1}, bytes("a")});
}

TEST_CASE("proposer adopts the highest prior value") {
  ProposerRecord pr;
  pr.proposal = bytes("mine");
  const auto prep = start_ballot(pr, 5, 1, 1);
  CHECK(prep.kind == Kind::kPrepare);
  CHECK(pr.phase == Phase::kPreparing);

  PaxosMessage pa;
  pa.kind = Kind::kPromise;
  pa.ballot = {5, 1};
  pa.decree = 1;
  pa.prior = Accepted{Ballot{2, 2}, bytes("old")};
  PaxosMessage pb = pa;
  pb.prior = Accepted{Ballot{4, 3}, bytes("newer")};

  CHECK(on_promise(pr, 2, pa, 5, 1).broadcast.empty());
  CHECK(on_promise(pr, 3, pb, 5, 1).broadcast.empty());
  PaxosMessage pc = pa;
  pc.prior.reset();
  const auto step = on_promise(pr, 4, pc, 5, 1);
  REQUIRE(step.broadcast.size() == 1);
  CHECK(step.broadcast[0].kind == Kind::kAccept);
  CHECK(step.broadcast[0].value == bytes("newer"));
  CHECK(pr.phase == Phase::kAccepting);
}

TEST_CASE("proposer decides on a majority of Accepted and ignores stale replies") {
  ProposerRecord pr;
  pr.proposal = bytes("v");
  start_ballot(pr, 1, 1, 1);
  PaxosMessage promise;
  promise.kind = Kind::kPromise;
  promise.ballot = {1, 1};
  promise.decree = 1;
  on_promise(pr, 1, promise, 3, 1);
  REQUIRE(on_promise(pr, 2, promise, 3, 1).broadcast.size() == 1);

  PaxosMessage acc;
  acc.kind = Kind::kAccepted;
  acc.ballot = {1, 1};
  acc.value = bytes("v");
  acc.decree = 1;
  PaxosMessage stale = acc;
  stale.ballot = {0, 9};
  CHECK_FALSE(on_accepted(pr, 2, stale, 3).decided.has_value());
  CHECK(pr.stale == 1);
  CHECK_FALSE(on_accepted(pr, 1, acc, 3).decided.has_value());
  CHECK_FALSE(on_accepted(pr, 1, acc, 3).decided.has_value());  // duplicate
  const auto d = on_accepted(pr, 3, acc, 3);
  REQUIRE(d.decided.has_value());
  CHECK(*d.decided == bytes("v"));
  CHECK(pr.phase == Phase::kDecided);
}

TEST_CASE("a higher nack sends the proposer back to idle") {
  ProposerRecord pr;
  start_ballot(pr, 1, 1, 1);
  PaxosMessage n;
  n.kind = Kind::kNack;
  n.ballot = {4, 2};
  n.rejected = {1, 1};
  CHECK(on_nack(pr, n));
  CHECK(pr.phase == Phase::kIdle);
  CHECK(pr.max_round_seen == 4);
}

TEST_CASE("lossless n=3 with one proposer costs exactly 12 consensus messages") {
  const auto c = load_campaign(config("consensus-lossless-n3.json"));
  for (std::uint64_t seed : c.seeds) {
    const auto o = run_decree(c.decree_for(seed));
    CHECK(o.safe());
    CHECK(o.all_survivors_decided);
    CHECK(o.paxos_messages == 12);
    CHECK(o.messages.at("prepare") == 3);
    // The deciding proposer tells the two other learners.
    CHECK(o.messages.at("decide") == 2);
  }
}

TEST_CASE("n=5 without faults decides one proposed value everywhere") {
  DecreeConfig c;
  c.n = 5;
  c.proposers = {{AgentId{1}, "a"}, {AgentId{2}, "b"}};
  c.sim.delay_max = 4;
  c.sim.seed = 7;
  const auto o = run_decree(c);
  CHECK(o.safe());
  CHECK(o.all_survivors_decided);
  REQUIRE(o.decided.size() == 5);
  const auto v = o.decided.begin()->second;
  REQUIRE(v.has_value());
  CHECK((*v == bytes("a") || *v == bytes("b")));
  for (const auto& [id, d] : o.decided) {
    CHECK(d == v);
  }
}

TEST_CASE("small campaigns stay safe and live") {
  for (const char* f : {"consensus-n3.json", "consensus-n5.json"}) {
    CAPTURE(f);
    auto c = load_campaign(config(f));
    c.seeds.resize(50);
    const auto r = run_campaign(c);
    CHECK(r.runs == 50);
    CHECK(r.safe());
    CHECK(r.live());
    CHECK(r.budget_violations == 0);
  }
}

TEST_CASE("with half the nodes crashed nothing unsafe happens") {
  auto c = load_campaign(config("consensus-n4-f2.json"));
  c.seeds.resize(30);
  const auto r = run_campaign(c);
  CHECK(r.safe());
}

TEST_CASE("campaign runs are reproducible") {
  auto c = load_campaign(config("consensus-n3.json"));
  c.seeds = {11, 12};
  const auto a = run_campaign(c, true);
  const auto b = run_campaign(c, true);
  CHECK(campaign_csv(a) == campaign_csv(b));
  REQUIRE(a.details.size() == 2);
  CHECK(run_decree(c.decree_for(11), true).log_jsonl == run_decree(c.decree_for(11), true).log_jsonl);
}

TEST_CASE("bounded exhaustive exploration finds no disagreement") {
  ExhaustiveConfig ec;
  ec.max_deliveries = 8;
  ec.retries = 0;
  const auto r = exhaustive_check(ec);
  CHECK(r.states > 100);
  CHECK(r.violations == 0);
  CHECK_FALSE(r.counterexample.has_value());
  CHECK(r.decided_states > 0);
}

TEST_CASE("failure detector: timeouts double on false suspicion") {
  FailureDetector fd(AgentId{1}, {AgentId{2}}, FdConfig{4, 16, 0});
  auto to_ping = fd.step(0);
  REQUIRE(to_ping.size() == 1);
  fd.sent(AgentId{2}, 100, 0);
  CHECK(fd.step(3).empty());
  CHECK_FALSE(fd.suspected(AgentId{2}));
  fd.step(5);
  CHECK(fd.suspected(AgentId{2}));
  // The late answer proves the suspicion wrong.
  CHECK(fd.on_response(AgentId{2}, 100, 6));
  CHECK_FALSE(fd.suspected(AgentId{2}));
  CHECK(fd.timeout(AgentId{2}) == 8);
  CHECK_FALSE(fd.on_response(AgentId{2}, 999, 7));
  REQUIRE(fd.transitions().size() == 2);
  CHECK(fd.transitions()[0].suspected);
  CHECK_FALSE(fd.transitions()[1].suspected);
}

TEST_CASE("failure detector campaigns satisfy completeness and eventual accuracy") {
  for (const char* f : {"failure-detector.json", "failure-detector-stable.json"}) {
    CAPTURE(f);
    auto c = load_campaign(config(f));
    c.seeds.resize(10);
    for (std::uint64_t seed : c.seeds) {
      const auto dc = c.decree_for(seed);
      const auto o = run_decree(dc);
      const auto r = check_failure_detector(dc, o);
      CHECK(r.ok());
      CHECK(r.correct_pairs > 0);
      CHECK(o.safe());
    }
  }
}

TEST_CASE("campaign JSON errors") {
  CHECK_THROWS_AS(campaign_from_json("{"), Error);
  CHECK_THROWS_AS(campaign_from_json(R"({"n": 0})"), Error);
  CHECK_THROWS_AS(campaign_from_json(R"({"n": 3, "drop_rate": 2})"), Error);
}
