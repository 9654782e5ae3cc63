#include <cmath>

#include "doctest.h"
#include "muacp/compression.hpp"

using namespace muacp;
using namespace muacp::compression;
using wire::Verb;

namespace {

AbstractMessage verb_only(Verb v) {
  AbstractMessage m;
  m.verb = v;
  return m;
}

MessageDistribution verbs(std::vector<double> p) {
  MessageDistribution d;
  d.name = "verbs";
  for (std::size_t i = 0; i < p.size(); ++i) {
    d.support.emplace_back(verb_only(static_cast<Verb>(i)), p[i]);
  }
  return d;
}

std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(MUACP_SOURCE_DIR) / "configs" / "distributions" / (name + ".json");
}

}  // namespace

TEST_CASE("Shannon entropy of small distributions") {
  CHECK(shannon({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(2.0));
  CHECK(shannon({0.5, 0.25, 0.125, 0.125}) == doctest::Approx(1.75));
  CHECK(shannon({1.0}) == 0.0);
  CHECK(shannon({0.5, 0.5, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("entropy decomposes along verb, options and payload") {
  const auto e = entropy(verbs({0.5, 0.25, 0.125, 0.125}));
  CHECK(e.h_v == doctest::Approx(1.75));
  CHECK(e.h_o_given_v == doctest::Approx(0));
  CHECK(e.h_p_given_vo == doctest::Approx(0));
  CHECK(e.h_total == doctest::Approx(1.75));

  MessageDistribution d;
  AbstractMessage a = verb_only(Verb::kTell);
  a.payload = {1};
  AbstractMessage b = a;
  b.payload = {2};
  AbstractMessage c = a;
  c.options = {{5, 8}};
  d.support = {{a, 0.25}, {b, 0.25}, {c, 0.5}};
  const auto r = entropy(d);
  CHECK(r.h_v == doctest::Approx(0));
  CHECK(r.h_o_given_v == doctest::Approx(1.0));
  CHECK(r.h_p_given_vo == doctest::Approx(0.5));
  CHECK(r.h_total == doctest::Approx(1.5));
}

TEST_CASE("Huffman code lengths") {
  const auto h = huffman_code({0.5, 0.25, 0.25});
  REQUIRE(h.codewords.size() == 3);
  CHECK(h.codewords[0].size() == 1);
  CHECK(h.codewords[1].size() == 2);
  CHECK(h.codewords[2].size() == 2);
  CHECK(h.expected_length == doctest::Approx(1.5));
  CHECK(h.kraft_sum == doctest::Approx(1.0));
  CHECK(h.within_one_bit());

  const auto one = huffman_code({1.0});
  CHECK(one.codewords == std::vector<std::string>{""});
  CHECK(one.expected_length == 0);
  CHECK(one.within_one_bit());

  // Prefix-free.
  const auto z = huffman_code({0.4, 0.3, 0.1, 0.1, 0.05, 0.05});
  for (std::size_t i = 0; i < z.codewords.size(); ++i) {
    for (std::size_t j = 0; j < z.codewords.size(); ++j) {
      if (i != j) {
        CHECK(z.codewords[j].rfind(z.codewords[i], 0) != 0);
      }
    }
  }
  CHECK(z.kraft_ok());
  CHECK(z.within_one_bit());
}

TEST_CASE("bound for a uniform verb distribution") {
  const auto r = check_bound(verbs({0.25, 0.25, 0.25, 0.25}));
  CHECK(r.entropy.h_total == doctest::Approx(2.0));
  CHECK(r.index_bits == 4);
  CHECK(r.bound_bits == doctest::Approx(97.0));
  CHECK(r.encoder_bits == doctest::Approx(94.0));
  CHECK(r.wire_bits == doctest::Approx(88.0));
  CHECK(r.holds());
}

TEST_CASE("point mass: zero entropy, bound still holds") {
  const auto d = load_distribution(fixture("point-mass"));
  const auto r = check_bound(d);
  CHECK(r.entropy.h_total == 0);
  CHECK(r.l_v == 0);
  CHECK(r.encoder_bits == doctest::Approx(92.0));
  CHECK(r.bound_bits == doctest::Approx(95.0));
  CHECK(r.holds());
  // Byte-aligned wire form beats the index-carrying encoder here.
  CHECK(r.alignment_slack_bits == doctest::Approx(-4.0));
}

TEST_CASE("every shipped distribution satisfies the bound") {
  for (const char* n : {"uniform-verb", "point-mass", "dyadic-verbs", "consensus-mix", "option-heavy", "zipf-payloads"}) {
    CAPTURE(n);
    const auto r = check_bound(load_distribution(fixture(n)));
    CHECK(r.holds());
    CHECK(r.tables_ok);
    CHECK(r.tables_built > 0);
    CHECK(r.encoder_bits >= r.h_hdr + r.index_bits + r.entropy.h_total - 1e-9);
  }
}

TEST_CASE("random distributions satisfy the bound") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    CAPTURE(seed);
    const auto d = random_distribution(seed, 40);
    CHECK_NOTHROW(d.validate());
    const auto r = check_bound(d);
    CHECK(r.holds());
    CHECK(r.entropy.h_total <= std::log2(static_cast<double>(r.support)) + 1e-9);
  }
  CHECK(distribution_to_json(random_distribution(3, 10)) == distribution_to_json(random_distribution(3, 10)));
}

TEST_CASE("invalid distributions are rejected") {
  CHECK_THROWS_AS(verbs({0.5, 0.4}).validate(), InvalidDistribution);
  CHECK_THROWS_AS(verbs({1.2, -0.2}).validate(), InvalidDistribution);
  CHECK_THROWS_AS(MessageDistribution{}.validate(), InvalidDistribution);
  MessageDistribution big;
  AbstractMessage m = verb_only(Verb::kTell);
  m.payload.assign(70000, 0);
  big.support = {{m, 1.0}};
  CHECK_THROWS_AS(big.validate(), InvalidDistribution);
  CHECK_THROWS_AS(check_bound(verbs({0.7, 0.7})), InvalidDistribution);
  CHECK_THROWS_AS(distribution_from_json("{\"support\": 3}"), Error);
}

TEST_CASE("normalization merges identical messages") {
  MessageDistribution d;
  d.support = {{verb_only(Verb::kPing), 0.25}, {verb_only(Verb::kTell), 0.5}, {verb_only(Verb::kPing), 0.25}};
  const auto n = normalized(d);
  REQUIRE(n.support.size() == 2);
  CHECK(entropy(d).h_total == doctest::Approx(1.0));
}

TEST_CASE("wire_bytes matches the codec") {
  AbstractMessage m = verb_only(Verb::kTell);
  CHECK(wire_bytes(m) == 11);
  m.options = {{4, 9}};
  CHECK(wire_bytes(m) == 23);
  m.payload = {1, 2, 3};
  CHECK(wire_bytes(m) == 26);
}

TEST_CASE("a corpus of 100 PINGs is a point mass") {
  simnet::SimEventLog log;
  wire::Message ping;
  for (int i = 0; i < 100; ++i) {
    simnet::EventRecord r;
    r.kind = simnet::EventKind::kSend;
    r.tick = i;
    r.from = AgentId{1};
    r.to = AgentId{2};
    r.wire_hex = wire::to_hex(wire::encode(ping));
    log.append(r);
  }
  const auto d = corpus_ingest(log);
  REQUIRE(d.support.size() == 1);
  CHECK(d.support[0].second == doctest::Approx(1.0));
  CHECK(entropy(d).h_total == 0);
  CHECK(corpus_ingest_jsonl(log.to_jsonl()).support.size() == 1);
}

TEST_CASE("an empty corpus is an error") {
  CHECK_THROWS_AS(corpus_ingest(simnet::SimEventLog{}), EmptyLog);
  CHECK_THROWS_AS(corpus_ingest_jsonl(""), EmptyLog);
}

TEST_CASE("distribution JSON round trip") {
  const auto d = load_distribution(fixture("consensus-mix"));
  const auto back = distribution_from_json(distribution_to_json(d));
  CHECK(normalized(back).support == normalized(d).support);
  CHECK(check_bound(back).encoder_bits == doctest::Approx(check_bound(d).encoder_bits));
}
