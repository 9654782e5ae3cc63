#include <random>

#include "doctest.h"
#include "muacp/generate.hpp"
#include "muacp/wire.hpp"

using namespace muacp;
using namespace muacp::wire;

namespace {

Message tell_with_ballot() {
  Message m;
  m.header.verb = Verb::kTell;
  m.add(OptionType::kBallot, Bytes{1, 2, 3, 4, 5, 6, 7, 8, 9});
  return m;
}

}  // namespace

TEST_CASE("empty PING encodes to the 11 bytes of the layout") {
  Message m;
  const Bytes want{0x10, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
  CHECK(encode(m) == want);
  CHECK(wire_size(m) == 11);
}

TEST_CASE("TELL with one 9-byte BALLOT option is 23 bytes") {
  const Message m = tell_with_ballot();
  const Bytes want = from_hex("14 00 0000 0000 0000 01 04 0009 010203040506070809 0000");
  CHECK(encode(m) == want);
  CHECK(wire_size(m) == 23);
  CHECK(encode(m).size() == 8 + 1 + (3 + 9) + 2);
}

TEST_CASE("header fields land in the documented bit positions") {
  Message m;
  m.header.verb = Verb::kObserve;
  m.header.qos = 2;
  m.header.flags = flag::kResponse | flag::kError;
  m.header.message_id = 0xABCD;
  m.header.sequence = 0x0102;
  m.header.correlation_id = 0xFFEE;
  m.payload = to_bytes("hi");
  // version 1 << 4 | OBSERVE 3 << 2 | qos 2 = 0x1E
  CHECK(to_hex(encode(m)) == "1e03abcd0102ffee000002" "6869");
}

TEST_CASE("verb codes are a bijection on 0..3") {
  for (int code = 0; code < 4; ++code) {
    Message m;
    m.header.verb = static_cast<Verb>(code);
    const auto b = encode(m);
    CHECK(((b[0] >> 2) & 3) == code);
    CHECK(decode(b).header.verb == static_cast<Verb>(code));
  }
  CHECK(verb_name(Verb::kPing) == "PING");
  CHECK(verb_from_name("ASK") == Verb::kAsk);
  CHECK_FALSE(verb_from_name("SHOUT").has_value());
}

TEST_CASE("payload growth is linear in size") {
  Message m = tell_with_ballot();
  const auto base = wire_size(m);
  m.payload.push_back(0x42);
  CHECK(wire_size(m) == base + 1);
}

TEST_CASE("encode rejects the documented limits") {
  SUBCASE("payload of 65536 bytes") {
    Message m;
    m.payload.assign(65536, 0);
    CHECK_THROWS_AS(encode(m), WireError);
    try {
      encode(m);
    } catch (const WireError& e) {
      CHECK(e.code() == Errc::kOversizedPayload);
    }
  }
  SUBCASE("payload of 65535 bytes is fine") {
    Message m;
    m.payload.assign(65535, 0);
    CHECK(encode(m).size() == 11 + 65535);
  }
  SUBCASE("options totalling 1025 bytes") {
    Message m;
    m.add(OptionType::kValue, Bytes(1019, 0));  // 1022 bytes
    m.add(OptionType::kCid, Bytes{});           // 1025
    try {
      encode(m);
      FAIL("expected OversizedOptions");
    } catch (const WireError& e) {
      CHECK(e.code() == Errc::kOversizedOptions);
    }
  }
  SUBCASE("exactly 1024 option bytes is fine") {
    Message m;
    m.add(OptionType::kValue, Bytes(1021, 0));
    CHECK(encode(m).size() == 11 + 1024);
  }
  SUBCASE("256 options") {
    Message m;
    for (int i = 0; i < 256; ++i) {
      m.add(OptionType::kCid, {});
    }
    // 256 * 3 = 768 bytes, within the size cap, but the count field is one byte.
    try {
      encode(m);
      FAIL("expected TooManyOptions");
    } catch (const WireError& e) {
      CHECK(e.code() == Errc::kTooManyOptions);
    }
  }
}

TEST_CASE("decode errors on malformed input") {
  auto code_of = [](const Bytes& b) {
    Errc e{};
    CHECK_FALSE(try_decode(b, &e).has_value());
    return e;
  };
  CHECK(code_of(Bytes(10, 0x10)) == Errc::kTruncated);
  CHECK(code_of(from_hex("1000000000000000 01")) == Errc::kTruncated);
  CHECK(code_of(from_hex("2000000000000000000000")) == Errc::kBadVersion);
  CHECK(code_of(from_hex("1000000000000000000000 00")) == Errc::kLengthMismatch);
  CHECK(code_of(from_hex("1000000000000000 00 0003 6162")) == Errc::kTruncated);
  CHECK_THROWS_AS(decode(Bytes(3, 0)), WireError);
}

TEST_CASE("duplicate option types keep their order") {
  Message m;
  m.add(OptionType::kCid, {0, 1});
  m.add(OptionType::kProc, {9});
  m.add(OptionType::kCid, {0, 2});
  const Message back = decode(encode(m));
  REQUIRE(back.options.size() == 3);
  CHECK(back.options[0].value == Bytes{0, 1});
  CHECK(back.options[2].value == Bytes{0, 2});
  CHECK(back.find_all(OptionType::kCid).size() == 2);
  CHECK(back.find(OptionType::kCid)->value == Bytes{0, 1});
}

TEST_CASE("validate flags exactly the violated clauses") {
  Message ok;
  CHECK(validate(ok).ok());

  SUBCASE("(i) header") {
    Message m;
    m.header.version = 2;
    const auto r = validate(m);
    CHECK(r.violated == std::vector<Clause>{Clause::kHeaderSize});
  }
  SUBCASE("(ii) verb") {
    Message m;
    m.header.verb = static_cast<Verb>(4);
    CHECK(validate(m).violated == std::vector<Clause>{Clause::kVerbCode});
  }
  SUBCASE("(iv) options over 1024 bytes") {
    Message m;
    m.add(OptionType::kValue, Bytes(600, 0));
    m.add(OptionType::kTopic, Bytes(600, 0));
    CHECK(validate(m).violated == std::vector<Clause>{Clause::kOptionTotal});
  }
  SUBCASE("(v) payload of 70000 bytes") {
    Message m;
    m.payload.assign(70000, 1);
    CHECK(validate(m).violated == std::vector<Clause>{Clause::kPayloadSize});
  }
  SUBCASE("(iii) declared option length disagrees with the bytes") {
    // Option declares 5 bytes but only 2 precede the payload-length field.
    const Bytes b = from_hex("1400000000000000 01 06 0005 0102 0000");
    const auto r = validate_wire(b);
    CHECK(r.has(Clause::kOptionLength));
    CHECK_FALSE(r.has(Clause::kOptionTotal));
    CHECK_FALSE(r.has(Clause::kPayloadSize));
  }
  SUBCASE("two clauses at once") {
    Message m;
    m.header.verb = static_cast<Verb>(7);
    m.payload.assign(70000, 1);
    const auto r = validate(m);
    CHECK(r.has(Clause::kVerbCode));
    CHECK(r.has(Clause::kPayloadSize));
    CHECK(r.violated.size() == 2);
  }
}

TEST_CASE("roundtrip over seeded random messages") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Message m = random_message(rng);
    const Bytes b = encode(m);
    CHECK(b.size() == wire_size(m));
    CHECK(decode(b) == m);
  }
}

TEST_CASE("mixes produce their fixed sizes") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    CHECK(wire_size(random_message(rng, Mix::kEmpty)) == 11);
    CHECK(wire_size(random_message(rng, Mix::kOneOption)) == 23);
  }
  CHECK(mix_from_name("one-option") == Mix::kOneOption);
  CHECK_FALSE(mix_from_name("everything").has_value());
}

TEST_CASE("random bytes decode without crashing and never yield ill-formed messages") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 5000; ++i) {
    Bytes b(rng() % 64);
    for (auto& x : b) {
      x = static_cast<std::uint8_t>(rng());
    }
    if (!b.empty() && (rng() & 1)) {
      b[0] = static_cast<std::uint8_t>(0x10 | (b[0] & 0x0F));  // keep the version plausible
    }
    if (auto m = try_decode(b)) {
      CHECK(validate(*m).ok());
      CHECK(encode(*m) == b);
    }
  }
}

TEST_CASE("hex helpers") {
  CHECK(from_hex("0A ff") == Bytes{0x0A, 0xFF});
  CHECK(to_hex(Bytes{0x0A, 0xFF}) == "0aff");
  CHECK_THROWS_AS(from_hex("abc"), Error);
  CHECK_THROWS_AS(from_hex("zz"), Error);
  CHECK(read_be16(Bytes{0x12, 0x34}) == 0x1234);
  CHECK_FALSE(read_be16(Bytes{0x12}).has_value());
  CHECK(be32(0x01020304) == Bytes{1, 2, 3, 4});
}

TEST_CASE("option registry") {
  CHECK(option_name(OptionType::kBallot) == "BALLOT");
  CHECK(option_from_name("CONTENT_TYPE") == OptionType::kContentType);
  CHECK(option_name(static_cast<OptionType>(0x7F)).empty());
  CHECK(kRegisteredOptionTypes.size() <= kMaxOptionTypes);
}
