#pragma once

// Bit-exact codec for the four-verb message format.
//
// Layout (all multi-byte fields big-endian):
//
//   byte 0      version:4 | verb:2 | qos:2
//   byte 1      flags
//   bytes 2-3   message_id
//   bytes 4-5   sequence
//   bytes 6-7   correlation_id
//   byte 8      option count
//   options     (type:8, length:16, value:length bytes)*
//   2 bytes     payload length
//   payload
//
// The smallest message (no options, empty payload) is 11 bytes.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "muacp/types.hpp"

namespace muacp::wire {

enum class Verb : std::uint8_t {
  kPing = 0,
  kTell = 1,
  kAsk = 2,
  kObserve = 3,
};

std::string_view verb_name(Verb v);
std::optional<Verb> verb_from_name(std::string_view name);

/// 0 = at-most-once, 1 = at-least-once (retransmit until acknowledged). 2 and 3 are reserved.
enum class QoS : std::uint8_t {
  kAtMostOnce = 0,
  kAtLeastOnce = 1,
  kReserved2 = 2,
  kReserved3 = 3,
};

namespace flag {
inline constexpr std::uint8_t kResponse = 0x01;
inline constexpr std::uint8_t kError = 0x02;
}  // namespace flag

enum class OptionType : std::uint8_t {
  kCid = 0x01,
  kProc = 0x02,
  kErr = 0x03,
  kBallot = 0x04,
  kValue = 0x05,
  kContentType = 0x06,
  kTopic = 0x07,
  kDeadline = 0x08,
  kConv = 0x09,
};

/// Values of the CONTENT_TYPE option.
namespace content_type {
inline constexpr std::uint8_t kLiteral = 0x01;
inline constexpr std::uint8_t kAction = 0x02;
inline constexpr std::uint8_t kTopic = 0x03;
}  // namespace content_type

/// Registered option types, in code order.
inline constexpr std::array<OptionType, 9> kRegisteredOptionTypes = {
    OptionType::kCid,         OptionType::kProc,  OptionType::kErr,
    OptionType::kBallot,      OptionType::kValue, OptionType::kContentType,
    OptionType::kTopic,       OptionType::kDeadline, OptionType::kConv,
};

/// Upper bound on distinct registered option types (k_max).
inline constexpr std::size_t kMaxOptionTypes = 16;
static_assert(kRegisteredOptionTypes.size() <= kMaxOptionTypes);

/// Registry name for a code, or empty for unregistered codes.
std::string_view option_name(OptionType t);
std::optional<OptionType> option_from_name(std::string_view name);

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 8;
inline constexpr std::size_t kMinMessageBytes = kHeaderBytes + 1 + 2;
inline constexpr std::size_t kOptionOverheadBytes = 3;
inline constexpr std::size_t kMaxOptionBytes = 1024;
inline constexpr std::size_t kMaxOptionValueBytes = kMaxOptionBytes - kOptionOverheadBytes;
inline constexpr std::size_t kMaxPayloadBytes = 0xFFFF;
inline constexpr std::size_t kMaxOptions = 0xFF;

struct Header {
  std::uint8_t version = kVersion;
  Verb verb = Verb::kPing;
  std::uint8_t qos = 0;
  std::uint8_t flags = 0;
  std::uint16_t message_id = 0;
  std::uint16_t sequence = 0;
  std::uint16_t correlation_id = 0;

  bool has_flag(std::uint8_t f) const { return (flags & f) != 0; }

  friend bool operator==(const Header&, const Header&) = default;
};

struct Option {
  OptionType type = OptionType::kCid;
  Bytes value;

  friend bool operator==(const Option&, const Option&) = default;
};

struct Message {
  Header header;
  std::vector<Option> options;
  Bytes payload;

  Verb verb() const { return header.verb; }

  /// First option of the given type, or nullptr.
  const Option* find(OptionType t) const;
  std::vector<const Option*> find_all(OptionType t) const;
  Message& add(OptionType t, Bytes value);

  friend bool operator==(const Message&, const Message&) = default;
};

enum class Errc {
  kTruncated,
  kBadVersion,
  kBadHeader,
  kLengthMismatch,
  kOversizedOptions,
  kOversizedPayload,
  kTooManyOptions,
};

std::string_view errc_name(Errc e);

class WireError : public Error {
 public:
  explicit WireError(Errc code, const std::string& detail = {});
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Clauses of the well-formedness definition.
enum class Clause : std::uint8_t {
  kHeaderSize = 1,    // (i) header fits the 64-bit layout at version 1
  kVerbCode = 2,      // (ii) verb is one of the four 2-bit codes
  kOptionLength = 3,  // (iii) each option is consistent with its declared length
  kOptionTotal = 4,   // (iv) total option size <= 1024 bytes
  kPayloadSize = 5,   // (v) payload <= 2^16 - 1 bytes
};

std::string_view clause_name(Clause c);

struct ValidityReport {
  std::vector<Clause> violated;
  /// Set by validate_wire() for framing failures that belong to no clause (trailing bytes etc.).
  std::optional<Errc> framing;

  bool ok() const { return violated.empty() && !framing; }
  bool has(Clause c) const;
};

/// Reports every violated clause; empty iff `m` is well-formed.
ValidityReport validate(const Message& m);

/// Same check against raw bytes, without requiring a successful decode.
ValidityReport validate_wire(std::span<const std::uint8_t> bytes);

/// Exact encoded length; throws WireError for the same inputs encode() rejects.
std::size_t wire_size(const Message& m);

Bytes encode(const Message& m);
/// Encodes into `out` (cleared first), reusing its capacity.
void encode_into(const Message& m, Bytes& out);

/// Never reads past `bytes`; allocation is bounded by the clause limits.
Message decode(std::span<const std::uint8_t> bytes);

/// Non-throwing decode.
std::optional<Message> try_decode(std::span<const std::uint8_t> bytes, Errc* error = nullptr);

// Big-endian helpers shared by option payload layouts.
Bytes be16(std::uint16_t v);
Bytes be32(std::uint32_t v);
std::optional<std::uint16_t> read_be16(std::span<const std::uint8_t> b);
std::optional<std::uint32_t> read_be32(std::span<const std::uint8_t> b);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Accepts upper/lower case; whitespace is ignored. Throws Error on odd length or bad digits.
Bytes from_hex(std::string_view hex);

Bytes to_bytes(std::string_view s);
std::string to_string(std::span<const std::uint8_t> b);

}  // namespace muacp::wire
