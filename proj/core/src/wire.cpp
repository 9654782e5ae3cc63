#include "muacp/wire.hpp"

#include <algorithm>
#include <cctype>

namespace muacp::wire {

namespace {

constexpr std::array<std::string_view, 4> kVerbNames = {"PING", "TELL", "ASK", "OBSERVE"};

struct OptionEntry {
  OptionType type;
  std::string_view name;
};

constexpr std::array<OptionEntry, 9> kOptionNames = {{
    {OptionType::kCid, "CID"},
    {OptionType::kProc, "PROC"},
    {OptionType::kErr, "ERR"},
    {OptionType::kBallot, "BALLOT"},
    {OptionType::kValue, "VALUE"},
    {OptionType::kContentType, "CONTENT_TYPE"},
    {OptionType::kTopic, "TOPIC"},
    {OptionType::kDeadline, "DEADLINE"},
    {OptionType::kConv, "CONV"},
}};

// Where in the frame a parse failure happened.
enum class Region { kHeader, kOptions, kPayload, kTrailer };

struct ParseFailure {
  Errc code;
  Region region;
};

bool header_encodable(const Header& h) {
  return h.version == kVersion && h.qos <= 3;
}

bool verb_valid(Verb v) {
  return static_cast<std::uint8_t>(v) <= 3;
}

std::size_t option_bytes(const Message& m) {
  std::size_t total = 0;
  for (const auto& o : m.options) {
    total += kOptionOverheadBytes + o.value.size();
  }
  return total;
}

void check_encodable(const Message& m) {
  if (m.header.version != kVersion) {
    throw WireError(Errc::kBadVersion, "version " + std::to_string(m.header.version));
  }
  if (!header_encodable(m.header) || !verb_valid(m.header.verb)) {
    throw WireError(Errc::kBadHeader);
  }
  if (m.options.size() > kMaxOptions) {
    throw WireError(Errc::kTooManyOptions, std::to_string(m.options.size()) + " options");
  }
  const std::size_t opt = option_bytes(m);
  if (opt > kMaxOptionBytes) {
    throw WireError(Errc::kOversizedOptions, std::to_string(opt) + " option bytes");
  }
  if (m.payload.size() > kMaxPayloadBytes) {
    throw WireError(Errc::kOversizedPayload, std::to_string(m.payload.size()) + " payload bytes");
  }
}

std::uint16_t get16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

// Shared by decode() and validate_wire(). `out` may be null when only the verdict matters.
std::optional<ParseFailure> parse(std::span<const std::uint8_t> in, Message* out) {
  if (in.size() < kHeaderBytes) {
    return ParseFailure{Errc::kTruncated, Region::kHeader};
  }
  const std::uint8_t b0 = in[0];
  if ((b0 >> 4) != kVersion) {
    return ParseFailure{Errc::kBadVersion, Region::kHeader};
  }
  if (in.size() == kHeaderBytes) {
    return ParseFailure{Errc::kTruncated, Region::kOptions};
  }
  Header h;
  h.version = static_cast<std::uint8_t>(b0 >> 4);
  h.verb = static_cast<Verb>((b0 >> 2) & 0x3);
  h.qos = static_cast<std::uint8_t>(b0 & 0x3);
  h.flags = in[1];
  h.message_id = get16(in, 2);
  h.sequence = get16(in, 4);
  h.correlation_id = get16(in, 6);

  std::size_t pos = kHeaderBytes;
  const std::size_t count = in[pos++];
  std::size_t total = 0;
  std::vector<Option> options;
  if (out != nullptr) {
    options.reserve(count);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (in.size() - pos < kOptionOverheadBytes) {
      return ParseFailure{Errc::kTruncated, Region::kOptions};
    }
    const auto type = static_cast<OptionType>(in[pos]);
    const std::size_t len = get16(in, pos + 1);
    pos += kOptionOverheadBytes;
    total += kOptionOverheadBytes + len;
    // Checked before touching the value so allocation never exceeds the cap.
    if (total > kMaxOptionBytes) {
      return ParseFailure{Errc::kOversizedOptions, Region::kOptions};
    }
    if (in.size() - pos < len) {
      return ParseFailure{Errc::kTruncated, Region::kOptions};
    }
    if (out != nullptr) {
      options.push_back(Option{type, Bytes(in.begin() + static_cast<std::ptrdiff_t>(pos),
                                           in.begin() + static_cast<std::ptrdiff_t>(pos + len))});
    }
    pos += len;
  }
  if (in.size() - pos < 2) {
    return ParseFailure{Errc::kTruncated, Region::kPayload};
  }
  const std::size_t plen = get16(in, pos);
  pos += 2;
  if (in.size() - pos < plen) {
    return ParseFailure{Errc::kTruncated, Region::kPayload};
  }
  if (in.size() - pos > plen) {
    return ParseFailure{Errc::kLengthMismatch, Region::kTrailer};
  }
  if (out != nullptr) {
    out->header = h;
    out->options = std::move(options);
    out->payload.assign(in.begin() + static_cast<std::ptrdiff_t>(pos), in.end());
  }
  return std::nullopt;
}

}  // namespace

std::string_view verb_name(Verb v) {
  const auto i = static_cast<std::size_t>(v);
  return i < kVerbNames.size() ? kVerbNames[i] : std::string_view{"?"};
}

std::optional<Verb> verb_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kVerbNames.size(); ++i) {
    if (kVerbNames[i] == name) {
      return static_cast<Verb>(i);
    }
  }
  return std::nullopt;
}

std::string_view option_name(OptionType t) {
  for (const auto& e : kOptionNames) {
    if (e.type == t) {
      return e.name;
    }
  }
  return {};
}

std::optional<OptionType> option_from_name(std::string_view name) {
  for (const auto& e : kOptionNames) {
    if (e.name == name) {
      return e.type;
    }
  }
  return std::nullopt;
}

const Option* Message::find(OptionType t) const {
  for (const auto& o : options) {
    if (o.type == t) {
      return &o;
    }
  }
  return nullptr;
}

std::vector<const Option*> Message::find_all(OptionType t) const {
  std::vector<const Option*> found;
  for (const auto& o : options) {
    if (o.type == t) {
      found.push_back(&o);
    }
  }
  return found;
}

Message& Message::add(OptionType t, Bytes value) {
  options.push_back(Option{t, std::move(value)});
  return *this;
}

std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::kTruncated: return "Truncated";
    case Errc::kBadVersion: return "BadVersion";
    case Errc::kBadHeader: return "BadHeader";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kOversizedOptions: return "OversizedOptions";
    case Errc::kOversizedPayload: return "OversizedPayload";
    case Errc::kTooManyOptions: return "TooManyOptions";
  }
  return "Unknown";
}

WireError::WireError(Errc code, const std::string& detail)
    : Error(std::string(errc_name(code)) + (detail.empty() ? "" : ": " + detail)), code_(code) {}

std::string_view clause_name(Clause c) {
  switch (c) {
    case Clause::kHeaderSize: return "(i) header is 64 bits";
    case Clause::kVerbCode: return "(ii) verb in 2 bits";
    case Clause::kOptionLength: return "(iii) option consistent with declared length";
    case Clause::kOptionTotal: return "(iv) total option size <= 1024 bytes";
    case Clause::kPayloadSize: return "(v) payload <= 65535 bytes";
  }
  return "?";
}

bool ValidityReport::has(Clause c) const {
  return std::find(violated.begin(), violated.end(), c) != violated.end();
}

ValidityReport validate(const Message& m) {
  ValidityReport r;
  if (!header_encodable(m.header)) {
    r.violated.push_back(Clause::kHeaderSize);
  }
  if (!verb_valid(m.header.verb)) {
    r.violated.push_back(Clause::kVerbCode);
  }
  // A value longer than the largest legal option cannot carry a consistent declared length.
  const bool inconsistent = std::any_of(m.options.begin(), m.options.end(), [](const Option& o) {
    return o.value.size() > kMaxOptionValueBytes;
  });
  if (inconsistent) {
    r.violated.push_back(Clause::kOptionLength);
  }
  if (option_bytes(m) > kMaxOptionBytes || m.options.size() > kMaxOptions) {
    r.violated.push_back(Clause::kOptionTotal);
  }
  if (m.payload.size() > kMaxPayloadBytes) {
    r.violated.push_back(Clause::kPayloadSize);
  }
  return r;
}

ValidityReport validate_wire(std::span<const std::uint8_t> bytes) {
  ValidityReport r;
  const auto failure = parse(bytes, nullptr);
  if (!failure) {
    return r;
  }
  switch (failure->code) {
    case Errc::kTruncated:
      if (failure->region == Region::kHeader) {
        r.violated.push_back(Clause::kHeaderSize);
      } else if (failure->region == Region::kOptions) {
        r.violated.push_back(Clause::kOptionLength);
      } else {
        r.framing = failure->code;
      }
      break;
    case Errc::kBadVersion:
      r.violated.push_back(Clause::kHeaderSize);
      break;
    case Errc::kOversizedOptions:
      r.violated.push_back(Clause::kOptionTotal);
      break;
    default:
      r.framing = failure->code;
      break;
  }
  return r;
}

std::size_t wire_size(const Message& m) {
  check_encodable(m);
  return kHeaderBytes + 1 + option_bytes(m) + 2 + m.payload.size();
}

void encode_into(const Message& m, Bytes& out) {
  out.clear();
  out.reserve(wire_size(m));
  const Header& h = m.header;
  out.push_back(static_cast<std::uint8_t>((h.version << 4) | (static_cast<std::uint8_t>(h.verb) << 2) | h.qos));
  out.push_back(h.flags);
  put16(out, h.message_id);
  put16(out, h.sequence);
  put16(out, h.correlation_id);
  out.push_back(static_cast<std::uint8_t>(m.options.size()));
  for (const auto& o : m.options) {
    out.push_back(static_cast<std::uint8_t>(o.type));
    put16(out, static_cast<std::uint16_t>(o.value.size()));
    out.insert(out.end(), o.value.begin(), o.value.end());
  }
  put16(out, static_cast<std::uint16_t>(m.payload.size()));
  out.insert(out.end(), m.payload.begin(), m.payload.end());
}

Bytes encode(const Message& m) {
  Bytes out;
  encode_into(m, out);
  return out;
}

Message decode(std::span<const std::uint8_t> bytes) {
  Message m;
  if (const auto failure = parse(bytes, &m)) {
    throw WireError(failure->code);
  }
  return m;
}

std::optional<Message> try_decode(std::span<const std::uint8_t> bytes, Errc* error) {
  Message m;
  if (const auto failure = parse(bytes, &m)) {
    if (error != nullptr) {
      *error = failure->code;
    }
    return std::nullopt;
  }
  return m;
}

Bytes be16(std::uint16_t v) {
  return {static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

Bytes be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
          static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

std::optional<std::uint16_t> read_be16(std::span<const std::uint8_t> b) {
  if (b.size() != 2) {
    return std::nullopt;
  }
  return get16(b, 0);
}

std::optional<std::uint32_t> read_be32(std::span<const std::uint8_t> b) {
  if (b.size() != 4) {
    return std::nullopt;
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xF]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  int hi = -1;
  for (char c : hex) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      continue;
    }
    const int n = nibble(c);
    if (n < 0) {
      throw Error("bad hex digit '" + std::string(1, c) + "'");
    }
    if (hi < 0) {
      hi = n;
    } else {
      out.push_back(static_cast<std::uint8_t>((hi << 4) | n));
      hi = -1;
    }
  }
  if (hi >= 0) {
    throw Error("odd number of hex digits");
  }
  return out;
}

Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

std::string to_string(std::span<const std::uint8_t> b) {
  return std::string(b.begin(), b.end());
}

}  // namespace muacp::wire
