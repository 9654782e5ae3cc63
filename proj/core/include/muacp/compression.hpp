#pragma once

// Entropy of message sources and the additive compression bound.
//
// A message is abstracted to three components: its verb V, its option profile O (the ordered
// option types with their value lengths) and its payload symbol P (the exact payload bytes).
// The theoretical encoder spends
//
//   h_hdr + L(V) + ceil(log2 k_max) + L(O | V) + L(P | V, O)
//
// bits, where each L is the expected length of a Huffman code built for that component
// (conditioned on the earlier components). Since every Huffman code satisfies H <= L < H + 1,
// its expected length stays below H(D) + h_hdr + ceil(log2 k_max) + 3.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "muacp/simnet.hpp"
#include "muacp/types.hpp"
#include "muacp/wire.hpp"

namespace muacp::compression {

class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

class EmptyLog : public Error {
 public:
  using Error::Error;
};

struct OptionShape {
  std::uint8_t type = 0;
  std::uint16_t length = 0;

  friend auto operator<=>(const OptionShape&, const OptionShape&) = default;
};

using OptionProfile = std::vector<OptionShape>;

struct AbstractMessage {
  wire::Verb verb = wire::Verb::kPing;
  OptionProfile options;
  Bytes payload;

  friend auto operator<=>(const AbstractMessage&, const AbstractMessage&) = default;
};

/// Bytes on the wire for a message of this shape.
std::size_t wire_bytes(const AbstractMessage& m);

struct MessageDistribution {
  std::string name;
  std::vector<std::pair<AbstractMessage, double>> support;

  /// Throws InvalidDistribution unless probabilities are non-negative, sum to 1 within 1e-9,
  /// the support is non-empty and at most kMaxSupport entries, and every shape is encodable.
  void validate() const;
};

inline constexpr std::size_t kMaxSupport = 100000;
inline constexpr double kProbabilityTolerance = 1e-9;

/// Identical messages merged, support sorted.
MessageDistribution normalized(const MessageDistribution& d);

struct EntropyReport {
  double h_v = 0;
  double h_o_given_v = 0;
  double h_p_given_vo = 0;
  /// Joint entropy computed directly over the support.
  double h_total = 0;
};

/// -sum p log2 p over the non-zero entries.
double shannon(const std::vector<double>& probabilities);

/// Throws InvalidDistribution for invalid input, and Error if the chain rule fails to hold.
EntropyReport entropy(const MessageDistribution& d);

struct HuffmanCode {
  /// Codeword per input symbol, as '0'/'1' characters; a lone symbol gets the empty word.
  std::vector<std::string> codewords;
  double expected_length = 0;
  double entropy = 0;
  double kraft_sum = 0;

  bool kraft_ok() const { return kraft_sum <= 1.0 + 1e-12; }
  /// H <= L < H + 1, with `tol` slack on both sides for rounding.
  bool within_one_bit(double tol = 1e-9) const;
};

/// Optimal prefix code for the given weights (normalized internally; zero weights allowed).
/// Deterministic: ties are broken by symbol index.
HuffmanCode huffman_code(const std::vector<double>& weights);

struct BoundParameters {
  std::uint32_t h_hdr = 88;
  std::uint32_t k_max = static_cast<std::uint32_t>(wire::kMaxOptionTypes);
  std::uint32_t slack_constant = 3;

  std::uint32_t index_bits() const;
};

struct BoundReport {
  std::string name;
  std::size_t support = 0;
  EntropyReport entropy;
  /// Expected Huffman lengths of each component (conditional ones averaged over the condition).
  double l_v = 0;
  double l_o_given_v = 0;
  double l_p_given_vo = 0;
  std::uint32_t h_hdr = 0;
  std::uint32_t index_bits = 0;
  std::uint32_t slack_constant = 0;
  double encoder_bits = 0;
  double bound_bits = 0;
  /// Every Huffman table built satisfied Kraft and H <= L < H + 1.
  bool tables_ok = true;
  std::size_t tables_built = 0;
  /// Expected size of the byte-aligned wire codec, in bits.
  double wire_bits = 0;
  /// wire_bits - encoder_bits (negative when the fixed 2-bit verb beats the index-plus-Huffman form).
  double alignment_slack_bits = 0;
  /// Mean option count and the bound charging one index per option.
  double expected_options = 0;
  double refined_bound_bits = 0;
  /// Verb cost in the wire codec (fixed 2 bits inside the header) next to H(V).
  double wire_verb_bits = 2;

  bool holds(double tol = 1e-6) const { return encoder_bits <= bound_bits + tol && tables_ok; }
};

BoundReport check_bound(const MessageDistribution& d, const BoundParameters& params = {});

/// Empirical distribution of the send records of a log (records must carry wire bytes).
MessageDistribution corpus_ingest(const simnet::SimEventLog& log);
/// Same from a JSON-lines log file as written by SimEventLog::write_jsonl.
MessageDistribution corpus_ingest_jsonl(std::string_view jsonl);

/// Seeded random distribution with up to `support` entries.
MessageDistribution random_distribution(std::uint64_t seed, std::size_t support);

MessageDistribution distribution_from_json(std::string_view text);
MessageDistribution load_distribution(const std::filesystem::path& path);
std::string distribution_to_json(const MessageDistribution& d);
std::string bound_report_to_json(const BoundReport& r);

}  // namespace muacp::compression
