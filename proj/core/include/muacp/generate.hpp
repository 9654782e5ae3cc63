#pragma once

// Seeded generators of well-formed messages, shared by the benchmark command and the tests.

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "muacp/wire.hpp"

namespace muacp::wire {

enum class Mix : std::uint8_t {
  /// No options, empty payload: always 11 bytes.
  kEmpty,
  /// Exactly one option with a 9-byte value, empty payload: always 23 bytes.
  kOneOption,
  /// Arbitrary well-formed shapes, including the size limits now and then.
  kRandom,
};

std::optional<Mix> mix_from_name(std::string_view name);
std::string_view mix_name(Mix m);

Message random_message(std::mt19937_64& rng, Mix mix = Mix::kRandom);

}  // namespace muacp::wire
