#include "muacp/generate.hpp"

#include <algorithm>

namespace muacp::wire {

std::optional<Mix> mix_from_name(std::string_view name) {
  if (name == "empty") return Mix::kEmpty;
  if (name == "one-option") return Mix::kOneOption;
  if (name == "random") return Mix::kRandom;
  return std::nullopt;
}

std::string_view mix_name(Mix m) {
  switch (m) {
    case Mix::kEmpty: return "empty";
    case Mix::kOneOption: return "one-option";
    case Mix::kRandom: return "random";
  }
  return "random";
}

namespace {

template <class T>
T uniform(std::mt19937_64& rng, T lo, T hi) {
  return std::uniform_int_distribution<T>(lo, hi)(rng);
}

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) {
    x = static_cast<std::uint8_t>(rng());
  }
  return b;
}

}  // namespace

Message random_message(std::mt19937_64& rng, Mix mix) {
  Message m;
  m.header.verb = static_cast<Verb>(uniform<int>(rng, 0, 3));
  m.header.message_id = uniform<std::uint16_t>(rng, 0, 0xFFFF);
  m.header.sequence = uniform<std::uint16_t>(rng, 0, 0xFFFF);
  m.header.correlation_id = uniform<std::uint16_t>(rng, 0, 0xFFFF);
  if (mix == Mix::kEmpty) {
    return m;
  }
  if (mix == Mix::kOneOption) {
    const auto t = kRegisteredOptionTypes[uniform<std::size_t>(rng, 0, kRegisteredOptionTypes.size() - 1)];
    m.add(t, random_bytes(rng, 9));
    return m;
  }

  m.header.qos = static_cast<std::uint8_t>(uniform<int>(rng, 0, 3));
  m.header.flags = static_cast<std::uint8_t>(uniform<int>(rng, 0, 0xFF));
  const int shape = uniform<int>(rng, 0, 99);
  std::size_t budget = kMaxOptionBytes;
  std::size_t count = uniform<std::size_t>(rng, 0, 8);
  if (shape < 3) {
    count = uniform<std::size_t>(rng, 100, kMaxOptions);  // many empty-ish options
  }
  for (std::size_t i = 0; i < count && budget >= kOptionOverheadBytes; ++i) {
    std::size_t cap = std::min<std::size_t>(budget - kOptionOverheadBytes, shape < 3 ? 1 : 64);
    if (shape >= 3 && shape < 6 && i == 0) {
      cap = budget - kOptionOverheadBytes;  // one option filling the whole allowance
    }
    const std::size_t len = uniform<std::size_t>(rng, 0, cap);
    // Mostly registered codes, sometimes an unregistered one.
    const auto type = uniform<int>(rng, 0, 9) == 0
                          ? static_cast<OptionType>(uniform<int>(rng, 0, 0xFF))
                          : kRegisteredOptionTypes[uniform<std::size_t>(rng, 0, kRegisteredOptionTypes.size() - 1)];
    m.add(type, random_bytes(rng, len));
    budget -= kOptionOverheadBytes + len;
  }
  std::size_t payload = uniform<std::size_t>(rng, 0, 64);
  if (shape >= 95) {
    payload = uniform<std::size_t>(rng, 0, kMaxPayloadBytes);
  }
  m.payload = random_bytes(rng, payload);
  return m;
}

}  // namespace muacp::wire
