#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace muacp {

using Bytes = std::vector<std::uint8_t>;

/// Simulation time. One tick is labelled as 1 ms in reports unless MUACP_TICK_MS says otherwise.
using Tick = std::int64_t;

/// Identifier of an agent within one RCAC space.
struct AgentId {
  std::uint32_t value = 0;

  constexpr AgentId() = default;
  constexpr explicit AgentId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(AgentId, AgentId) = default;
};

/// Base of every exception thrown by the library. `what()` names the error kind first.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace muacp

template <>
struct std::hash<muacp::AgentId> {
  std::size_t operator()(muacp::AgentId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
