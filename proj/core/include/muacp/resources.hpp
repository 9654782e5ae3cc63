#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "muacp/types.hpp"
#include "muacp/wire.hpp"

namespace muacp::resources {

/// Integer amount of one resource: bytes for memory and bandwidth, abstract units for CPU and energy.
using Amount = std::int64_t;

struct ResourceVector {
  Amount memory = 0;
  Amount bandwidth = 0;
  Amount cpu = 0;
  Amount energy = 0;

  ResourceVector& operator+=(const ResourceVector& o);
  ResourceVector& operator-=(const ResourceVector& o);
  friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }
  friend ResourceVector operator-(ResourceVector a, const ResourceVector& b) { return a -= b; }
  friend ResourceVector operator*(Amount k, ResourceVector v);

  /// Component-wise <=. Not a total order, so no operator<.
  bool fits_within(const ResourceVector& o) const;
  bool non_negative() const;

  friend bool operator==(const ResourceVector&, const ResourceVector&) = default;
};

std::string to_string(const ResourceVector& v);

class InfeasibleCharge : public Error {
 public:
  InfeasibleCharge(const ResourceVector& remaining, const ResourceVector& cost);
};

/// The (M, B, C, E) budget of one agent together with what is left of it.
class ResourceBudget {
 public:
  ResourceBudget() = default;
  explicit ResourceBudget(const ResourceVector& limit);

  const ResourceVector& limit() const { return limit_; }
  const ResourceVector& remaining() const { return remaining_; }
  ResourceVector used() const { return limit_ - remaining_; }

  bool feasible(const ResourceVector& cost) const;

  /// Subtracts `cost`. Throws InfeasibleCharge and leaves the budget untouched when it does not fit.
  void charge(const ResourceVector& cost);

  /// Returns `amount` of memory previously charged (buffers are freed on dequeue).
  void refund_memory(Amount amount);

 private:
  ResourceVector limit_;
  ResourceVector remaining_;
};

bool feasible(const ResourceBudget& budget, const ResourceVector& cost);

/// Value-returning form of ResourceBudget::charge.
ResourceBudget charge(ResourceBudget budget, const ResourceVector& cost);

/// Affine per-message cost: each component is `per_message + per_byte * wire_size`, rounded up.
struct CostModel {
  double per_byte_bandwidth = 1.0;
  double per_byte_cpu = 0.0;
  double per_message_cpu = 0.0;
  double per_byte_energy = 0.0;
  double per_message_energy = 0.0;
  /// Buffer bytes held per wire byte while a message is queued.
  double buffer_memory = 0.0;

  static CostModel zero();
  bool valid() const;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

/// Cost of a message of `wire_bytes` bytes.
ResourceVector consumption(const CostModel& model, std::size_t wire_bytes);
ResourceVector consumption(const CostModel& model, const wire::Message& m);

CostModel cost_model_from_json(std::string_view text);
CostModel load_cost_model(const std::filesystem::path& path);
std::string cost_model_to_json(const CostModel& model);

struct UsageSample {
  Tick tick = 0;
  /// Cumulative-type consumption of this action (bandwidth, cpu, energy); memory is ignored here.
  ResourceVector cost;
  /// Buffer memory held right after the action.
  Amount memory_in_use = 0;
  /// Only sends count against the rate cap.
  bool is_send = true;
};

struct BoundCheck {
  std::string name;
  double observed = 0;
  double bound = 0;
  bool holds() const { return observed <= bound; }
  double slack() const { return bound - observed; }
};

struct CumulativeReport {
  BoundCheck bandwidth;
  BoundCheck memory;
  BoundCheck cpu;
  BoundCheck energy;
  BoundCheck rate;
  bool ok() const;
};

/// Checks Bandwidth(T) <= B*T, Memory(T) <= M, CPU(T) <= C*T, Energy(T) <= E*T and the message
/// rate cap over the window [0, horizon]. The budget's limit supplies M as a level and B, C, E as
/// per-tick rates; T = horizon + 1 ticks. `rate_cap` of 0 disables the rate check.
CumulativeReport cumulative_bound_check(const std::vector<UsageSample>& trace, const ResourceBudget& budget,
                                        Tick horizon, std::uint32_t rate_cap);

}  // namespace muacp::resources
