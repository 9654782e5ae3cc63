#include "muacp/resources.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace muacp::resources {

ResourceVector& ResourceVector::operator+=(const ResourceVector& o) {
  memory += o.memory;
  bandwidth += o.bandwidth;
  cpu += o.cpu;
  energy += o.energy;
  return *this;
}

ResourceVector& ResourceVector::operator-=(const ResourceVector& o) {
  memory -= o.memory;
  bandwidth -= o.bandwidth;
  cpu -= o.cpu;
  energy -= o.energy;
  return *this;
}

ResourceVector operator*(Amount k, ResourceVector v) {
  v.memory *= k;
  v.bandwidth *= k;
  v.cpu *= k;
  v.energy *= k;
  return v;
}

bool ResourceVector::fits_within(const ResourceVector& o) const {
  return memory <= o.memory && bandwidth <= o.bandwidth && cpu <= o.cpu && energy <= o.energy;
}

bool ResourceVector::non_negative() const {
  return memory >= 0 && bandwidth >= 0 && cpu >= 0 && energy >= 0;
}

std::string to_string(const ResourceVector& v) {
  return "(" + std::to_string(v.memory) + ", " + std::to_string(v.bandwidth) + ", " + std::to_string(v.cpu) + ", " +
         std::to_string(v.energy) + ")";
}

InfeasibleCharge::InfeasibleCharge(const ResourceVector& remaining, const ResourceVector& cost)
    : Error("InfeasibleCharge: cost " + to_string(cost) + " exceeds remaining " + to_string(remaining)) {}

ResourceBudget::ResourceBudget(const ResourceVector& limit) : limit_(limit), remaining_(limit) {
  if (!limit.non_negative()) {
    throw Error("resource limit must be non-negative: " + to_string(limit));
  }
}

bool ResourceBudget::feasible(const ResourceVector& cost) const {
  return cost.non_negative() && cost.fits_within(remaining_);
}

void ResourceBudget::charge(const ResourceVector& cost) {
  if (!feasible(cost)) {
    throw InfeasibleCharge(remaining_, cost);
  }
  remaining_ -= cost;
}

void ResourceBudget::refund_memory(Amount amount) {
  remaining_.memory = std::min(limit_.memory, remaining_.memory + std::max<Amount>(amount, 0));
}

bool feasible(const ResourceBudget& budget, const ResourceVector& cost) {
  return budget.feasible(cost);
}

ResourceBudget charge(ResourceBudget budget, const ResourceVector& cost) {
  budget.charge(cost);
  return budget;
}

CostModel CostModel::zero() {
  return CostModel{0, 0, 0, 0, 0, 0};
}

bool CostModel::valid() const {
  for (double c : {per_byte_bandwidth, per_byte_cpu, per_message_cpu, per_byte_energy, per_message_energy,
                   buffer_memory}) {
    if (!(c >= 0) || !std::isfinite(c)) {
      return false;
    }
  }
  return true;
}

namespace {

Amount affine(double base, double per_byte, std::size_t bytes) {
  // Ceiling keeps the cost monotone in size and never under-charges.
  return static_cast<Amount>(std::ceil(base + per_byte * static_cast<double>(bytes)));
}

}  // namespace

ResourceVector consumption(const CostModel& model, std::size_t wire_bytes) {
  return ResourceVector{
      affine(0, model.buffer_memory, wire_bytes),
      affine(0, model.per_byte_bandwidth, wire_bytes),
      affine(model.per_message_cpu, model.per_byte_cpu, wire_bytes),
      affine(model.per_message_energy, model.per_byte_energy, wire_bytes),
  };
}

ResourceVector consumption(const CostModel& model, const wire::Message& m) {
  return consumption(model, wire::wire_size(m));
}

bool CumulativeReport::ok() const {
  return bandwidth.holds() && memory.holds() && cpu.holds() && energy.holds() && rate.holds();
}

CumulativeReport cumulative_bound_check(const std::vector<UsageSample>& trace, const ResourceBudget& budget,
                                        Tick horizon, std::uint32_t rate_cap) {
  const double window = static_cast<double>(std::max<Tick>(horizon, 0) + 1);
  const ResourceVector& lim = budget.limit();

  ResourceVector total;
  Amount peak_memory = 0;
  std::map<Tick, std::uint32_t> per_tick;
  for (const auto& s : trace) {
    total += s.cost;
    peak_memory = std::max(peak_memory, s.memory_in_use);
    if (s.is_send) {
      ++per_tick[s.tick];
    }
  }
  std::uint32_t peak_rate = 0;
  for (const auto& [tick, count] : per_tick) {
    peak_rate = std::max(peak_rate, count);
  }

  CumulativeReport r;
  r.bandwidth = {"bandwidth", static_cast<double>(total.bandwidth), static_cast<double>(lim.bandwidth) * window};
  r.memory = {"memory", static_cast<double>(peak_memory), static_cast<double>(lim.memory)};
  r.cpu = {"cpu", static_cast<double>(total.cpu), static_cast<double>(lim.cpu) * window};
  r.energy = {"energy", static_cast<double>(total.energy), static_cast<double>(lim.energy) * window};
  r.rate = {"rate", static_cast<double>(peak_rate),
            rate_cap == 0 ? static_cast<double>(peak_rate) : static_cast<double>(rate_cap)};
  return r;
}

}  // namespace muacp::resources
