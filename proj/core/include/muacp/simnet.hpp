#pragma once

// Deterministic discrete-event network over integer ticks.
//
// One tick runs, in order: scheduled crashes and recoveries, every delivery due at that tick in
// insertion order, then on_tick() of each live process in id order. Sends made while handling
// tick t are delivered at t + 1 at the earliest.
//
// The network owns resource accounting: a send charges the sender, queueing reserves buffer
// memory at the receiver, and delivery releases that memory and charges the receive cost.
// Actions that do not fit a budget are refused and logged as drops.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "muacp/agent.hpp"
#include "muacp/resources.hpp"
#include "muacp/types.hpp"
#include "muacp/wire.hpp"

namespace muacp::simnet {

struct CrashEvent {
  AgentId agent;
  Tick at = 0;
  /// Crash-recovery when set; crash-stop otherwise.
  std::optional<Tick> recover_at;
};

/// Channel direction from -> to loses everything sent during [from_tick, to_tick].
struct Omission {
  AgentId from;
  AgentId to;
  Tick from_tick = 0;
  Tick to_tick = 0;
};

struct SimConfig {
  Tick gst = 0;
  Tick delta = 5;
  double drop_rate = 0.0;
  double dup_rate = 0.0;
  /// Pre-GST delay drawn uniformly from [delay_min, delay_max].
  Tick delay_min = 1;
  Tick delay_max = 1;
  std::uint64_t seed = 1;
  /// Sends per agent per tick; 0 means unlimited.
  std::uint32_t rate_cap = 0;
  std::vector<CrashEvent> fault_schedule;
  std::vector<Omission> omissions;
  /// Consecutive drops of one message id on one channel before delivery is forced.
  std::uint32_t max_consecutive_drops = 20;
  /// Charged per send and per delivery.
  resources::CostModel cost_model;
  /// Keep the hex wire image in every log record.
  bool log_wire = true;
  /// Record per-agent UsageSample traces for cumulative bound checks.
  bool record_usage = false;

  /// Throws Error on out-of-range values.
  void validate() const;
};

SimConfig sim_config_from_json(std::string_view text);
SimConfig load_sim_config(const std::filesystem::path& path);

enum class EventKind : std::uint8_t { kSend, kDeliver, kDrop, kDup, kCrash, kRecover, kTimer };

std::string_view event_kind_name(EventKind k);

struct EventRecord {
  Tick tick = 0;
  EventKind kind = EventKind::kSend;
  AgentId from{0};
  AgentId to{0};
  /// Shared by the send record and every copy, drop and delivery it produced.
  std::uint64_t send_id = 0;
  std::uint16_t message_id = 0;
  /// Tick of the originating send (deliveries and queued drops).
  Tick sent_at = 0;
  /// Drop reason, timer name or similar.
  std::string detail;
  /// True for a drop of a copy that had already been queued.
  bool queued = false;
  std::string wire_hex;
};

class SimEventLog {
 public:
  void append(EventRecord r);
  const std::vector<EventRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::string to_jsonl() const;
  void write_jsonl(const std::filesystem::path& path) const;

 private:
  std::vector<EventRecord> records_;
};

enum class SendStatus : std::uint8_t {
  kQueued,
  /// Sent but lost on the channel; from the sender's view indistinguishable from kQueued.
  kLost,
  kRateCapExceeded,
  kSenderCrashed,
  kInfeasible,
  kMalformed,
};

/// True when the send action happened (whatever the channel then did with it).
inline bool was_sent(SendStatus s) {
  return s == SendStatus::kQueued || s == SendStatus::kLost;
}

class Network;

/// What a process sees of the network while it is being invoked.
class Context {
 public:
  Context(Network& net, AgentId self) : net_(net), self_(self) {}

  AgentId self() const { return self_; }
  Tick now() const;
  SendStatus send(AgentId to, const wire::Message& m);
  void note_timer(std::string detail);
  const std::vector<AgentId>& agents() const;
  /// Per-process generator, seeded from the run seed and the process id.
  std::mt19937_64& rng();

 private:
  Network& net_;
  AgentId self_;
};

class Process {
 public:
  virtual ~Process() = default;
  virtual void on_start(Context&) {}
  virtual void on_deliver(Context& ctx, const agent::TransitionLabel& label) = 0;
  virtual void on_tick(Context&) {}
  /// Called after a crash-recovery restart.
  virtual void on_recover(Context&) {}
  virtual resources::ResourceBudget& budget() = 0;
};

/// Hosts an Agent: the network charges, the agent supplies semantics and timers.
class AgentProcess : public Process {
 public:
  AgentProcess(AgentId id, resources::ResourceBudget budget, agent::AgentConfig config = {});

  void on_deliver(Context& ctx, const agent::TransitionLabel& label) override;
  void on_tick(Context& ctx) override;
  resources::ResourceBudget& budget() override { return agent_.budget(); }

  /// Sends through the network and records the action in the agent's state.
  SendStatus send(Context& ctx, AgentId to, const wire::Message& m);

  agent::Agent& agent() { return agent_; }
  const agent::Agent& agent() const { return agent_; }
  const std::vector<wire::Message>& notices() const { return notices_; }

 protected:
  /// Hook for PROC-tagged deliveries; default does nothing.
  virtual void on_procedural(Context&, const agent::TransitionLabel&) {}

 private:
  agent::Agent agent_;
  std::vector<wire::Message> notices_;
};

class Network {
 public:
  explicit Network(SimConfig config);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  const SimConfig& config() const { return config_; }

  void add(AgentId id, std::unique_ptr<Process> process);
  Process& process(AgentId id);
  template <class P>
  P& get(AgentId id) {
    return dynamic_cast<P&>(process(id));
  }
  const std::vector<AgentId>& agents() const { return ids_; }

  Tick now() const { return now_; }
  bool crashed(AgentId id) const { return crashed_.count(id) != 0; }

  /// Runs ticks now()..until inclusive.
  void run(Tick until);
  /// Runs until nothing is in flight, at most `max_ticks` further ticks. Returns true when quiescent.
  bool run_until_quiescent(Tick max_ticks);
  void step();

  /// Invokes `fn` as process `id` at the current tick (for injecting workload).
  void act_as(AgentId id, const std::function<void(Context&, Process&)>& fn);

  std::size_t in_flight() const { return queue_.size(); }
  const SimEventLog& log() const { return log_; }
  const std::map<AgentId, std::vector<resources::UsageSample>>& usage() const { return usage_; }
  /// Would be set if any budget component were observed below zero after a charge.
  bool budget_violation() const { return budget_violation_; }

 private:
  friend class Context;

  struct InFlight {
    AgentId from;
    AgentId to;
    std::uint64_t send_id;
    Tick sent_at;
    Bytes bytes;
    resources::Amount reserved_memory;
  };

  SendStatus send(AgentId from, AgentId to, const wire::Message& m);
  void enqueue(AgentId from, AgentId to, std::uint64_t send_id, std::uint16_t message_id, const Bytes& bytes,
               const std::string& hex, const resources::ResourceVector& cost, bool dup);
  void deliver(InFlight f);
  void start();
  double unit();
  Tick draw_delay();
  bool omitted(AgentId from, AgentId to) const;
  void observe(AgentId id, const resources::ResourceVector& cost, bool is_send);
  std::mt19937_64& rng_of(AgentId id);

  SimConfig config_;
  std::mt19937_64 rng_;
  std::map<AgentId, std::unique_ptr<Process>> processes_;
  std::map<AgentId, std::mt19937_64> process_rng_;
  std::vector<AgentId> ids_;
  std::set<AgentId> crashed_;
  std::map<std::pair<Tick, std::uint64_t>, InFlight> queue_;
  std::map<std::tuple<AgentId, AgentId, std::uint16_t>, std::uint32_t> consecutive_drops_;
  std::map<AgentId, std::uint32_t> sends_this_tick_;
  std::map<AgentId, std::vector<resources::UsageSample>> usage_;
  SimEventLog log_;
  Tick now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_send_id_ = 1;
  bool started_ = false;
  bool budget_violation_ = false;
};

struct TickMetrics {
  Tick tick = 0;
  /// Messages in flight anywhere in the network at the end of the tick.
  std::uint64_t queue_depth = 0;
  /// Deepest single-receiver queue at the end of the tick.
  std::uint64_t max_inbox = 0;
  std::uint64_t throughput = 0;
  std::uint64_t drops = 0;
};

struct MetricsReport {
  std::vector<TickMetrics> per_tick;
  std::uint64_t max_queue_depth = 0;
  std::uint64_t max_inbox_depth = 0;
  double mean_throughput = 0;
  std::map<Tick, std::uint64_t> latency_histogram;
  std::uint64_t sends = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t drops = 0;
  std::uint64_t duplicates = 0;
  double median_latency = 0;
  double p95_latency = 0;
  double p99_latency = 0;
  double max_latency = 0;
};

MetricsReport metrics(const SimEventLog& log);
/// Nearest-rank percentile of the histogram; 0 when empty.
double latency_percentile(const std::map<Tick, std::uint64_t>& histogram, double p);
/// Per-tick CSV (tick, queue_depth, max_inbox, throughput, drops), units in the headers.
std::string metrics_csv(const MetricsReport& m);
/// Summary JSON with latencies converted to milliseconds at `tick_ms` per tick.
std::string metrics_summary_json(const MetricsReport& m, double tick_ms);

}  // namespace muacp::simnet
