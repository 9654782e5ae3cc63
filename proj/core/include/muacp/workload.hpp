#pragma once

// Desk-scale traffic for the scaling experiment: every agent opens a few conversations at random
// ticks, each either a request/response exchange or a contract-net round with k bidders. All
// conversation messages are sent at-least-once, so pre-GST loss is repaired by retransmission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "muacp/simnet.hpp"
#include "muacp/types.hpp"

namespace muacp::workload {

struct ScaleConfig {
  std::vector<std::size_t> agent_counts{100, 200, 400};
  /// Refuse configurations above this many agents.
  std::size_t max_agents = 2000;
  std::uint32_t conversations_per_agent = 4;
  /// Conversations start uniformly in [0, initiation_window).
  Tick initiation_window = 150;
  double contract_net_fraction = 0.3;
  std::uint32_t bidders = 3;
  /// Retransmission period; 0 picks 2 * delay_max + 2 so a retry rarely races its own ack.
  Tick retry_interval = 0;
  /// Hard stop for one run.
  Tick max_ticks = 5000;
  simnet::SimConfig sim = default_sim();
  std::string description;

  static simnet::SimConfig default_sim();
  /// Throws Error on out-of-range values.
  void validate() const;
  Tick effective_retry_interval() const;
};

ScaleConfig scale_config_from_json(std::string_view text);
ScaleConfig load_scale_config(const std::filesystem::path& path);

struct ScaleRun {
  std::size_t n = 0;
  std::uint64_t initiated = 0;
  std::uint64_t completed = 0;
  std::uint64_t request_response_initiated = 0;
  std::uint64_t request_response_completed = 0;
  std::uint64_t contract_net_initiated = 0;
  std::uint64_t contract_net_completed = 0;
  /// Initiated conversations that never terminated.
  std::uint64_t deadlocked = 0;
  /// Nothing in flight and no retransmission armed anywhere when the run stopped.
  bool quiescent = true;
  Tick ticks_run = 0;
  /// Last tick with a channel drop, if any.
  std::optional<Tick> last_drop_tick;
  /// Conversation latency (completion tick minus start tick), nearest rank.
  double conversation_p50 = 0;
  double conversation_p99 = 0;
  double conversation_max = 0;
  bool budget_ok = true;
  simnet::MetricsReport metrics;
  /// Filled only when requested.
  std::optional<simnet::SimEventLog> log;

  double completion_rate() const {
    return initiated == 0 ? 1.0 : static_cast<double>(completed) / static_cast<double>(initiated);
  }
  /// Drops stop once the network has stabilized.
  bool drops_transient(Tick gst) const { return !last_drop_tick || *last_drop_tick < gst; }
};

ScaleRun run_scale_point(const ScaleConfig& cfg, std::size_t n, bool keep_log = false);

struct ScaleReport {
  std::vector<ScaleRun> runs;
  /// max_inbox_depth(last n) / max_inbox_depth(first n).
  double queue_ratio = 0;
  /// Same ratio over the network-wide in-flight count; informational.
  double global_queue_ratio = 0;
  /// n(last) / n(first): the ratio linear growth would give.
  double linear_ratio = 1;
  bool sublinear = true;
  bool all_complete = true;
  bool no_deadlock = true;
  bool drops_transient = true;
  bool latency_bounded = true;
  bool budget_ok = true;

  bool ok() const { return sublinear && all_complete && no_deadlock && drops_transient && latency_bounded && budget_ok; }
};

ScaleReport run_scale(const ScaleConfig& cfg, bool keep_logs = false);

/// One row per agent count, units in the headers.
std::string scale_summary_csv(const ScaleReport& r);
std::string scale_report_json(const ScaleReport& r, double tick_ms);

}  // namespace muacp::workload
