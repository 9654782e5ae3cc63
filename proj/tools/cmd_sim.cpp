#include <algorithm>
#include <iostream>

#include "commands.hpp"
#include "json.hpp"
#include "muacp/consensus.hpp"
#include "muacp/simnet.hpp"
#include "muacp/workload.hpp"

namespace muacp::cli {

namespace {

/// Written logs carry wire images so they can feed check-bound --from-log.
consensus::DecreeConfig with_wire(consensus::DecreeConfig d) {
  d.sim.log_wire = true;
  return d;
}

}  // namespace

int cmd_sim_consensus(RunContext& ctx, const ConsensusOptions& o) {
  const auto& g = ctx.options();
  if (g.config.empty()) {
    throw UsageError("sim-consensus needs --config");
  }
  ctx.set_config(g.config);
  consensus::CampaignConfig c = consensus::load_campaign(g.config);
  if (auto seeds = ctx.seed_override()) {
    c.seeds = std::move(*seeds);
  }
  std::sort(c.seeds.begin(), c.seeds.end());
  c.seeds.erase(std::unique(c.seeds.begin(), c.seeds.end()), c.seeds.end());
  ctx.set_seeds(c.seeds);

  // Liveness needs a surviving majority; with f >= n/2 only safety is asserted.
  const bool expect_liveness = 2 * c.crashes < c.n;

  const auto report = consensus::run_campaign(c, true, o.check_fd);

  std::string runs;
  std::uint64_t paxos_min = UINT64_MAX;
  std::uint64_t paxos_max = 0;
  double paxos_sum = 0;
  std::size_t survivors_decided = 0;
  for (const auto& run : report.details) {
    runs += consensus::outcome_to_json(run.outcome, run.seed);
    paxos_min = std::min(paxos_min, run.outcome.paxos_messages);
    paxos_max = std::max(paxos_max, run.outcome.paxos_messages);
    paxos_sum += static_cast<double>(run.outcome.paxos_messages);
    survivors_decided += run.outcome.all_survivors_decided ? 1 : 0;
    if (o.all_logs) {
      const auto d = consensus::run_decree(with_wire(c.decree_for(run.seed)), true);
      ctx.write("events/seed-" + std::to_string(run.seed) + ".jsonl", d.log_jsonl);
    }
  }
  ctx.write("runs.jsonl", runs);
  ctx.write("campaign.csv", consensus::campaign_csv(report));
  if (!o.all_logs && !c.seeds.empty()) {
    const auto d = consensus::run_decree(with_wire(c.decree_for(c.seeds.front())), true);
    ctx.write("events-seed-" + std::to_string(c.seeds.front()) + ".jsonl", d.log_jsonl);
  }

  const bool budget_ok = report.budget_violations == 0;
  const bool fd_ok = !o.check_fd || report.fd_violations == 0;
  const bool live_ok = !expect_liveness || report.live();
  const bool ok = report.safe() && budget_ok && fd_ok && live_ok;
  const double n_runs = std::max<double>(1.0, static_cast<double>(report.runs));
  nlohmann::json summary{
      {"n_agents", c.n},
      {"crashes_per_run", c.crashes},
      {"runs", report.runs},
      {"agreement_violations", report.agreement_violations},
      {"validity_violations", report.validity_violations},
      {"safety_violations", report.agreement_violations + report.validity_violations},
      {"liveness_expected", expect_liveness},
      {"undecided_runs", report.undecided_runs},
      {"success_rate_pct", 100.0 * static_cast<double>(survivors_decided) / n_runs},
      {"liveness_ceiling_ticks", c.liveness_ceiling},
      {"ceiling_violations", report.ceiling_violations},
      {"max_ticks_after_gst", report.max_ticks_after_gst},
      {"max_ms_after_gst", static_cast<double>(report.max_ticks_after_gst) * ctx.tick_ms()},
      {"paxos_msgs_min", report.runs == 0 ? 0 : paxos_min},
      {"paxos_msgs_max", paxos_max},
      {"paxos_msgs_mean", paxos_sum / n_runs},
      {"budget_violations", report.budget_violations},
      {"fd_checked", o.check_fd},
      {"fd_violations", report.fd_violations},
      {"tick_ms", ctx.tick_ms()},
      {"ok", ok}};
  ctx.write("summary.json", summary.dump(2) + "\n");

  std::cout << "sim-consensus: n=" << c.n << " f=" << c.crashes << " runs=" << report.runs
            << " safety_violations=" << report.agreement_violations + report.validity_violations
            << " undecided=" << report.undecided_runs << (expect_liveness ? "" : " (liveness not asserted)")
            << " max_ticks_after_gst=" << report.max_ticks_after_gst << " paxos_msgs=[" << summary["paxos_msgs_min"]
            << "," << paxos_max << "]";
  if (o.check_fd) {
    std::cout << " fd_violations=" << report.fd_violations;
  }
  std::cout << " " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitPropertyFailure;
}

int cmd_sim_scale(RunContext& ctx, const ScaleOptions& o) {
  const auto& g = ctx.options();
  if (g.config.empty()) {
    throw UsageError("sim-scale needs --config");
  }
  ctx.set_config(g.config);
  workload::ScaleConfig c = workload::load_scale_config(g.config);
  if (auto seeds = ctx.seed_override()) {
    if (seeds->size() != 1) {
      throw UsageError("sim-scale takes a single seed");
    }
    c.sim.seed = seeds->front();
  }
  ctx.set_seeds({c.sim.seed});

  const auto report = workload::run_scale(c, o.logs);
  for (const auto& run : report.runs) {
    const std::string tag = "n" + std::to_string(run.n);
    ctx.write("metrics-" + tag + ".csv", simnet::metrics_csv(run.metrics));
    ctx.write("metrics-" + tag + ".json", simnet::metrics_summary_json(run.metrics, ctx.tick_ms()));
    if (run.log) {
      ctx.write("events-" + tag + ".jsonl", run.log->to_jsonl());
    }
  }
  ctx.write("scale.csv", workload::scale_summary_csv(report));
  ctx.write("scale.json", workload::scale_report_json(report, ctx.tick_ms()));

  std::cout << "sim-scale:";
  for (const auto& run : report.runs) {
    std::cout << " n=" << run.n << " (completed " << run.completed << "/" << run.initiated << ", max_inbox "
              << run.metrics.max_inbox_depth << ", max_queue " << run.metrics.max_queue_depth << ", p99 "
              << run.metrics.p99_latency * ctx.tick_ms() << " ms)";
  }
  std::cout << "\n  queue ratio " << report.queue_ratio << " (linear " << report.linear_ratio << "), global "
            << report.global_queue_ratio << ", " << (report.ok() ? "PASS" : "FAIL") << "\n";
  return report.ok() ? kExitOk : kExitPropertyFailure;
}

}  // namespace muacp::cli
