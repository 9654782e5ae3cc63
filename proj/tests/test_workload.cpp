#include <algorithm>

#include "doctest.h"
#include "muacp/workload.hpp"

using namespace muacp;
using namespace muacp::workload;

TEST_CASE("zero and one agent produce no conversations") {
  ScaleConfig c;
  for (std::size_t n : {0, 1}) {
    const auto r = run_scale_point(c, n);
    CHECK(r.initiated == 0);
    CHECK(r.completion_rate() == 1.0);
    CHECK(r.quiescent);
  }
}

TEST_CASE("small lossy run completes every conversation once the network stabilizes") {
  ScaleConfig c;
  c.sim.drop_rate = 0.2;
  c.sim.dup_rate = 0.05;
  const auto r = run_scale_point(c, 20, true);
  CHECK(r.initiated == 20 * c.conversations_per_agent);
  CHECK(r.completed == r.initiated);
  CHECK(r.deadlocked == 0);
  CHECK(r.request_response_initiated + r.contract_net_initiated == r.initiated);
  CHECK(r.contract_net_initiated > 0);
  CHECK(r.quiescent);
  CHECK(r.drops_transient(c.sim.gst));
  CHECK(r.budget_ok);
  REQUIRE(r.log.has_value());
  CHECK(r.metrics.sends > 0);
  CHECK(r.metrics.drops > 0);
  CHECK(r.conversation_p50 <= r.conversation_p99);
  CHECK(r.conversation_p99 <= r.conversation_max);
}

TEST_CASE("scale sweep: inbox depth grows slower than the agent count") {
  ScaleConfig c;
  c.agent_counts = {25, 50, 100};
  const auto rep = run_scale(c);
  REQUIRE(rep.runs.size() == 3);
  CHECK(rep.linear_ratio == doctest::Approx(4.0));
  CHECK(rep.queue_ratio < rep.linear_ratio);
  CHECK(rep.ok());
  const std::string csv = scale_summary_csv(rep);
  CHECK(csv.rfind("n_agents,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(scale_report_json(rep, 1.0).find("\"queue_ratio\"") != std::string::npos);
}

TEST_CASE("workload runs are deterministic per seed") {
  ScaleConfig c;
  auto a = run_scale_point(c, 30, true);
  auto b = run_scale_point(c, 30, true);
  CHECK(a.log->to_jsonl() == b.log->to_jsonl());
  c.sim.seed = 2;
  auto d = run_scale_point(c, 30, true);
  CHECK(a.log->to_jsonl() != d.log->to_jsonl());
}

TEST_CASE("scale config validation") {
  ScaleConfig c;
  c.agent_counts = {100, 5000};
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.agent_counts = {200, 100};
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.contract_net_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(run_scale_point(ScaleConfig{}, 3000), Error);
  CHECK(ScaleConfig{}.effective_retry_interval() == 2 * 20 + 2);
}
