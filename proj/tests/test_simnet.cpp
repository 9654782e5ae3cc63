#include <algorithm>

#include "doctest.h"
#include "muacp/simnet.hpp"

using namespace muacp;
using namespace muacp::simnet;

namespace {

const resources::ResourceVector kPlenty{1'000'000, 1'000'000, 1'000'000, 1'000'000};

/// Records delivery ticks and never replies.
class Sink : public Process {
 public:
  void on_deliver(Context& ctx, const agent::TransitionLabel& l) override {
    arrivals.emplace_back(ctx.now(), l.message.header.message_id);
  }
  resources::ResourceBudget& budget() override { return budget_; }

  std::vector<std::pair<Tick, std::uint16_t>> arrivals;

 private:
  resources::ResourceBudget budget_{kPlenty};
};

wire::Message ping(std::uint16_t id) {
  wire::Message m;
  m.header.verb = wire::Verb::kPing;
  m.header.message_id = id;
  return m;
}

std::unique_ptr<Network> two_sinks(SimConfig cfg) {
  auto net = std::make_unique<Network>(cfg);
  net->add(AgentId{1}, std::make_unique<Sink>());
  net->add(AgentId{2}, std::make_unique<Sink>());
  return net;
}

SendStatus send_at(Network& net, std::uint16_t id) {
  SendStatus s{};
  net.act_as(AgentId{1}, [&](Context& ctx, Process&) { s = ctx.send(AgentId{2}, ping(id)); });
  return s;
}

}  // namespace

TEST_CASE("delay [1,1] delivers at now + 1") {
  SimConfig cfg;
  auto net = two_sinks(cfg);
  net->run(4);
  CHECK(send_at(*net, 1) == SendStatus::kQueued);
  const Tick sent = net->now();
  net->run(sent + 3);
  const auto& got = net->get<Sink>(AgentId{2}).arrivals;
  REQUIRE(got.size() == 1);
  CHECK(got[0].first == sent + 1);
}

TEST_CASE("dup_rate 1 delivers every message twice") {
  SimConfig cfg;
  cfg.dup_rate = 1.0;
  auto net = two_sinks(cfg);
  send_at(*net, 9);
  net->run(5);
  const auto& got = net->get<Sink>(AgentId{2}).arrivals;
  REQUIRE(got.size() == 2);
  CHECK(got[0].second == 9);
  CHECK(got[1].second == 9);
  const auto m = metrics(net->log());
  CHECK(m.duplicates == 1);
  CHECK(m.deliveries == 2);
}

TEST_CASE("after GST every send arrives within delta") {
  SimConfig cfg;
  cfg.gst = 10;
  cfg.delta = 4;
  cfg.delay_min = 1;
  cfg.delay_max = 50;
  cfg.drop_rate = 0.5;
  cfg.seed = 3;
  auto net = two_sinks(cfg);
  net->run(9);
  std::vector<std::pair<Tick, std::uint16_t>> sends;
  for (std::uint16_t i = 1; i <= 200; ++i) {
    sends.emplace_back(net->now(), i);
    CHECK(send_at(*net, i) == SendStatus::kQueued);
    net->step();
  }
  net->run(net->now() + 10);
  const auto& got = net->get<Sink>(AgentId{2}).arrivals;
  REQUIRE(got.size() == sends.size());
  for (const auto& [at, id] : got) {
    const auto it = std::find_if(sends.begin(), sends.end(), [&](const auto& s) { return s.second == id; });
    REQUIRE(it != sends.end());
    CHECK(at - it->first >= 1);
    CHECK(at - it->first <= cfg.delta);
  }
}

TEST_CASE("a crashed process neither sends nor receives") {
  SimConfig cfg;
  cfg.fault_schedule.push_back(CrashEvent{AgentId{2}, 3, std::nullopt});
  auto net = two_sinks(cfg);
  net->run(1);
  send_at(*net, 1);  // arrives at tick 3, after the crash took effect
  net->run(10);
  CHECK(net->crashed(AgentId{2}));
  CHECK(net->get<Sink>(AgentId{2}).arrivals.empty());
  SendStatus s{};
  net->act_as(AgentId{2}, [&](Context& ctx, Process&) { s = ctx.send(AgentId{1}, ping(2)); });
  CHECK(s == SendStatus::kSenderCrashed);
  const auto& recs = net->log().records();
  CHECK(std::any_of(recs.begin(), recs.end(), [](const EventRecord& r) {
    return r.kind == EventKind::kDrop && r.detail == "receiver_crashed";
  }));
}

TEST_CASE("crash-recovery brings a process back") {
  SimConfig cfg;
  cfg.fault_schedule.push_back(CrashEvent{AgentId{2}, 2, Tick{5}});
  auto net = two_sinks(cfg);
  net->run(6);
  CHECK_FALSE(net->crashed(AgentId{2}));
  send_at(*net, 1);
  net->run(10);
  CHECK(net->get<Sink>(AgentId{2}).arrivals.size() == 1);
}

TEST_CASE("fair loss: a message retried on every tick gets through within 21 attempts") {
  SimConfig cfg;
  cfg.gst = 1'000'000;
  cfg.drop_rate = 1.0;
  auto net = two_sinks(cfg);
  int attempts = 0;
  SendStatus s = SendStatus::kLost;
  while (s == SendStatus::kLost && attempts < 100) {
    ++attempts;
    s = send_at(*net, 42);
    net->step();
  }
  CHECK(s == SendStatus::kQueued);
  CHECK(attempts == static_cast<int>(cfg.max_consecutive_drops) + 1);
  net->step();
  CHECK(net->get<Sink>(AgentId{2}).arrivals.size() == 1);
}

TEST_CASE("omission drops one direction only") {
  SimConfig cfg;
  cfg.omissions.push_back(Omission{AgentId{1}, AgentId{2}, 0, 100});
  auto net = two_sinks(cfg);
  CHECK(send_at(*net, 1) == SendStatus::kLost);
  SendStatus back{};
  net->act_as(AgentId{2}, [&](Context& ctx, Process&) { back = ctx.send(AgentId{1}, ping(2)); });
  CHECK(back == SendStatus::kQueued);
  net->run(5);
  CHECK(net->get<Sink>(AgentId{2}).arrivals.empty());
  CHECK(net->get<Sink>(AgentId{1}).arrivals.size() == 1);
}

TEST_CASE("self-sends, unknown receivers and invalid messages are refused") {
  auto net = two_sinks({});
  net->act_as(AgentId{1}, [&](Context& ctx, Process&) {
    CHECK(ctx.send(AgentId{1}, ping(1)) == SendStatus::kMalformed);
    CHECK(ctx.send(AgentId{9}, ping(1)) == SendStatus::kMalformed);
    wire::Message big = ping(1);
    big.payload.assign(70000, 0);
    CHECK(ctx.send(AgentId{2}, big) == SendStatus::kMalformed);
  });
}

TEST_CASE("latency histogram of a single delayed message") {
  SimConfig cfg;
  cfg.delay_min = 3;
  cfg.delay_max = 3;
  cfg.gst = 100;
  auto net = two_sinks(cfg);
  send_at(*net, 1);
  net->run(10);
  const auto m = metrics(net->log());
  CHECK(m.latency_histogram == std::map<Tick, std::uint64_t>{{3, 1}});
  CHECK(m.sends == 1);
  CHECK(m.deliveries == 1);
  CHECK(m.max_latency == 3);
  CHECK(m.p99_latency == 3);
  CHECK(m.max_queue_depth == 1);
  CHECK(m.max_inbox_depth == 1);
}

TEST_CASE("metrics of an empty log are zero") {
  const auto m = metrics(SimEventLog{});
  CHECK(m.per_tick.empty());
  CHECK(m.max_queue_depth == 0);
  CHECK(m.mean_throughput == 0);
  CHECK(m.latency_histogram.empty());
  CHECK(m.p99_latency == 0);
  CHECK(latency_percentile({}, 0.99) == 0);
}

TEST_CASE("nearest-rank percentiles") {
  const std::map<Tick, std::uint64_t> h{{1, 50}, {2, 45}, {10, 5}};
  CHECK(latency_percentile(h, 0.5) == 1);
  CHECK(latency_percentile(h, 0.95) == 2);
  CHECK(latency_percentile(h, 0.96) == 10);
  CHECK(latency_percentile(h, 1.0) == 10);
}

TEST_CASE("the network charges senders and receivers and releases buffers") {
  SimConfig cfg;
  cfg.cost_model.buffer_memory = 1;
  auto net = std::make_unique<Network>(cfg);
  const resources::ResourceVector lim{100, 1000, 0, 0};
  net->add(AgentId{1}, std::make_unique<AgentProcess>(AgentId{1}, resources::ResourceBudget(lim)));
  net->add(AgentId{2}, std::make_unique<AgentProcess>(AgentId{2}, resources::ResourceBudget(lim)));
  send_at(*net, 1);
  auto& rcv = net->get<AgentProcess>(AgentId{2});
  CHECK(rcv.budget().remaining().memory == 100 - 11);
  net->run(3);
  CHECK(rcv.budget().remaining().memory == 100);
  // The receiver answered the PING, so both sides paid 11 bandwidth bytes twice.
  CHECK(rcv.budget().remaining().bandwidth == 1000 - 22);
  CHECK(net->get<AgentProcess>(AgentId{1}).budget().remaining().bandwidth == 1000 - 22);
  CHECK_FALSE(net->budget_violation());
}

TEST_CASE("a full receive buffer drops the frame") {
  SimConfig cfg;
  cfg.cost_model.buffer_memory = 1;
  auto net = std::make_unique<Network>(cfg);
  net->add(AgentId{1}, std::make_unique<Sink>());
  net->add(AgentId{2}, std::make_unique<AgentProcess>(AgentId{2}, resources::ResourceBudget({15, 1000, 0, 0})));
  CHECK(send_at(*net, 1) == SendStatus::kQueued);
  send_at(*net, 2);
  const auto& recs = net->log().records();
  CHECK(std::count_if(recs.begin(), recs.end(), [](const EventRecord& r) {
          return r.kind == EventKind::kDrop && r.detail == "receiver_buffer";
        }) == 1);
}

TEST_CASE("same seed, same log") {
  auto run = [](std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.gst = 50;
    cfg.drop_rate = 0.3;
    cfg.dup_rate = 0.2;
    cfg.delay_max = 9;
    auto net = two_sinks(cfg);
    for (std::uint16_t i = 1; i <= 60; ++i) {
      send_at(*net, i);
      net->step();
    }
    net->run(net->now() + 20);
    return net->log().to_jsonl();
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("config validation and JSON") {
  SimConfig bad;
  bad.drop_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.delay_min = 4;
  bad.delay_max = 2;
  CHECK_THROWS_AS(bad.validate(), Error);

  const auto c = sim_config_from_json(R"({"gst": 20, "delta": 3, "drop_rate": 0.1, "seed": 9})");
  CHECK(c.gst == 20);
  CHECK(c.delta == 3);
  CHECK(c.drop_rate == doctest::Approx(0.1));
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(sim_config_from_json("{not json"), Error);
  CHECK_THROWS_AS(sim_config_from_json(R"({"drop_rate": -1})"), Error);
}

TEST_CASE("JSON-lines log has one object per record") {
  auto net = two_sinks({});
  send_at(*net, 1);
  net->run(3);
  const std::string j = net->log().to_jsonl();
  CHECK(std::count(j.begin(), j.end(), '\n') == static_cast<long>(net->log().size()));
  CHECK(j.find("\"kind\":\"send\"") != std::string::npos);
  CHECK(j.find("\"kind\":\"deliver\"") != std::string::npos);
}
