#include "muacp/workload.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "muacp/fipa.hpp"

namespace muacp::workload {

using fipa::Performative;
using wire::Message;

simnet::SimConfig ScaleConfig::default_sim() {
  simnet::SimConfig s;
  s.gst = 200;
  s.delta = 5;
  s.drop_rate = 0.01;
  s.dup_rate = 0.0;
  s.delay_min = 1;
  s.delay_max = 20;
  s.seed = 1;
  s.log_wire = false;
  return s;
}

void ScaleConfig::validate() const {
  sim.validate();
  for (std::size_t n : agent_counts) {
    if (n > max_agents) {
      throw Error("scale config: " + std::to_string(n) + " agents exceeds max_agents " + std::to_string(max_agents));
    }
  }
  if (!std::is_sorted(agent_counts.begin(), agent_counts.end())) {
    throw Error("scale config: agent_counts must be ascending");
  }
  if (initiation_window == 0 && conversations_per_agent > 0) {
    throw Error("scale config: initiation_window must be positive");
  }
  if (!(contract_net_fraction >= 0.0 && contract_net_fraction <= 1.0)) {
    throw Error("scale config: contract_net_fraction must lie in [0, 1]");
  }
  if (bidders == 0) {
    throw Error("scale config: bidders must be at least 1");
  }
  if (max_ticks == 0) {
    throw Error("scale config: max_ticks must be positive");
  }
}

Tick ScaleConfig::effective_retry_interval() const {
  return retry_interval != 0 ? retry_interval : 2 * std::max(sim.delay_max, sim.delta) + 2;
}

namespace {

constexpr Tick kNoAskTimeout = 1'000'000'000;

struct Conversation {
  bool contract_net = false;
  Tick started = 0;
  std::optional<Tick> finished;
  AgentId peer{0};
  std::vector<AgentId> bidders;
  std::map<AgentId, std::uint32_t> proposals;
  bool awarded = false;
  /// (receiver, message id) of every at-least-once message this side sent for the conversation.
  std::set<std::pair<AgentId, std::uint16_t>> sent;
};

class WorkloadAgent : public simnet::AgentProcess {
 public:
  WorkloadAgent(AgentId id, const ScaleConfig& cfg, agent::AgentConfig acfg)
      : AgentProcess(id, resources::ResourceBudget(kBudget), acfg), cfg_(cfg) {}

  void on_start(simnet::Context& ctx) override {
    if (ctx.agents().size() < 2) {
      return;
    }
    std::uniform_int_distribution<Tick> when(0, cfg_.initiation_window - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::uint32_t i = 0; i < cfg_.conversations_per_agent; ++i) {
      const Tick at = when(ctx.rng());
      plan_.push_back({at, coin(ctx.rng()) < cfg_.contract_net_fraction});
    }
    std::stable_sort(plan_.begin(), plan_.end(), [](const Planned& a, const Planned& b) { return a.at < b.at; });
  }

  void on_tick(simnet::Context& ctx) override {
    AgentProcess::on_tick(ctx);
    while (next_plan_ < plan_.size() && plan_[next_plan_].at <= ctx.now()) {
      initiate(ctx, plan_[next_plan_].contract_net);
      ++next_plan_;
    }
    settle(ctx.now());
  }

  bool plan_exhausted() const { return next_plan_ == plan_.size(); }
  bool idle() const { return agent().retransmissions().empty(); }
  const std::map<std::uint16_t, Conversation>& conversations() const { return convs_; }

 protected:
  void on_procedural(simnet::Context& ctx, const agent::TransitionLabel& label) override {
    const Message& m = label.message;
    const auto* proc = m.find(wire::OptionType::kProc);
    if (proc == nullptr || proc->value.size() != 1 || m.header.has_flag(wire::flag::kResponse)) {
      return;
    }
    const auto perf = fipa::performative_from_code(proc->value[0]);
    const std::uint16_t cid = m.header.correlation_id;
    if (perf == Performative::kCfp) {
      // Bid once per call; a retransmitted CFP is only re-acknowledged.
      if (!bids_.insert({label.sender, cid}).second) {
        return;
      }
      std::uniform_int_distribution<std::uint32_t> price(1, 1000);
      send_fipa(ctx, label.sender, Performative::kPropose, "price(" + std::to_string(price(ctx.rng())) + ")", cid,
                nullptr);
    } else if (perf == Performative::kPropose) {
      auto it = convs_.find(cid);
      if (it == convs_.end() || !it->second.contract_net) {
        return;
      }
      Conversation& c = it->second;
      if (std::find(c.bidders.begin(), c.bidders.end(), label.sender) == c.bidders.end()) {
        return;
      }
      c.proposals.emplace(label.sender, price_of(wire::to_string(m.payload)));
      if (!c.awarded && c.proposals.size() == c.bidders.size()) {
        award(ctx, cid, c);
      }
    }
  }

 private:
  struct Planned {
    Tick at;
    bool contract_net;
  };

  static constexpr resources::Amount kBig = resources::Amount{1} << 40;
  static constexpr resources::ResourceVector kBudget{kBig, kBig, kBig, kBig};

  static std::uint32_t price_of(const std::string& content) {
    const auto open = content.find('(');
    const auto close = content.find(')');
    if (open == std::string::npos || close == std::string::npos || close <= open + 1) {
      return 0;
    }
    return static_cast<std::uint32_t>(std::stoul(content.substr(open + 1, close - open - 1)));
  }

  void send_fipa(simnet::Context& ctx, AgentId to, Performative p, const std::string& content, std::uint16_t cid,
                 Conversation* conv) {
    fipa::FipaAction a{p, "", "", content, 0};
    for (auto& e : fipa::translate(a, cid)) {
      if (e.from_receiver) {
        continue;
      }
      Message m = std::move(e.message);
      const Message ids = agent().make_message(m.header.verb);
      m.header.message_id = ids.header.message_id;
      m.header.sequence = ids.header.sequence;
      m.header.correlation_id = cid;
      m.header.qos = static_cast<std::uint8_t>(wire::QoS::kAtLeastOnce);
      send(ctx, to, m);
      if (conv != nullptr) {
        conv->sent.insert({to, m.header.message_id});
      }
    }
  }

  void initiate(simnet::Context& ctx, bool contract_net) {
    const auto& all = ctx.agents();
    std::vector<AgentId> peers;
    peers.reserve(all.size() - 1);
    for (AgentId a : all) {
      if (a != ctx.self()) {
        peers.push_back(a);
      }
    }
    const std::uint16_t cid = agent().next_correlation_id();
    Conversation c;
    c.started = ctx.now();
    c.contract_net = contract_net;
    if (!contract_net) {
      std::uniform_int_distribution<std::size_t> pick(0, peers.size() - 1);
      c.peer = peers[pick(ctx.rng())];
      auto& conv = convs_.emplace(cid, std::move(c)).first->second;
      send_fipa(ctx, conv.peer, Performative::kRequest, "serve(job" + std::to_string(cid) + ")", cid, &conv);
      return;
    }
    const std::size_t k = std::min<std::size_t>(cfg_.bidders, peers.size());
    // Partial Fisher-Yates: the first k entries become the bidders.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, peers.size() - 1);
      std::swap(peers[i], peers[pick(ctx.rng())]);
    }
    c.bidders.assign(peers.begin(), peers.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(c.bidders.begin(), c.bidders.end());
    auto& conv = convs_.emplace(cid, std::move(c)).first->second;
    for (AgentId b : conv.bidders) {
      send_fipa(ctx, b, Performative::kCfp, "task(job" + std::to_string(cid) + ")", cid, &conv);
    }
  }

  void award(simnet::Context& ctx, std::uint16_t cid, Conversation& c) {
    AgentId winner = c.proposals.begin()->first;
    for (const auto& [who, price] : c.proposals) {
      if (price < c.proposals.at(winner)) {
        winner = who;
      }
    }
    for (AgentId b : c.bidders) {
      send_fipa(ctx, b, b == winner ? Performative::kAcceptProposal : Performative::kRejectProposal,
                "task(job" + std::to_string(cid) + ")", cid, &c);
    }
    c.awarded = true;
  }

  bool acknowledged(const Conversation& c) const {
    for (const auto& r : agent().retransmissions()) {
      if (c.sent.count({r.to, r.message.header.message_id}) != 0) {
        return false;
      }
    }
    return true;
  }

  void settle(Tick now) {
    for (; answers_seen_ < agent().answers().size(); ++answers_seen_) {
      const auto& ans = agent().answers()[answers_seen_];
      auto it = convs_.find(ans.correlation_id);
      if (it != convs_.end() && !it->second.contract_net && it->second.peer == ans.from && !it->second.finished) {
        it->second.finished = now;
      }
    }
    for (auto& [cid, c] : convs_) {
      if (c.contract_net && c.awarded && !c.finished && acknowledged(c)) {
        c.finished = now;
      }
    }
  }

  const ScaleConfig& cfg_;
  std::vector<Planned> plan_;
  std::size_t next_plan_ = 0;
  std::map<std::uint16_t, Conversation> convs_;
  std::set<std::pair<AgentId, std::uint16_t>> bids_;
  std::size_t answers_seen_ = 0;
};

double nearest_rank(std::vector<Tick>& v, double p) {
  if (v.empty()) {
    return 0;
  }
  std::sort(v.begin(), v.end());
  const auto rank = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size()))));
  return static_cast<double>(v[rank - 1]);
}

}  // namespace

ScaleRun run_scale_point(const ScaleConfig& cfg, std::size_t n, bool keep_log) {
  cfg.validate();
  if (n > cfg.max_agents) {
    throw Error("scale run: " + std::to_string(n) + " agents exceeds max_agents");
  }
  agent::AgentConfig acfg;
  acfg.ask_timeout = kNoAskTimeout;
  acfg.retry_interval = cfg.effective_retry_interval();
  acfg.retry_limit = 0;
  acfg.cost_model = cfg.sim.cost_model;

  simnet::Network net(cfg.sim);
  std::vector<WorkloadAgent*> agents;
  for (std::size_t i = 0; i < n; ++i) {
    const AgentId id{static_cast<std::uint32_t>(i + 1)};
    auto p = std::make_unique<WorkloadAgent>(id, cfg, acfg);
    agents.push_back(p.get());
    net.add(id, std::move(p));
  }

  ScaleRun r;
  r.n = n;
  auto settled = [&] {
    if (net.in_flight() != 0) {
      return false;
    }
    return std::all_of(agents.begin(), agents.end(), [](const WorkloadAgent* a) { return a->plan_exhausted() && a->idle(); });
  };
  if (n > 0) {
    do {
      net.step();
    } while (!settled() && net.now() < cfg.max_ticks);
  }
  r.ticks_run = net.now();
  r.quiescent = settled();

  std::vector<Tick> latencies;
  for (const WorkloadAgent* a : agents) {
    for (const auto& [cid, c] : a->conversations()) {
      ++r.initiated;
      (c.contract_net ? r.contract_net_initiated : r.request_response_initiated)++;
      if (c.finished) {
        ++r.completed;
        (c.contract_net ? r.contract_net_completed : r.request_response_completed)++;
        latencies.push_back(*c.finished - c.started);
      }
    }
    if (!a->agent().budget().remaining().non_negative()) {
      r.budget_ok = false;
    }
  }
  if (net.budget_violation()) {
    r.budget_ok = false;
  }
  r.deadlocked = r.initiated - r.completed;
  r.conversation_p50 = nearest_rank(latencies, 0.50);
  r.conversation_p99 = nearest_rank(latencies, 0.99);
  r.conversation_max = latencies.empty() ? 0.0 : static_cast<double>(latencies.back());

  for (const auto& rec : net.log().records()) {
    if (rec.kind == simnet::EventKind::kDrop) {
      r.last_drop_tick = rec.tick;
    }
  }
  r.metrics = simnet::metrics(net.log());
  if (keep_log) {
    r.log = net.log();
  }
  return r;
}

ScaleReport run_scale(const ScaleConfig& cfg, bool keep_logs) {
  cfg.validate();
  ScaleReport rep;
  for (std::size_t n : cfg.agent_counts) {
    ScaleRun run = run_scale_point(cfg, n, keep_logs);
    rep.all_complete = rep.all_complete && run.completed == run.initiated;
    rep.no_deadlock = rep.no_deadlock && run.deadlocked == 0 && run.quiescent;
    rep.drops_transient = rep.drops_transient && run.drops_transient(cfg.sim.gst);
    rep.latency_bounded = rep.latency_bounded && std::isfinite(run.metrics.p99_latency) &&
                          std::isfinite(run.conversation_p99) && run.ticks_run < cfg.max_ticks;
    rep.budget_ok = rep.budget_ok && run.budget_ok;
    rep.runs.push_back(std::move(run));
  }
  if (rep.runs.size() >= 2) {
    const ScaleRun& first = rep.runs.front();
    const ScaleRun& last = rep.runs.back();
    if (first.n > 0) {
      rep.linear_ratio = static_cast<double>(last.n) / static_cast<double>(first.n);
    }
    auto ratio = [](std::uint64_t a, std::uint64_t b) {
      return b == 0 ? (a == 0 ? 1.0 : HUGE_VAL) : static_cast<double>(a) / static_cast<double>(b);
    };
    rep.queue_ratio = ratio(last.metrics.max_inbox_depth, first.metrics.max_inbox_depth);
    rep.global_queue_ratio = ratio(last.metrics.max_queue_depth, first.metrics.max_queue_depth);
    // A single agent count, or equal first and last counts, has nothing to compare.
    rep.sublinear = rep.linear_ratio <= 1.0 || rep.queue_ratio < rep.linear_ratio;
  } else if (rep.runs.size() == 1) {
    rep.queue_ratio = 1.0;
    rep.global_queue_ratio = 1.0;
  }
  return rep;
}

std::string scale_summary_csv(const ScaleReport& r) {
  std::ostringstream out;
  out << "n_agents,conversations_initiated,conversations_completed,deadlocked,completion_pct,max_queue_depth_msgs,"
         "max_inbox_depth_msgs,mean_throughput_msgs_per_tick,latency_p50_ticks,latency_p99_ticks,latency_max_ticks,"
         "conversation_p99_ticks,drops_msgs,last_drop_tick,ticks_run\n";
  for (const auto& run : r.runs) {
    out << run.n << ',' << run.initiated << ',' << run.completed << ',' << run.deadlocked << ','
        << 100.0 * run.completion_rate() << ',' << run.metrics.max_queue_depth << ',' << run.metrics.max_inbox_depth
        << ',' << run.metrics.mean_throughput << ',' << run.metrics.median_latency << ',' << run.metrics.p99_latency
        << ',' << run.metrics.max_latency << ',' << run.conversation_p99 << ',' << run.metrics.drops << ',';
    if (run.last_drop_tick) {
      out << *run.last_drop_tick;
    }
    out << ',' << run.ticks_run << '\n';
  }
  return out.str();
}

}  // namespace muacp::workload
