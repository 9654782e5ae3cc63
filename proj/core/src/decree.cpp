#include <algorithm>
#include <random>
#include <sstream>
#include <array>
#include <unordered_map>
#include <unordered_set>

#include "muacp/consensus.hpp"

namespace muacp::consensus {

using wire::Message;
using wire::Verb;

namespace {

/// Run-wide observations shared by all nodes of one decree run.
struct Recorder {
  std::map<std::string, std::uint64_t> messages;
  /// ballot -> (value, acceptors that accepted it)
  std::map<Ballot, std::pair<Bytes, std::set<std::uint32_t>>> accepts;
  bool conflicting_learn = false;
  bool conflicting_ballot_value = false;

  void accepted(std::uint32_t acceptor, const Ballot& b, const Bytes& v) {
    auto [it, fresh] = accepts.try_emplace(b, v, std::set<std::uint32_t>{});
    if (!fresh && it->second.first != v) {
      conflicting_ballot_value = true;
    }
    it->second.second.insert(acceptor);
  }
};

class Node : public simnet::Process {
 public:
  Node(AgentId id, const DecreeConfig& cfg, std::optional<Bytes> proposal, Recorder& rec)
      : id_(id), cfg_(cfg), budget_(cfg.budget), rec_(rec) {
    std::vector<AgentId> all;
    for (std::uint32_t i = 1; i <= cfg.n; ++i) {
      all.push_back(AgentId{i});
    }
    fd_ = FailureDetector(id, all, cfg.fd);
    for (const auto& [pid, value] : cfg.proposers) {
      proposers_.push_back(pid);
    }
    std::sort(proposers_.begin(), proposers_.end());
    if (proposal) {
      proposer_ = true;
      prop_.proposal = *proposal;
    }
  }

  resources::ResourceBudget& budget() override { return budget_; }

  void on_deliver(simnet::Context& ctx, const agent::TransitionLabel& label) override {
    handle(ctx, label.sender, label.message);
  }

  void on_tick(simnet::Context& ctx) override {
    const Tick now = ctx.now();
    for (AgentId peer : fd_.step(now)) {
      Message ping;
      ping.header.verb = Verb::kPing;
      const auto id = send(ctx, peer, std::move(ping), "ping");
      fd_.sent(peer, id, now);
    }

    if (decided_) {
      if (leader()) {
        disseminate(ctx);
      }
      return;
    }
    if (!proposer_ || !leader()) {
      return;
    }
    const bool idle = prop_.phase == Phase::kIdle && now >= next_attempt_;
    const bool stuck = (prop_.phase == Phase::kPreparing || prop_.phase == Phase::kAccepting) &&
                       now - ballot_started_ >= cfg_.retry_timeout;
    if (idle || stuck) {
      const std::uint32_t round = started_ ? std::max(prop_.max_round_seen, prop_.ballot.round) + 1 : 0;
      started_ = true;
      ballot_started_ = now;
      broadcast(ctx, start_ballot(prop_, round, id_.value, cfg_.decree));
    }
  }

  void on_recover(simnet::Context& ctx) override {
    fd_.reset(ctx.now());
    pending_decide_.clear();
    if (!cfg_.persist_acceptor) {
      acc_ = AcceptorRecord{};
    }
    if (prop_.phase != Phase::kDecided) {
      prop_.phase = Phase::kIdle;
    }
    next_attempt_ = ctx.now();
  }

  const std::optional<Bytes>& decided() const { return decided_; }
  std::optional<Tick> decided_at() const { return decided_at_; }
  const FailureDetector& fd() const { return fd_; }

 private:
  bool leader() const {
    for (AgentId p : proposers_) {
      if (p == id_ || !fd_.suspected(p)) {
        return p == id_;
      }
    }
    return false;
  }

  std::uint16_t send(simnet::Context& ctx, AgentId to, Message m, const std::string& kind) {
    m.header.message_id = next_id_++;
    if (!m.header.has_flag(wire::flag::kResponse)) {
      m.header.sequence = next_seq_++;
    }
    ++rec_.messages[kind];
    const std::uint16_t id = m.header.message_id;
    if (to == id_) {
      // Loopback: the colocated acceptor or proposer sees the decoded wire image.
      handle(ctx, id_, wire::decode(wire::encode(m)));
    } else {
      ctx.send(to, m);
    }
    return id;
  }

  void send_paxos(simnet::Context& ctx, AgentId to, const PaxosMessage& p) {
    send(ctx, to, encode(p), std::string(kind_name(p.kind)));
  }

  void broadcast(simnet::Context& ctx, const PaxosMessage& p) {
    for (std::uint32_t i = 1; i <= cfg_.n; ++i) {
      send_paxos(ctx, AgentId{i}, p);
    }
  }

  PaxosMessage decide_message() const {
    PaxosMessage d;
    d.kind = Kind::kDecide;
    d.ballot = decided_ballot_;
    d.decree = cfg_.decree;
    d.value = *decided_;
    return d;
  }

  void disseminate(simnet::Context& ctx) {
    const Tick now = ctx.now();
    for (std::uint32_t i = 1; i <= cfg_.n; ++i) {
      const AgentId peer{i};
      if (peer == id_ || acked_.count(peer) != 0 || fd_.suspected(peer)) {
        continue;
      }
      auto it = pending_decide_.find(peer);
      if (it != pending_decide_.end() && now < it->second.second) {
        continue;
      }
      Message m = encode(decide_message());
      m.header.qos = static_cast<std::uint8_t>(wire::QoS::kAtLeastOnce);
      const auto id = send(ctx, peer, std::move(m), "decide");
      pending_decide_[peer] = {id, now + cfg_.decide_retry};
    }
  }

  void learn(const Bytes& v, const Ballot& b, Tick now) {
    if (decided_) {
      if (*decided_ != v) {
        rec_.conflicting_learn = true;
      }
      return;
    }
    decided_ = v;
    decided_ballot_ = b;
    decided_at_ = now;
    prop_.phase = Phase::kDecided;
  }

  void handle(simnet::Context& ctx, AgentId from, const Message& m) {
    const Tick now = ctx.now();
    if (m.header.verb == Verb::kPing) {
      if (!m.header.has_flag(wire::flag::kResponse)) {
        Message pong;
        pong.header.verb = Verb::kPing;
        pong.header.flags = wire::flag::kResponse;
        pong.header.sequence = m.header.message_id;
        pong.header.correlation_id = m.header.correlation_id;
        send(ctx, from, std::move(pong), "pong");
        return;
      }
      if (!fd_.on_response(from, m.header.sequence, now)) {
        auto it = pending_decide_.find(from);
        if (it != pending_decide_.end() && it->second.first == m.header.sequence) {
          pending_decide_.erase(it);
          acked_.insert(from);
        }
      }
      return;
    }

    auto p = try_decode(m);
    if (!p || p->decree != cfg_.decree) {
      ++malformed_;
      return;
    }
    if (decided_ && from != id_ && (p->kind == Kind::kPrepare || p->kind == Kind::kAccept)) {
      Message d = encode(decide_message());
      d.header.sequence = m.header.message_id;
      send(ctx, from, std::move(d), "decide");
      return;
    }

    switch (p->kind) {
      case Kind::kPrepare: {
        auto step = on_prepare(acc_, m);
        acc_ = step.next;
        send(ctx, from, std::move(step.reply), std::string(kind_name(try_decode(step.reply)->kind)));
        break;
      }
      case Kind::kAccept: {
        auto step = on_accept(acc_, m);
        const bool accepted = step.next.accepted != acc_.accepted;
        acc_ = step.next;
        if (accepted) {
          rec_.accepted(id_.value, acc_.accepted->first, acc_.accepted->second);
        }
        send(ctx, from, std::move(step.reply), std::string(kind_name(try_decode(step.reply)->kind)));
        break;
      }
      case Kind::kPromise:
        if (proposer_) {
          const auto step = on_promise(prop_, from.value, *p, cfg_.n, cfg_.decree);
          for (const auto& out : step.broadcast) {
            broadcast(ctx, out);
          }
        }
        break;
      case Kind::kAccepted:
        if (proposer_) {
          const Ballot b = prop_.ballot;
          const auto step = on_accepted(prop_, from.value, *p, cfg_.n);
          if (step.decided) {
            learn(*step.decided, b, now);
          }
        }
        break;
      case Kind::kNack:
        if (proposer_ && on_nack(prop_, *p)) {
          next_attempt_ = now + cfg_.nack_backoff;
        }
        break;
      case Kind::kDecide:
        learn(p->value, p->ballot, now);
        if (m.header.qos == static_cast<std::uint8_t>(wire::QoS::kAtLeastOnce)) {
          Message ack;
          ack.header.verb = Verb::kPing;
          ack.header.flags = wire::flag::kResponse;
          ack.header.sequence = m.header.message_id;
          ack.header.correlation_id = m.header.correlation_id;
          send(ctx, from, std::move(ack), "ack");
        }
        break;
    }
  }

  AgentId id_;
  const DecreeConfig& cfg_;
  resources::ResourceBudget budget_;
  Recorder& rec_;
  FailureDetector fd_;
  std::vector<AgentId> proposers_;
  bool proposer_ = false;
  bool started_ = false;
  AcceptorRecord acc_;
  ProposerRecord prop_;
  Tick ballot_started_ = 0;
  Tick next_attempt_ = 0;
  std::optional<Bytes> decided_;
  Ballot decided_ballot_;
  std::optional<Tick> decided_at_;
  std::map<AgentId, std::pair<std::uint16_t, Tick>> pending_decide_;
  std::set<AgentId> acked_;
  std::uint16_t next_id_ = 1;
  std::uint16_t next_seq_ = 1;
  std::uint64_t malformed_ = 0;
};

}  // namespace

DecreeOutcome run_decree(const DecreeConfig& cfg, bool keep_log) {
  if (cfg.n < 1) {
    throw Error("a decree needs at least one participant");
  }
  std::map<AgentId, Bytes> proposals;
  for (const auto& [id, value] : cfg.proposers) {
    if (id.value < 1 || id.value > cfg.n) {
      throw Error("proposer " + std::to_string(id.value) + " is not a participant");
    }
    if (value.size() > kMaxValueBytes) {
      throw Error("proposal value longer than " + std::to_string(kMaxValueBytes) + " bytes");
    }
    proposals[id] = wire::to_bytes(value);
  }

  Recorder rec;
  simnet::Network net(cfg.sim);
  std::vector<Node*> nodes;
  for (std::uint32_t i = 1; i <= cfg.n; ++i) {
    const AgentId id{i};
    std::optional<Bytes> proposal;
    if (auto it = proposals.find(id); it != proposals.end()) {
      proposal = it->second;
    }
    auto node = std::make_unique<Node>(id, cfg, proposal, rec);
    nodes.push_back(node.get());
    net.add(id, std::move(node));
  }

  auto everyone_live_decided = [&] {
    for (std::uint32_t i = 1; i <= cfg.n; ++i) {
      if (!net.crashed(AgentId{i}) && !nodes[i - 1]->decided()) {
        return false;
      }
    }
    return true;
  };

  while (net.now() <= cfg.max_ticks) {
    net.step();
    if (cfg.stop_when_decided && everyone_live_decided()) {
      break;
    }
  }

  DecreeOutcome o;
  o.ticks_run = net.now();
  o.messages = rec.messages;
  for (const auto& [kind, count] : rec.messages) {
    o.total_messages += count;
    if (kind == "prepare" || kind == "promise" || kind == "accept" || kind == "accepted" || kind == "nack") {
      o.paxos_messages += count;
    }
  }
  for (const auto& [ballot, entry] : rec.accepts) {
    if (is_quorum(entry.second.size(), cfg.n)) {
      o.chosen[ballot] = entry.first;
    }
  }

  std::set<Bytes> distinct;
  for (std::uint32_t i = 1; i <= cfg.n; ++i) {
    const AgentId id{i};
    const Node& node = *nodes[i - 1];
    o.decided[id] = node.decided();
    if (node.decided_at()) {
      o.decided_at[id] = *node.decided_at();
      o.last_decision = std::max(o.last_decision.value_or(0), *node.decided_at());
    }
    if (node.decided()) {
      distinct.insert(*node.decided());
    }
    if (net.crashed(id)) {
      o.crashed.insert(id);
    }
    o.suspicions[id] = node.fd().transitions();
    for (AgentId peer : node.fd().peers()) {
      o.fd_timeouts[id][peer] = node.fd().timeout(peer);
    }
    if (!net.process(id).budget().remaining().non_negative()) {
      o.budget_ok = false;
    }
  }
  for (const auto& [ballot, value] : o.chosen) {
    distinct.insert(value);
  }
  o.agreement = distinct.size() <= 1 && !rec.conflicting_learn && !rec.conflicting_ballot_value;
  for (const auto& v : distinct) {
    if (std::none_of(proposals.begin(), proposals.end(), [&](const auto& kv) { return kv.second == v; })) {
      o.validity = false;
    }
  }
  o.all_survivors_decided = true;
  for (std::uint32_t i = 1; i <= cfg.n; ++i) {
    if (o.crashed.count(AgentId{i}) == 0 && !o.decided[AgentId{i}]) {
      o.all_survivors_decided = false;
    }
  }
  if (net.budget_violation()) {
    o.budget_ok = false;
  }
  if (keep_log) {
    o.log_jsonl = net.log().to_jsonl();
  }
  return o;
}

FdReport check_failure_detector(const DecreeConfig& cfg, const DecreeOutcome& o) {
  FdReport r;
  const Tick rtt = fd_round_trip_bound(cfg.sim);
  std::map<AgentId, const simnet::CrashEvent*> crash_of;
  for (const auto& e : cfg.sim.fault_schedule) {
    crash_of.emplace(e.agent, &e);
  }
  auto fail = [&](AgentId obs, AgentId peer, const std::string& what) {
    r.failures.push_back("observer " + std::to_string(obs.value) + ", peer " + std::to_string(peer.value) + ": " +
                         what);
  };
  for (std::uint32_t i = 1; i <= cfg.n; ++i) {
    const AgentId obs{i};
    if (o.crashed.count(obs) != 0 || crash_of.count(obs) != 0) {
      continue;
    }
    const auto& history = o.suspicions.at(obs);
    for (std::uint32_t j = 1; j <= cfg.n; ++j) {
      const AgentId peer{j};
      if (peer == obs) {
        continue;
      }
      const Tick final_timeout = o.fd_timeouts.at(obs).at(peer);
      std::vector<Suspicion> mine;
      for (const auto& s : history) {
        if (s.peer == peer) {
          mine.push_back(s);
        }
      }
      auto crash = crash_of.find(peer);
      if (crash == crash_of.end()) {
        ++r.correct_pairs;
        // Replay the timeout: it starts at the initial value and doubles at every cleared suspicion.
        Tick timeout = cfg.fd.initial_timeout;
        std::optional<Tick> stable_at;
        if (timeout >= rtt) {
          stable_at = 0;
        }
        std::optional<Tick> horizon;
        for (const auto& s : mine) {
          if (s.suspected && horizon && s.tick >= *horizon) {
            fail(obs, peer,
                 "nonfaulty peer suspected at tick " + std::to_string(s.tick) + ", horizon " + std::to_string(*horizon));
            break;
          }
          if (!s.suspected) {
            timeout = std::min(2 * timeout, cfg.fd.max_timeout);
            if (!stable_at && timeout >= rtt) {
              stable_at = s.tick;
            }
          }
          if (stable_at && !horizon) {
            horizon = std::max(*stable_at, cfg.sim.gst + final_timeout + 1);
          }
        }
        if (stable_at) {
          ++r.stabilized_pairs;
          r.max_horizon = std::max(r.max_horizon, std::max(*stable_at, cfg.sim.gst + final_timeout + 1));
        }
        // A false suspicion clears once the late answer lands, at most one round trip later.
        if (!mine.empty() && mine.back().suspected && mine.back().tick + rtt < o.ticks_run) {
          fail(obs, peer, "nonfaulty peer still suspected at the end of the run");
        }
        continue;
      }
      if (crash->second->recover_at || crash->second->at < cfg.sim.gst) {
        continue;
      }
      ++r.crashed_pairs;
      const Tick c = crash->second->at;
      // Answers sent before GST may still land until gst + delay_max and restart the wait; past
      // that point the bound is the plain timeout + delta after the crash.
      const Tick last_answer = std::max(c + cfg.sim.delta, cfg.sim.gst + std::max(cfg.sim.delay_max, cfg.sim.delta));
      const Tick deadline = last_answer + final_timeout;
      if (mine.empty() || !mine.back().suspected) {
        fail(obs, peer, "crashed at tick " + std::to_string(c) + " but not suspected at the end of the run");
      } else if (mine.back().tick > deadline) {
        fail(obs, peer, "crashed at tick " + std::to_string(c) + ", final suspicion at tick " +
                            std::to_string(mine.back().tick) + " after the deadline " + std::to_string(deadline));
      }
    }
  }
  return r;
}

DecreeConfig CampaignConfig::decree_for(std::uint64_t seed) const {
  if (n < 1) {
    throw Error("campaign needs n >= 1");
  }
  DecreeConfig d;
  d.n = n;
  const std::uint32_t p = proposers == 0 ? n : std::min(proposers, n);
  for (std::uint32_t i = 1; i <= p; ++i) {
    const std::string v = i <= values.size() ? values[i - 1] : "v" + std::to_string(i);
    d.proposers.emplace_back(AgentId{i}, v);
  }
  d.sim.gst = gst;
  d.sim.delta = delta;
  d.sim.drop_rate = drop_rate;
  d.sim.dup_rate = dup_rate;
  d.sim.delay_min = delay_min;
  d.sim.delay_max = delay_max;
  d.sim.seed = seed;
  d.sim.log_wire = false;
  d.fd = fd;
  d.max_ticks = max_ticks;
  d.stop_when_decided = stop_when_decided;
  d.retry_timeout = retry_timeout;

  if (!fault_schedule.empty()) {
    d.sim.fault_schedule = fault_schedule;
  } else if (crashes > 0) {
    if (crashes >= n) {
      throw Error("cannot crash every participant");
    }
    // Victims and crash ticks come from their own stream so they do not perturb the channel.
    std::mt19937_64 rng(seed * 0x2545F4914F6CDD1DULL + 0x9E3779B97F4A7C15ULL);
    std::vector<std::uint32_t> ids(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      ids[i] = i + 1;
    }
    std::vector<std::uint32_t> victims;
    do {
      for (std::uint32_t i = n - 1; i > 0; --i) {
        std::swap(ids[i], ids[rng() % (i + 1)]);
      }
      victims.assign(ids.begin(), ids.begin() + crashes);
    } while (std::all_of(d.proposers.begin(), d.proposers.end(), [&](const auto& pr) {
      return std::find(victims.begin(), victims.end(), pr.first.value) != victims.end();
    }));
    std::sort(victims.begin(), victims.end());
    const auto span = static_cast<std::uint64_t>(std::max<Tick>(crash_window_end - crash_window_start, 0) + 1);
    for (auto v : victims) {
      d.sim.fault_schedule.push_back(
          simnet::CrashEvent{AgentId{v}, crash_window_start + static_cast<Tick>(rng() % span), std::nullopt});
    }
  }
  d.sim.validate();
  return d;
}

CampaignReport run_campaign(const CampaignConfig& c, bool keep_details, bool check_fd) {
  CampaignReport r;
  r.n = c.n;
  for (auto seed : c.seeds) {
    const auto cfg = c.decree_for(seed);
    auto outcome = run_decree(cfg);
    ++r.runs;
    if (check_fd && !check_failure_detector(cfg, outcome).ok()) {
      ++r.fd_violations;
    }
    if (!outcome.agreement) {
      ++r.agreement_violations;
    }
    if (!outcome.validity) {
      ++r.validity_violations;
    }
    if (!outcome.budget_ok) {
      ++r.budget_violations;
    }
    if (!outcome.all_survivors_decided) {
      ++r.undecided_runs;
    } else if (outcome.last_decision) {
      const Tick after = std::max<Tick>(0, *outcome.last_decision - c.gst);
      r.max_ticks_after_gst = std::max(r.max_ticks_after_gst, after);
      if (c.liveness_ceiling > 0 && after > c.liveness_ceiling) {
        ++r.ceiling_violations;
      }
    }
    if (keep_details) {
      r.details.push_back({seed, std::move(outcome)});
    }
  }
  return r;
}

std::string campaign_csv(const CampaignReport& r) {
  std::ostringstream os;
  os << "seed,n_agents,crashed_agents,all_survivors_decided,agreement,validity,last_decision_tick,paxos_msgs,total_msgs\n";
  for (const auto& run : r.details) {
    const auto& o = run.outcome;
    os << run.seed << ',' << r.n << ',' << o.crashed.size() << ',' << (o.all_survivors_decided ? 1 : 0) << ','
       << (o.agreement ? 1 : 0) << ',' << (o.validity ? 1 : 0) << ','
       << (o.last_decision ? std::to_string(*o.last_decision) : "") << ',' << o.paxos_messages << ','
       << o.total_messages << '\n';
  }
  return os.str();
}

// ---- exhaustive interleavings ----

namespace {

struct Envelope {
  std::uint32_t from;
  std::uint32_t to;
  Message message;
};

struct World {
  std::array<AcceptorRecord, 3> acceptors;
  std::array<ProposerRecord, 2> proposers;
  std::array<std::uint32_t, 2> retries{};
  std::array<std::optional<Bytes>, 2> decided;
  std::vector<Envelope> flight;
  std::map<Ballot, std::pair<Bytes, std::set<std::uint32_t>>> accepts;
};

constexpr std::uint32_t kN = 3;
constexpr std::uint32_t kDecree = 1;

void put(std::string& key, const Bytes& b) {
  key += std::to_string(b.size());
  key += ':';
  key.append(b.begin(), b.end());
}

std::string key_of(const World& w, std::size_t remaining) {
  std::string k = std::to_string(remaining) + "|";
  for (const auto& a : w.acceptors) {
    k += a.promised ? to_string(*a.promised) : "-";
    if (a.accepted) {
      k += to_string(a.accepted->first);
      put(k, a.accepted->second);
    }
    k += ';';
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& p = w.proposers[i];
    k += to_string(p.ballot) + std::to_string(static_cast<int>(p.phase)) + "r" + std::to_string(w.retries[i]) +
         "m" + std::to_string(p.max_round_seen);
    for (const auto& [id, prior] : p.promises) {
      k += "P" + std::to_string(id);
      if (prior) {
        k += to_string(prior->first);
      }
    }
    for (auto id : p.accepts) {
      k += "A" + std::to_string(id);
    }
    if (w.decided[i]) {
      put(k, *w.decided[i]);
    }
    k += ';';
  }
  std::vector<std::string> msgs;
  for (const auto& e : w.flight) {
    auto bytes = wire::encode(e.message);
    bytes[2] = bytes[3] = bytes[4] = bytes[5] = 0;  // ids do not affect behaviour
    msgs.push_back(std::to_string(e.from) + ">" + std::to_string(e.to) + wire::to_hex(bytes));
  }
  std::sort(msgs.begin(), msgs.end());
  for (const auto& m : msgs) {
    k += m + ",";
  }
  for (const auto& [b, entry] : w.accepts) {
    k += to_string(b);
    for (auto a : entry.second) {
      k += std::to_string(a);
    }
  }
  return k;
}

void broadcast(World& w, std::uint32_t from, const PaxosMessage& p) {
  for (std::uint32_t to = 1; to <= kN; ++to) {
    w.flight.push_back({from, to, encode(p)});
  }
}

std::optional<std::string> violation(const World& w) {
  std::set<Bytes> values;
  for (const auto& [b, entry] : w.accepts) {
    if (is_quorum(entry.second.size(), kN)) {
      values.insert(entry.first);
    }
  }
  for (const auto& d : w.decided) {
    if (d) {
      values.insert(*d);
    }
  }
  if (values.size() > 1) {
    return "two values chosen";
  }
  return std::nullopt;
}

class Explorer {
 public:
  explicit Explorer(const ExhaustiveConfig& c) : cfg_(c) {}

  void run(World w, std::size_t remaining) {
    if (!seen_.insert(digest(key_of(w, remaining))).second) {
      return;
    }
    ++report_.states;
    if (auto v = violation(w)) {
      ++report_.violations;
      if (!report_.counterexample) {
        report_.counterexample = *v;
      }
      return;
    }
    if (w.decided[0] || w.decided[1]) {
      ++report_.decided_states;
    }
    if (remaining == 0 || w.flight.empty()) {
      ++report_.terminal_or_bounded;
      return;
    }
    std::set<std::string> tried;
    for (std::size_t i = 0; i < w.flight.size(); ++i) {
      const auto& e = w.flight[i];
      if (!tried.insert(std::to_string(e.from) + ">" + std::to_string(e.to) + wire::to_hex(wire::encode(e.message)))
               .second) {
        continue;
      }
      World next = w;
      Envelope env = next.flight[i];
      next.flight.erase(next.flight.begin() + static_cast<std::ptrdiff_t>(i));
      deliver(next, env);
      run(std::move(next), remaining - 1);
    }
  }

  ExhaustiveReport report() const { return report_; }

 private:
  void deliver(World& w, const Envelope& e) {
    const PaxosMessage p = decode(e.message);
    switch (p.kind) {
      case Kind::kPrepare: {
        auto s = on_prepare(w.acceptors[e.to - 1], e.message);
        w.acceptors[e.to - 1] = s.next;
        w.flight.push_back({e.to, e.from, s.reply});
        break;
      }
      case Kind::kAccept: {
        auto s = on_accept(w.acceptors[e.to - 1], e.message);
        if (s.next.accepted != w.acceptors[e.to - 1].accepted) {
          auto& entry = w.accepts[s.next.accepted->first];
          entry.first = s.next.accepted->second;
          entry.second.insert(e.to);
        }
        w.acceptors[e.to - 1] = s.next;
        w.flight.push_back({e.to, e.from, s.reply});
        break;
      }
      case Kind::kPromise: {
        auto& prop = w.proposers[e.to - 1];
        for (const auto& out : on_promise(prop, e.from, p, kN, kDecree).broadcast) {
          broadcast(w, e.to, out);
        }
        break;
      }
      case Kind::kAccepted: {
        auto& prop = w.proposers[e.to - 1];
        if (auto d = on_accepted(prop, e.from, p, kN).decided) {
          w.decided[e.to - 1] = *d;
        }
        break;
      }
      case Kind::kNack: {
        auto& prop = w.proposers[e.to - 1];
        if (on_nack(prop, p) && w.retries[e.to - 1] > 0) {
          --w.retries[e.to - 1];
          broadcast(w, e.to, start_ballot(prop, prop.max_round_seen + 1, e.to, kDecree));
        }
        break;
      }
      case Kind::kDecide:
        break;
    }
  }

  // Visited states are kept as 128-bit digests of their canonical key (two independent 64-bit
  // hashes); a collision over ~10^7 states has probability far below 10^-20.
  using Digest = std::pair<std::uint64_t, std::uint64_t>;
  struct DigestHash {
    std::size_t operator()(const Digest& d) const noexcept { return static_cast<std::size_t>(d.first); }
  };

  static Digest digest(const std::string& key) {
    std::uint64_t fnv = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
      fnv = (fnv ^ c) * 0x100000001b3ULL;
    }
    return {std::hash<std::string>{}(key), fnv};
  }

  ExhaustiveConfig cfg_;
  ExhaustiveReport report_;
  std::unordered_set<Digest, DigestHash> seen_;
};

}  // namespace

ExhaustiveReport exhaustive_check(const ExhaustiveConfig& c) {
  World w;
  for (std::uint32_t i = 0; i < 2; ++i) {
    w.proposers[i].proposal = wire::to_bytes(i == 0 ? "a" : "b");
    w.retries[i] = c.retries;
    broadcast(w, i + 1, start_ballot(w.proposers[i], 0, i + 1, kDecree));
  }
  Explorer ex(c);
  ex.run(std::move(w), c.max_deliveries);
  return ex.report();
}

}  // namespace muacp::consensus
