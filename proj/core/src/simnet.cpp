#include "muacp/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

namespace muacp::simnet {

void SimConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(drop_rate) || !prob(dup_rate)) {
    throw Error("drop_rate and dup_rate must lie in [0,1]");
  }
  if (delta < 1) {
    throw Error("delta must be at least one tick");
  }
  if (delay_min < 1 || delay_max < delay_min) {
    throw Error("delay range must satisfy 1 <= min <= max");
  }
  if (gst < 0) {
    throw Error("gst must be non-negative");
  }
  if (max_consecutive_drops == 0) {
    throw Error("max_consecutive_drops must be positive");
  }
  for (const auto& c : fault_schedule) {
    if (c.at < 0 || (c.recover_at && *c.recover_at <= c.at)) {
      throw Error("bad crash entry for agent " + std::to_string(c.agent.value));
    }
  }
  for (const auto& o : omissions) {
    if (o.to_tick < o.from_tick) {
      throw Error("omission interval is empty");
    }
  }
}

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kSend:
      return "send";
    case EventKind::kDeliver:
      return "deliver";
    case EventKind::kDrop:
      return "drop";
    case EventKind::kDup:
      return "dup";
    case EventKind::kCrash:
      return "crash";
    case EventKind::kRecover:
      return "recover";
    case EventKind::kTimer:
      return "timer";
  }
  return "?";
}

void SimEventLog::append(EventRecord r) {
  if (!records_.empty() && r.tick < records_.back().tick) {
    throw Error("event log ticks must be non-decreasing");
  }
  records_.push_back(std::move(r));
}

namespace {

void json_string(std::ostream& os, std::string_view s) {
  os << '"';
  for (char c : s) {
    if (c == '"' || c == '\\') {
      os << '\\' << c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      os << "\\u00" << "0123456789abcdef"[(c >> 4) & 0xF] << "0123456789abcdef"[c & 0xF];
    } else {
      os << c;
    }
  }
  os << '"';
}

}  // namespace

std::string SimEventLog::to_jsonl() const {
  std::ostringstream os;
  for (const auto& r : records_) {
    os << "{\"tick\":" << r.tick << ",\"kind\":\"" << event_kind_name(r.kind) << "\",\"from\":" << r.from.value
       << ",\"to\":" << r.to.value << ",\"send_id\":" << r.send_id << ",\"msg_id\":" << r.message_id;
    if (r.kind == EventKind::kDeliver || r.queued) {
      os << ",\"sent_at\":" << r.sent_at;
    }
    if (!r.detail.empty()) {
      os << ",\"detail\":";
      json_string(os, r.detail);
    }
    if (r.kind == EventKind::kDrop) {
      os << ",\"queued\":" << (r.queued ? "true" : "false");
    }
    if (!r.wire_hex.empty()) {
      os << ",\"wire\":\"" << r.wire_hex << '"';
    }
    os << "}\n";
  }
  return os.str();
}

void SimEventLog::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << to_jsonl();
}

// ---- Context ----

Tick Context::now() const {
  return net_.now_;
}

SendStatus Context::send(AgentId to, const wire::Message& m) {
  return net_.send(self_, to, m);
}

void Context::note_timer(std::string detail) {
  EventRecord r;
  r.tick = net_.now_;
  r.kind = EventKind::kTimer;
  r.from = self_;
  r.to = self_;
  r.detail = std::move(detail);
  net_.log_.append(std::move(r));
}

const std::vector<AgentId>& Context::agents() const {
  return net_.ids_;
}

std::mt19937_64& Context::rng() {
  return net_.rng_of(self_);
}

// ---- AgentProcess ----

AgentProcess::AgentProcess(AgentId id, resources::ResourceBudget budget, agent::AgentConfig config)
    : agent_(id, std::move(budget), std::move(config)) {}

SendStatus AgentProcess::send(Context& ctx, AgentId to, const wire::Message& m) {
  const SendStatus s = ctx.send(to, m);
  if (was_sent(s)) {
    agent_.record_send(agent::TransitionLabel{ctx.self(), to, m, 0}, ctx.now());
  }
  return s;
}

void AgentProcess::on_deliver(Context& ctx, const agent::TransitionLabel& label) {
  auto r = agent_.apply(label, ctx.now());
  for (const auto& out : r.replies) {
    send(ctx, out.to, out.message);
  }
  if (r.procedural) {
    on_procedural(ctx, label);
  }
}

void AgentProcess::on_tick(Context& ctx) {
  auto r = agent_.expire_timers(ctx.now());
  for (auto& n : r.notices) {
    notices_.push_back(std::move(n));
  }
  for (const auto& out : r.retransmissions) {
    if (was_sent(ctx.send(out.to, out.message))) {
      agent_.record_retransmission(out, ctx.now());
    }
  }
}

// ---- Network ----

Network::Network(SimConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
}

void Network::add(AgentId id, std::unique_ptr<Process> process) {
  if (started_) {
    throw Error("processes must be added before the run starts");
  }
  if (!process || processes_.count(id) != 0) {
    throw Error("duplicate or null process " + std::to_string(id.value));
  }
  processes_.emplace(id, std::move(process));
  process_rng_.emplace(id, std::mt19937_64(config_.seed ^ (0x9E3779B97F4A7C15ULL * (id.value + 1ULL))));
  ids_.insert(std::lower_bound(ids_.begin(), ids_.end(), id), id);
}

Process& Network::process(AgentId id) {
  auto it = processes_.find(id);
  if (it == processes_.end()) {
    throw Error("unknown agent " + std::to_string(id.value));
  }
  return *it->second;
}

std::mt19937_64& Network::rng_of(AgentId id) {
  return process_rng_.at(id);
}

double Network::unit() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

Tick Network::draw_delay() {
  Tick lo = config_.delay_min;
  Tick hi = config_.delay_max;
  if (now_ >= config_.gst) {
    lo = std::min(lo, config_.delta);
    hi = std::min(hi, config_.delta);
  }
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<Tick>(rng_() % span);
}

bool Network::omitted(AgentId from, AgentId to) const {
  return std::any_of(config_.omissions.begin(), config_.omissions.end(), [&](const Omission& o) {
    return o.from == from && o.to == to && now_ >= o.from_tick && now_ <= o.to_tick;
  });
}

void Network::observe(AgentId id, const resources::ResourceVector& cost, bool is_send) {
  auto& budget = process(id).budget();
  if (!budget.remaining().non_negative()) {
    budget_violation_ = true;
  }
  if (config_.record_usage) {
    resources::ResourceVector c = cost;
    c.memory = 0;
    usage_[id].push_back(resources::UsageSample{now_, c, budget.limit().memory - budget.remaining().memory, is_send});
  }
}

void Network::start() {
  if (started_) {
    return;
  }
  started_ = true;
  for (AgentId id : ids_) {
    Context ctx(*this, id);
    processes_.at(id)->on_start(ctx);
  }
}

void Network::act_as(AgentId id, const std::function<void(Context&, Process&)>& fn) {
  start();
  Context ctx(*this, id);
  fn(ctx, process(id));
}

SendStatus Network::send(AgentId from, AgentId to, const wire::Message& m) {
  if (crashed(from)) {
    return SendStatus::kSenderCrashed;
  }
  if (from == to || processes_.count(to) == 0 || !wire::validate(m).ok()) {
    return SendStatus::kMalformed;
  }
  EventRecord refused;
  refused.tick = now_;
  refused.kind = EventKind::kDrop;
  refused.from = from;
  refused.to = to;
  refused.message_id = m.header.message_id;

  if (config_.rate_cap != 0 && sends_this_tick_[from] >= config_.rate_cap) {
    refused.detail = "rate_cap";
    log_.append(std::move(refused));
    return SendStatus::kRateCapExceeded;
  }
  const Bytes bytes = wire::encode(m);
  const auto cost = resources::consumption(config_.cost_model, bytes.size());
  auto& budget = process(from).budget();
  if (!budget.feasible(cost)) {
    refused.detail = "budget";
    log_.append(std::move(refused));
    return SendStatus::kInfeasible;
  }
  // The sender's encode buffer is released as soon as the frame is handed to the channel.
  budget.charge(cost);
  budget.refund_memory(cost.memory);
  observe(from, cost, true);
  ++sends_this_tick_[from];

  const std::uint64_t send_id = next_send_id_++;
  const std::string hex = config_.log_wire ? wire::to_hex(bytes) : std::string();
  EventRecord rec;
  rec.tick = now_;
  rec.kind = EventKind::kSend;
  rec.from = from;
  rec.to = to;
  rec.send_id = send_id;
  rec.message_id = m.header.message_id;
  rec.wire_hex = hex;
  log_.append(rec);

  auto dropped = [&](std::string reason) {
    EventRecord d = rec;
    d.kind = EventKind::kDrop;
    d.detail = std::move(reason);
    d.wire_hex.clear();
    log_.append(std::move(d));
    return SendStatus::kLost;
  };

  if (omitted(from, to)) {
    return dropped("omission");
  }
  const auto key = std::make_tuple(from, to, m.header.message_id);
  if (now_ < config_.gst && config_.drop_rate > 0.0) {
    const bool lose = unit() < config_.drop_rate;
    auto& run = consecutive_drops_[key];
    if (lose && run < config_.max_consecutive_drops) {
      ++run;
      return dropped("loss");
    }
  }
  consecutive_drops_.erase(key);

  const bool dup = config_.dup_rate > 0.0 && unit() < config_.dup_rate;
  enqueue(from, to, send_id, m.header.message_id, bytes, hex, cost, false);
  if (dup) {
    enqueue(from, to, send_id, m.header.message_id, bytes, hex, cost, true);
  }
  return SendStatus::kQueued;
}

void Network::enqueue(AgentId from, AgentId to, std::uint64_t send_id, std::uint16_t message_id,
                      const Bytes& bytes, const std::string& hex, const resources::ResourceVector& cost,
                      bool dup) {
  EventRecord rec;
  rec.tick = now_;
  rec.from = from;
  rec.to = to;
  rec.send_id = send_id;
  rec.message_id = message_id;
  if (dup) {
    rec.kind = EventKind::kDup;
    rec.wire_hex = hex;
    log_.append(rec);
  }
  const Tick at = now_ + draw_delay();
  auto& rb = process(to).budget();
  const resources::ResourceVector reserve{cost.memory, 0, 0, 0};
  if (!rb.feasible(reserve)) {
    rec.kind = EventKind::kDrop;
    rec.detail = "receiver_buffer";
    rec.wire_hex.clear();
    log_.append(std::move(rec));
    return;
  }
  rb.charge(reserve);
  observe(to, {}, false);
  queue_.emplace(std::make_pair(at, next_seq_++), InFlight{from, to, send_id, now_, bytes, cost.memory});
}

void Network::deliver(InFlight f) {
  auto& rb = process(f.to).budget();
  rb.refund_memory(f.reserved_memory);

  EventRecord rec;
  rec.tick = now_;
  rec.from = f.from;
  rec.to = f.to;
  rec.send_id = f.send_id;
  rec.sent_at = f.sent_at;
  auto msg = wire::try_decode(f.bytes);
  rec.message_id = msg ? msg->header.message_id : 0;

  auto drop = [&](const char* reason) {
    rec.kind = EventKind::kDrop;
    rec.queued = true;
    rec.detail = reason;
    log_.append(std::move(rec));
  };
  if (crashed(f.to)) {
    drop("receiver_crashed");
    return;
  }
  if (!msg) {
    drop("undecodable");
    return;
  }
  const auto cost = resources::consumption(config_.cost_model, f.bytes.size());
  if (!rb.feasible(cost)) {
    drop("budget");
    return;
  }
  rb.charge(cost);
  rb.refund_memory(cost.memory);
  observe(f.to, cost, false);

  rec.kind = EventKind::kDeliver;
  if (config_.log_wire) {
    rec.wire_hex = wire::to_hex(f.bytes);
  }
  log_.append(std::move(rec));

  Context ctx(*this, f.to);
  processes_.at(f.to)->on_deliver(ctx, agent::TransitionLabel{f.from, f.to, std::move(*msg), 0});
}

void Network::step() {
  start();

  for (const auto& c : config_.fault_schedule) {
    if (processes_.count(c.agent) == 0) {
      continue;
    }
    if (c.at == now_ && crashed_.insert(c.agent).second) {
      EventRecord r;
      r.tick = now_;
      r.kind = EventKind::kCrash;
      r.from = c.agent;
      r.to = c.agent;
      log_.append(std::move(r));
    }
    if (c.recover_at && *c.recover_at == now_ && crashed_.erase(c.agent) != 0) {
      EventRecord r;
      r.tick = now_;
      r.kind = EventKind::kRecover;
      r.from = c.agent;
      r.to = c.agent;
      log_.append(std::move(r));
      Context ctx(*this, c.agent);
      processes_.at(c.agent)->on_recover(ctx);
    }
  }

  while (!queue_.empty() && queue_.begin()->first.first <= now_) {
    auto node = queue_.extract(queue_.begin());
    deliver(std::move(node.mapped()));
  }

  for (AgentId id : ids_) {
    if (!crashed(id)) {
      Context ctx(*this, id);
      processes_.at(id)->on_tick(ctx);
    }
  }
  ++now_;
  // The cap is per tick, including sends made by hosts between steps.
  sends_this_tick_.clear();
}

void Network::run(Tick until) {
  start();
  while (now_ <= until) {
    step();
  }
}

bool Network::run_until_quiescent(Tick max_ticks) {
  start();
  const Tick end = now_ + max_ticks;
  while (!queue_.empty() && now_ < end) {
    step();
  }
  return queue_.empty();
}

// ---- metrics ----

double latency_percentile(const std::map<Tick, std::uint64_t>& histogram, double p) {
  std::uint64_t total = 0;
  for (const auto& [lat, count] : histogram) {
    total += count;
  }
  if (total == 0) {
    return 0;
  }
  const auto rank = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(p * static_cast<double>(total))));
  std::uint64_t seen = 0;
  for (const auto& [lat, count] : histogram) {
    seen += count;
    if (seen >= rank) {
      return static_cast<double>(lat);
    }
  }
  return static_cast<double>(histogram.rbegin()->first);
}

MetricsReport metrics(const SimEventLog& log) {
  MetricsReport m;
  if (log.empty()) {
    return m;
  }
  const Tick last = log.records().back().tick;
  m.per_tick.resize(static_cast<std::size_t>(last + 1));
  for (Tick t = 0; t <= last; ++t) {
    m.per_tick[static_cast<std::size_t>(t)].tick = t;
  }
  // Global depth moves by +1 per send or copy and -1 per delivery or loss of a queued copy;
  // the same moves are kept per receiver, with a histogram of inbox sizes for the running max.
  std::int64_t depth = 0;
  std::map<AgentId, std::int64_t> inbox;
  std::map<std::int64_t, std::uint64_t> inbox_sizes;
  auto move_inbox = [&](AgentId to, std::int64_t by) {
    auto& n = inbox[to];
    if (n > 0 && --inbox_sizes[n] == 0) {
      inbox_sizes.erase(n);
    }
    n += by;
    if (n > 0) {
      ++inbox_sizes[n];
    }
  };
  std::size_t at = 0;
  const auto& recs = log.records();
  for (auto& slot : m.per_tick) {
    for (; at < recs.size() && recs[at].tick == slot.tick; ++at) {
      const auto& r = recs[at];
      switch (r.kind) {
        case EventKind::kSend:
          ++m.sends;
          ++depth;
          move_inbox(r.to, +1);
          break;
        case EventKind::kDup:
          ++m.duplicates;
          ++depth;
          move_inbox(r.to, +1);
          break;
        case EventKind::kDeliver:
          ++m.deliveries;
          ++slot.throughput;
          --depth;
          move_inbox(r.to, -1);
          ++m.latency_histogram[r.tick - r.sent_at];
          break;
        case EventKind::kDrop:
          ++m.drops;
          ++slot.drops;
          // Refusals before the send record (send_id 0) never entered the channel.
          if (r.queued || r.send_id != 0) {
            --depth;
            move_inbox(r.to, -1);
          }
          break;
        default:
          break;
      }
    }
    slot.queue_depth = static_cast<std::uint64_t>(std::max<std::int64_t>(depth, 0));
    slot.max_inbox = inbox_sizes.empty() ? 0 : static_cast<std::uint64_t>(inbox_sizes.rbegin()->first);
    m.max_queue_depth = std::max(m.max_queue_depth, slot.queue_depth);
    m.max_inbox_depth = std::max(m.max_inbox_depth, slot.max_inbox);
  }
  m.mean_throughput = static_cast<double>(m.deliveries) / static_cast<double>(m.per_tick.size());
  m.median_latency = latency_percentile(m.latency_histogram, 0.5);
  m.p95_latency = latency_percentile(m.latency_histogram, 0.95);
  m.p99_latency = latency_percentile(m.latency_histogram, 0.99);
  m.max_latency = m.latency_histogram.empty() ? 0 : static_cast<double>(m.latency_histogram.rbegin()->first);
  return m;
}

std::string metrics_csv(const MetricsReport& m) {
  std::ostringstream os;
  os << "tick,queue_depth_msgs,max_inbox_msgs,throughput_msgs_per_tick,drops_msgs\n";
  for (const auto& t : m.per_tick) {
    os << t.tick << ',' << t.queue_depth << ',' << t.max_inbox << ',' << t.throughput << ',' << t.drops << '\n';
  }
  return os.str();
}

}  // namespace muacp::simnet
