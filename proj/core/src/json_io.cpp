// Every JSON reader and writer of the library lives here so the JSON header is compiled once.

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "json_support.hpp"
#include "muacp/compression.hpp"
#include "muacp/consensus.hpp"
#include "muacp/fipa.hpp"
#include "muacp/resources.hpp"
#include "muacp/simnet.hpp"
#include "muacp/workload.hpp"

namespace muacp {

namespace json_support {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace json_support

namespace {

using nlohmann::json;

json parse(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string(what) + ": invalid JSON: " + e.what());
  }
}

void require_object(const json& j, std::string_view what, const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    throw Error(std::string(what) + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (allowed.count(key) == 0) {
      throw Error(std::string(what) + ": unknown key \"" + key + "\"");
    }
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, std::string_view what) {
  const auto it = j.find(key);
  if (it == j.end()) {
    return fallback;
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(std::string(what) + ": bad value for \"" + key + "\"");
  }
}

resources::CostModel cost_model_from(const json& j) {
  require_object(j, "cost model",
                 {"per_byte_bandwidth", "per_byte_cpu", "per_message_cpu", "per_byte_energy", "per_message_energy",
                  "buffer_memory"});
  resources::CostModel m;
  const char* w = "cost model";
  m.per_byte_bandwidth = get_or(j, "per_byte_bandwidth", m.per_byte_bandwidth, w);
  m.per_byte_cpu = get_or(j, "per_byte_cpu", m.per_byte_cpu, w);
  m.per_message_cpu = get_or(j, "per_message_cpu", m.per_message_cpu, w);
  m.per_byte_energy = get_or(j, "per_byte_energy", m.per_byte_energy, w);
  m.per_message_energy = get_or(j, "per_message_energy", m.per_message_energy, w);
  m.buffer_memory = get_or(j, "buffer_memory", m.buffer_memory, w);
  if (!m.valid()) {
    throw Error("cost model: coefficients must be finite and non-negative");
  }
  return m;
}

json cost_model_json(const resources::CostModel& m) {
  return json{{"per_byte_bandwidth", m.per_byte_bandwidth}, {"per_byte_cpu", m.per_byte_cpu},
              {"per_message_cpu", m.per_message_cpu},       {"per_byte_energy", m.per_byte_energy},
              {"per_message_energy", m.per_message_energy}, {"buffer_memory", m.buffer_memory}};
}

AgentId agent_of(const json& j, std::string_view what) {
  if (!j.is_number_unsigned()) {
    throw Error(std::string(what) + ": agent ids are unsigned integers");
  }
  return AgentId{j.get<std::uint32_t>()};
}

std::vector<simnet::CrashEvent> fault_schedule_from(const json& j, const char* w) {
  if (!j.is_array()) {
    throw Error(std::string(w) + ": fault_schedule must be an array");
  }
  std::vector<simnet::CrashEvent> out;
  for (const auto& e : j) {
    simnet::CrashEvent ce;
    if (e.is_array() && e.size() == 2) {
      ce.agent = agent_of(e[0], w);
      ce.at = e[1].get<Tick>();
    } else {
      require_object(e, "fault_schedule entry", {"agent", "crash_tick", "recover_tick"});
      ce.agent = agent_of(e.at("agent"), w);
      ce.at = e.at("crash_tick").get<Tick>();
      if (e.contains("recover_tick")) {
        ce.recover_at = e.at("recover_tick").get<Tick>();
      }
    }
    out.push_back(ce);
  }
  return out;
}

simnet::SimConfig sim_config_from(const json& j) {
  const char* w = "sim config";
  require_object(j, w,
                 {"gst", "delta", "drop_rate", "dup_rate", "delay_range", "seed", "rate_cap", "fault_schedule",
                  "omissions", "max_consecutive_drops", "cost_model", "log_wire", "record_usage"});
  simnet::SimConfig c;
  c.gst = get_or<Tick>(j, "gst", c.gst, w);
  c.delta = get_or<Tick>(j, "delta", c.delta, w);
  c.drop_rate = get_or(j, "drop_rate", c.drop_rate, w);
  c.dup_rate = get_or(j, "dup_rate", c.dup_rate, w);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, w);
  c.rate_cap = get_or<std::uint32_t>(j, "rate_cap", c.rate_cap, w);
  c.max_consecutive_drops = get_or<std::uint32_t>(j, "max_consecutive_drops", c.max_consecutive_drops, w);
  c.log_wire = get_or(j, "log_wire", c.log_wire, w);
  c.record_usage = get_or(j, "record_usage", c.record_usage, w);
  if (auto it = j.find("delay_range"); it != j.end()) {
    if (!it->is_array() || it->size() != 2) {
      throw Error("sim config: delay_range must be [min, max]");
    }
    c.delay_min = (*it)[0].get<Tick>();
    c.delay_max = (*it)[1].get<Tick>();
  }
  if (auto it = j.find("cost_model"); it != j.end()) {
    c.cost_model = cost_model_from(*it);
  }
  if (auto it = j.find("fault_schedule"); it != j.end()) {
    c.fault_schedule = fault_schedule_from(*it, w);
  }
  if (auto it = j.find("omissions"); it != j.end()) {
    for (const auto& e : *it) {
      require_object(e, "omission", {"from", "to", "start", "end"});
      c.omissions.push_back(simnet::Omission{agent_of(e.at("from"), w), agent_of(e.at("to"), w),
                                             e.at("start").get<Tick>(), e.at("end").get<Tick>()});
    }
  }
  c.validate();
  return c;
}

}  // namespace

// ---- resources ----

namespace resources {

CostModel cost_model_from_json(std::string_view text) {
  return cost_model_from(parse(text, "cost model"));
}

CostModel load_cost_model(const std::filesystem::path& path) {
  return cost_model_from_json(json_support::read_file(path));
}

std::string cost_model_to_json(const CostModel& model) {
  return cost_model_json(model).dump(2);
}

}  // namespace resources

// ---- simnet ----

namespace simnet {

SimConfig sim_config_from_json(std::string_view text) {
  try {
    return sim_config_from(parse(text, "sim config"));
  } catch (const json::exception& e) {
    throw Error(std::string("sim config: ") + e.what());
  }
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return sim_config_from_json(json_support::read_file(path));
}

std::string metrics_summary_json(const MetricsReport& m, double tick_ms) {
  json hist = json::object();
  for (const auto& [lat, count] : m.latency_histogram) {
    hist[std::to_string(lat)] = count;
  }
  json j{{"tick_ms", tick_ms},
         {"sends", m.sends},
         {"deliveries", m.deliveries},
         {"drops", m.drops},
         {"duplicates", m.duplicates},
         {"max_queue_depth", m.max_queue_depth},
         {"max_inbox_depth", m.max_inbox_depth},
         {"mean_throughput", m.mean_throughput},
         {"median_ms", m.median_latency * tick_ms},
         {"p95_ms", m.p95_latency * tick_ms},
         {"p99_ms", m.p99_latency * tick_ms},
         {"max_ms", m.max_latency * tick_ms},
         {"latency_histogram_ticks", hist}};
  return j.dump(2) + "\n";
}

}  // namespace simnet

// ---- fipa ----

namespace fipa {

namespace {

ConversationAutomaton automaton_from(const json& j) {
  const char* w = "automaton";
  require_object(j, w, {"name", "states", "initial", "accepting", "transitions", "nesting_depth", "description"});
  ConversationAutomaton a;
  a.name = get_or<std::string>(j, "name", "", w);
  a.nesting_depth = get_or<std::uint32_t>(j, "nesting_depth", 1, w);
  std::map<std::string, std::uint32_t> index;
  for (const auto& s : j.at("states")) {
    const auto name = s.get<std::string>();
    if (!index.emplace(name, static_cast<std::uint32_t>(a.states.size())).second) {
      throw Error("automaton: duplicate state " + name);
    }
    a.states.push_back(name);
  }
  auto state = [&](const json& v) {
    const auto name = v.get<std::string>();
    auto it = index.find(name);
    if (it == index.end()) {
      throw Error("automaton: unknown state " + name);
    }
    return it->second;
  };
  a.initial = state(j.at("initial"));
  for (const auto& q : j.at("accepting")) {
    a.accepting.insert(state(q));
  }
  for (const auto& t : j.at("transitions")) {
    require_object(t, "transition",
                   {"from", "performative", "sender_role", "receiver_role", "to", "conversation", "content"});
    Transition tr;
    tr.from = state(t.at("from"));
    tr.to = state(t.at("to"));
    const auto perf = t.at("performative").get<std::string>();
    auto p = performative_from_name(perf);
    if (!p) {
      throw Error("automaton: unknown performative " + perf);
    }
    tr.performative = *p;
    tr.sender_role = t.at("sender_role").get<std::string>();
    tr.receiver_role = t.at("receiver_role").get<std::string>();
    tr.conversation = get_or<std::uint32_t>(t, "conversation", 0, "transition");
    tr.content = get_or<std::string>(t, "content", "", "transition");
    a.transitions.push_back(std::move(tr));
  }
  a.validate();
  return a;
}

}  // namespace

ConversationAutomaton automaton_from_json(std::string_view text) {
  try {
    return automaton_from(parse(text, "automaton"));
  } catch (const json::exception& e) {
    throw Error(std::string("automaton: ") + e.what());
  }
}

ConversationAutomaton load_automaton(const std::filesystem::path& path) {
  return automaton_from_json(json_support::read_file(path));
}

std::string automaton_to_json(const ConversationAutomaton& a) {
  json states = json::array();
  for (const auto& s : a.states) {
    states.push_back(s);
  }
  json accepting = json::array();
  for (auto q : a.accepting) {
    accepting.push_back(a.states.at(q));
  }
  json transitions = json::array();
  for (const auto& t : a.transitions) {
    json jt{{"from", a.states.at(t.from)},
            {"performative", std::string(performative_name(t.performative))},
            {"sender_role", t.sender_role},
            {"receiver_role", t.receiver_role},
            {"to", a.states.at(t.to)}};
    if (t.conversation != 0) {
      jt["conversation"] = t.conversation;
    }
    if (!t.content.empty()) {
      jt["content"] = t.content;
    }
    transitions.push_back(std::move(jt));
  }
  json j{{"name", a.name},
         {"states", states},
         {"initial", a.states.at(a.initial)},
         {"accepting", accepting},
         {"nesting_depth", a.nesting_depth},
         {"transitions", transitions}};
  return j.dump(2) + "\n";
}

}  // namespace fipa

// ---- consensus ----

namespace consensus {

namespace {

std::vector<std::uint64_t> seeds_from(const json& j) {
  std::vector<std::uint64_t> seeds;
  if (j.is_array()) {
    for (const auto& s : j) {
      seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    // {"first": a, "count": k} expands to a, a+1, ..., a+k-1.
    require_object(j, "seeds", {"first", "count"});
    const auto first = j.at("first").get<std::uint64_t>();
    const auto count = j.at("count").get<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) {
      seeds.push_back(first + i);
    }
  }
  if (seeds.empty()) {
    throw Error("campaign: empty seed list");
  }
  return seeds;
}

CampaignConfig campaign_from(const json& j) {
  const char* w = "campaign";
  require_object(j, w,
                 {"n", "proposers", "values", "crashes", "crash_window", "fault_schedule", "drop_rate", "dup_rate",
                  "gst", "delta", "delay_range", "seeds", "max_ticks", "liveness_ceiling", "fd", "retry_timeout",
                  "stop_when_decided", "description"});
  CampaignConfig c;
  c.n = get_or<std::uint32_t>(j, "n", c.n, w);
  c.proposers = get_or<std::uint32_t>(j, "proposers", c.proposers, w);
  c.values = get_or<std::vector<std::string>>(j, "values", c.values, w);
  c.crashes = get_or<std::uint32_t>(j, "crashes", c.crashes, w);
  c.drop_rate = get_or(j, "drop_rate", c.drop_rate, w);
  c.dup_rate = get_or(j, "dup_rate", c.dup_rate, w);
  c.gst = get_or<Tick>(j, "gst", c.gst, w);
  c.delta = get_or<Tick>(j, "delta", c.delta, w);
  c.max_ticks = get_or<Tick>(j, "max_ticks", c.max_ticks, w);
  c.liveness_ceiling = get_or<Tick>(j, "liveness_ceiling", c.liveness_ceiling, w);
  c.retry_timeout = get_or<Tick>(j, "retry_timeout", c.retry_timeout, w);
  c.stop_when_decided = get_or(j, "stop_when_decided", c.stop_when_decided, w);
  if (auto it = j.find("crash_window"); it != j.end()) {
    if (!it->is_array() || it->size() != 2) {
      throw Error("campaign: crash_window must be [start, end]");
    }
    c.crash_window_start = (*it)[0].get<Tick>();
    c.crash_window_end = (*it)[1].get<Tick>();
  }
  if (auto it = j.find("delay_range"); it != j.end()) {
    if (!it->is_array() || it->size() != 2) {
      throw Error("campaign: delay_range must be [min, max]");
    }
    c.delay_min = (*it)[0].get<Tick>();
    c.delay_max = (*it)[1].get<Tick>();
  }
  if (auto it = j.find("fault_schedule"); it != j.end()) {
    c.fault_schedule = fault_schedule_from(*it, w);
  }
  if (auto it = j.find("seeds"); it != j.end()) {
    c.seeds = seeds_from(*it);
  }
  if (auto it = j.find("fd"); it != j.end()) {
    require_object(*it, "fd", {"initial_timeout", "max_timeout", "ping_interval"});
    c.fd.initial_timeout = get_or<Tick>(*it, "initial_timeout", c.fd.initial_timeout, "fd");
    c.fd.max_timeout = get_or<Tick>(*it, "max_timeout", c.fd.max_timeout, "fd");
    c.fd.ping_interval = get_or<Tick>(*it, "ping_interval", c.fd.ping_interval, "fd");
  }
  if (c.n < 1 || c.n > 64) {
    throw Error("campaign: n must be in [1, 64]");
  }
  if (c.crashes >= c.n) {
    throw Error("campaign: crashes must be fewer than n");
  }
  if (c.fd.initial_timeout < 1 || c.fd.max_timeout < c.fd.initial_timeout) {
    throw Error("campaign: need 1 <= fd.initial_timeout <= fd.max_timeout");
  }
  // Surfaces range errors in rates, delays and the fault schedule now rather than per seed.
  (void)c.decree_for(c.seeds.front());
  return c;
}

std::string hex_or_text(const Bytes& b) {
  const bool printable = std::all_of(b.begin(), b.end(), [](std::uint8_t c) { return c >= 0x20 && c < 0x7F; });
  return printable ? std::string(b.begin(), b.end()) : "0x" + wire::to_hex(b);
}

}  // namespace

CampaignConfig campaign_from_json(std::string_view text) {
  try {
    return campaign_from(parse(text, "campaign"));
  } catch (const json::exception& e) {
    throw Error(std::string("campaign: ") + e.what());
  }
}

CampaignConfig load_campaign(const std::filesystem::path& path) {
  return campaign_from_json(json_support::read_file(path));
}

std::string outcome_to_json(const DecreeOutcome& o, std::uint64_t seed) {
  json decided = json::object();
  for (const auto& [id, v] : o.decided) {
    decided[std::to_string(id.value)] = v ? json(hex_or_text(*v)) : json(nullptr);
  }
  json decided_at = json::object();
  for (const auto& [id, t] : o.decided_at) {
    decided_at[std::to_string(id.value)] = t;
  }
  json crashed = json::array();
  for (auto id : o.crashed) {
    crashed.push_back(id.value);
  }
  json chosen = json::array();
  for (const auto& [b, v] : o.chosen) {
    chosen.push_back(json{{"round", b.round}, {"proposer", b.proposer}, {"value", hex_or_text(v)}});
  }
  json j{{"seed", seed},
         {"decided", decided},
         {"decided_at_tick", decided_at},
         {"crashed", crashed},
         {"messages", o.messages},
         {"paxos_messages", o.paxos_messages},
         {"total_messages", o.total_messages},
         {"chosen", chosen},
         {"agreement", o.agreement},
         {"validity", o.validity},
         {"all_survivors_decided", o.all_survivors_decided},
         {"last_decision_tick", o.last_decision ? json(*o.last_decision) : json(nullptr)},
         {"ticks_run", o.ticks_run},
         {"budget_ok", o.budget_ok}};
  return j.dump();
}

}  // namespace consensus

// ---- compression ----

namespace compression {

namespace {

MessageDistribution distribution_from(const json& j) {
  const char* w = "distribution";
  require_object(j, w, {"name", "support", "description"});
  MessageDistribution d;
  d.name = get_or<std::string>(j, "name", "", w);
  const auto& support = j.at("support");
  if (!support.is_array()) {
    throw Error("distribution: support must be an array");
  }
  for (const auto& e : support) {
    require_object(e, "support entry", {"verb", "options", "payload", "payload_hex", "p"});
    AbstractMessage m;
    const auto verb = e.at("verb").get<std::string>();
    auto v = wire::verb_from_name(verb);
    if (!v) {
      throw Error("distribution: unknown verb " + verb);
    }
    m.verb = *v;
    if (auto it = e.find("options"); it != e.end()) {
      for (const auto& o : *it) {
        require_object(o, "option shape", {"type", "length"});
        OptionShape s;
        const auto& t = o.at("type");
        if (t.is_string()) {
          auto ot = wire::option_from_name(t.get<std::string>());
          if (!ot) {
            throw Error("distribution: unknown option type " + t.get<std::string>());
          }
          s.type = static_cast<std::uint8_t>(*ot);
        } else {
          s.type = t.get<std::uint8_t>();
        }
        s.length = o.at("length").get<std::uint16_t>();
        m.options.push_back(s);
      }
    }
    if (e.contains("payload") && e.contains("payload_hex")) {
      throw Error("distribution: give payload or payload_hex, not both");
    }
    if (auto it = e.find("payload"); it != e.end()) {
      const auto text = it->get<std::string>();
      m.payload.assign(text.begin(), text.end());
    }
    if (auto it = e.find("payload_hex"); it != e.end()) {
      m.payload = wire::from_hex(it->get<std::string>());
    }
    d.support.emplace_back(std::move(m), e.at("p").get<double>());
  }
  d.validate();
  return d;
}

}  // namespace

MessageDistribution distribution_from_json(std::string_view text) {
  try {
    return distribution_from(parse(text, "distribution"));
  } catch (const json::exception& e) {
    throw Error(std::string("distribution: ") + e.what());
  }
}

MessageDistribution load_distribution(const std::filesystem::path& path) {
  return distribution_from_json(json_support::read_file(path));
}

std::string distribution_to_json(const MessageDistribution& d) {
  json support = json::array();
  for (const auto& [m, p] : d.support) {
    json options = json::array();
    for (const auto& o : m.options) {
      const auto name = wire::option_name(static_cast<wire::OptionType>(o.type));
      options.push_back(json{{"type", name.empty() ? json(o.type) : json(std::string(name))}, {"length", o.length}});
    }
    support.push_back(json{{"verb", std::string(wire::verb_name(m.verb))},
                           {"options", options},
                           {"payload_hex", wire::to_hex(m.payload)},
                           {"p", p}});
  }
  return json{{"name", d.name}, {"support", support}}.dump(2) + "\n";
}

std::string bound_report_to_json(const BoundReport& r) {
  json j{{"name", r.name},
         {"support_size", r.support},
         {"h_v_bits", r.entropy.h_v},
         {"h_o_given_v_bits", r.entropy.h_o_given_v},
         {"h_p_given_vo_bits", r.entropy.h_p_given_vo},
         {"h_total_bits", r.entropy.h_total},
         {"l_v_bits", r.l_v},
         {"l_o_given_v_bits", r.l_o_given_v},
         {"l_p_given_vo_bits", r.l_p_given_vo},
         {"h_hdr_bits", r.h_hdr},
         {"option_index_bits", r.index_bits},
         {"slack_constant_bits", r.slack_constant},
         {"encoder_expected_bits", r.encoder_bits},
         {"bound_bits", r.bound_bits},
         {"bound_margin_bits", r.bound_bits - r.encoder_bits},
         {"holds", r.holds()},
         {"huffman_tables", r.tables_built},
         {"huffman_tables_ok", r.tables_ok},
         {"wire_expected_bits", r.wire_bits},
         {"alignment_slack_bits", r.alignment_slack_bits},
         {"wire_verb_bits", r.wire_verb_bits},
         {"expected_option_count", r.expected_options},
         {"refined_bound_bits", r.refined_bound_bits}};
  return j.dump(2) + "\n";
}

}  // namespace compression

// ---- workload ----

namespace workload {

ScaleConfig scale_config_from_json(std::string_view text) {
  const json j = parse(text, "scale config");
  const char* w = "scale config";
  require_object(j, w,
                 {"agent_counts", "max_agents", "conversations_per_agent", "initiation_window",
                  "contract_net_fraction", "bidders", "retry_interval", "max_ticks", "sim", "description"});
  ScaleConfig c;
  if (auto it = j.find("agent_counts"); it != j.end()) {
    if (!it->is_array()) {
      throw Error("scale config: agent_counts must be an array");
    }
    c.agent_counts.clear();
    for (const auto& v : *it) {
      if (!v.is_number_unsigned()) {
        throw Error("scale config: agent counts are unsigned integers");
      }
      c.agent_counts.push_back(v.get<std::size_t>());
    }
  }
  c.max_agents = get_or<std::size_t>(j, "max_agents", c.max_agents, w);
  c.conversations_per_agent = get_or<std::uint32_t>(j, "conversations_per_agent", c.conversations_per_agent, w);
  c.initiation_window = get_or<Tick>(j, "initiation_window", c.initiation_window, w);
  c.contract_net_fraction = get_or(j, "contract_net_fraction", c.contract_net_fraction, w);
  c.bidders = get_or<std::uint32_t>(j, "bidders", c.bidders, w);
  c.retry_interval = get_or<Tick>(j, "retry_interval", c.retry_interval, w);
  c.max_ticks = get_or<Tick>(j, "max_ticks", c.max_ticks, w);
  c.description = get_or<std::string>(j, "description", "", w);
  if (auto it = j.find("sim"); it != j.end()) {
    // Unspecified sim fields keep the workload defaults rather than the bare simulator ones.
    json merged = json::object();
    const simnet::SimConfig d = ScaleConfig::default_sim();
    merged["gst"] = d.gst;
    merged["delta"] = d.delta;
    merged["drop_rate"] = d.drop_rate;
    merged["dup_rate"] = d.dup_rate;
    merged["delay_range"] = json::array({d.delay_min, d.delay_max});
    merged["log_wire"] = d.log_wire;
    merged.update(*it);
    c.sim = sim_config_from(merged);
  }
  c.validate();
  return c;
}

ScaleConfig load_scale_config(const std::filesystem::path& path) {
  return scale_config_from_json(json_support::read_file(path));
}

std::string scale_report_json(const ScaleReport& r, double tick_ms) {
  json runs = json::array();
  for (const auto& run : r.runs) {
    json drop = run.last_drop_tick ? json(*run.last_drop_tick) : json(nullptr);
    runs.push_back({{"n_agents", run.n},
                    {"conversations_initiated", run.initiated},
                    {"conversations_completed", run.completed},
                    {"request_response", {{"initiated", run.request_response_initiated},
                                          {"completed", run.request_response_completed}}},
                    {"contract_net", {{"initiated", run.contract_net_initiated},
                                      {"completed", run.contract_net_completed}}},
                    {"deadlocked", run.deadlocked},
                    {"quiescent", run.quiescent},
                    {"ticks_run", run.ticks_run},
                    {"last_drop_tick", drop},
                    {"budget_ok", run.budget_ok},
                    {"max_queue_depth", run.metrics.max_queue_depth},
                    {"max_inbox_depth", run.metrics.max_inbox_depth},
                    {"mean_throughput", run.metrics.mean_throughput},
                    {"sends", run.metrics.sends},
                    {"deliveries", run.metrics.deliveries},
                    {"drops", run.metrics.drops},
                    {"median_ms", run.metrics.median_latency * tick_ms},
                    {"p95_ms", run.metrics.p95_latency * tick_ms},
                    {"p99_ms", run.metrics.p99_latency * tick_ms},
                    {"max_ms", run.metrics.max_latency * tick_ms},
                    {"conversation_p50_ms", run.conversation_p50 * tick_ms},
                    {"conversation_p99_ms", run.conversation_p99 * tick_ms},
                    {"conversation_max_ms", run.conversation_max * tick_ms}});
  }
  json j{{"tick_ms", tick_ms},
         {"runs", runs},
         {"queue_ratio", r.queue_ratio},
         {"global_queue_ratio", r.global_queue_ratio},
         {"linear_ratio", r.linear_ratio},
         {"sublinear", r.sublinear},
         {"all_complete", r.all_complete},
         {"no_deadlock", r.no_deadlock},
         {"drops_transient", r.drops_transient},
         {"latency_bounded", r.latency_bounded},
         {"budget_ok", r.budget_ok},
         {"ok", r.ok()}};
  return j.dump(2) + "\n";
}

}  // namespace workload

}  // namespace muacp
