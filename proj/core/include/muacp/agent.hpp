#pragma once

// Operational semantics of a single agent: local state (budget, knowledge base, timers, bounded
// history) and the Send/Receive steps that the simulator drives.
//
// Reply conventions:
//  * a reply has the RESPONSE flag, carries the request's correlation_id and echoes the
//    request's message_id in `sequence`;
//  * a PING is answered by a PING reply;
//  * an ASK without PROC is answered by a TELL (the literal, its negation, or an ERR "unknown");
//  * an ASK whose CONTENT_TYPE is "action" is executed and answered with TELL(done(action));
//  * an at-least-once message that has no natural reply is acknowledged with an empty PING reply;
//  * anything malformed is answered with an ERROR-flagged PING reply carrying ERR(not-understood).

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "muacp/literal.hpp"
#include "muacp/resources.hpp"
#include "muacp/types.hpp"
#include "muacp/wire.hpp"

namespace muacp::agent {

/// First byte of an ERR option value.
namespace err_code {
inline constexpr std::uint8_t kUnknown = 0x01;
inline constexpr std::uint8_t kNotUnderstood = 0x02;
inline constexpr std::uint8_t kBadContent = 0x03;
inline constexpr std::uint8_t kNack = 0x04;
inline constexpr std::uint8_t kTimeout = 0x05;
}  // namespace err_code

/// One communication action (sender, receiver, verb, options, payload, channel).
struct TransitionLabel {
  AgentId sender;
  AgentId receiver;
  wire::Message message;
  std::uint16_t channel = 0;

  wire::Verb verb() const { return message.header.verb; }
};

enum class Direction : std::uint8_t { kSent, kReceived };

struct HistoryEntry {
  Direction direction;
  AgentId peer;
  wire::Message message;
  Tick time;
};

struct PendingAsk {
  AgentId peer;
  std::string query;
  Tick deadline;
  std::uint32_t timer;
};

struct Retransmission {
  AgentId to;
  wire::Message message;
  Tick next_retry;
  /// Give up after this tick; 0 means retry until acknowledged.
  Tick give_up;
  std::uint32_t timer;
};

/// Answer received for one of our ASKs.
struct Answer {
  AgentId from;
  std::uint16_t correlation_id;
  std::string content;
  bool unknown;
};

/// A NOT-UNDERSTOOD style notice delivered to this agent.
struct ErrorNotice {
  AgentId from;
  std::uint16_t original_message_id;
  std::uint8_t code;
};

struct AgentConfig {
  std::size_t history_capacity = 32;
  Tick ask_timeout = 50;
  Tick retry_interval = 8;
  /// Ticks after the first send at which a QoS-1 message is abandoned; 0 retries forever.
  Tick retry_limit = 0;
  resources::CostModel cost_model;
};

struct Outgoing {
  AgentId to;
  wire::Message message;
};

enum class StepStatus : std::uint8_t { kOk, kInfeasible, kMalformed };

struct SendResult {
  StepStatus status = StepStatus::kOk;
  std::optional<TransitionLabel> label;
};

struct ReceiveResult {
  StepStatus status = StepStatus::kOk;
  std::vector<Outgoing> replies;
  /// PROC-tagged messages are left to the hosting application.
  bool procedural = false;
};

struct TimerResult {
  /// Local ERROR-flagged TELL("unknown") notices for ASKs that timed out.
  std::vector<wire::Message> notices;
  std::vector<Outgoing> retransmissions;
};

class Agent {
 public:
  Agent(AgentId id, resources::ResourceBudget budget, AgentConfig config = {});

  AgentId id() const { return id_; }
  const AgentConfig& config() const { return config_; }

  // Charged steps. Each checks feasibility first and leaves the state untouched when the
  // action does not fit the remaining budget.

  SendResult send(const wire::Message& m, AgentId to, Tick now);
  ReceiveResult receive(const TransitionLabel& label, Tick now);
  /// Expires ASK deadlines and re-emits unacknowledged QoS-1 messages (charging each copy;
  /// a copy that does not fit is retried on the next expiry).
  TimerResult fire_timers(Tick now);

  // Uncharged semantic core, for hosts that account resources themselves.

  /// Appends to history and arms ASK / retransmission timers. `label.sender` must be this agent.
  void record_send(const TransitionLabel& label, Tick now);
  /// Applies verb effects and returns immediate replies.
  ReceiveResult apply(const TransitionLabel& label, Tick now);
  TimerResult expire_timers(Tick now);
  /// History entry for a copy emitted from TimerResult::retransmissions.
  void record_retransmission(const Outgoing& out, Tick now) { remember(Direction::kSent, out.to, out.message, now); }

  /// Local event on `topic`: one TELL per distinct subscriber (not yet sent).
  std::vector<Outgoing> publish(const std::string& topic, const Literal& event);

  /// Fresh message with the next message_id and sequence number.
  wire::Message make_message(wire::Verb verb);
  std::uint16_t next_correlation_id();
  /// Reply skeleton for `request` received from a peer.
  wire::Message make_reply(const wire::Message& request, wire::Verb verb);

  resources::ResourceBudget& budget() { return budget_; }
  const resources::ResourceBudget& budget() const { return budget_; }
  KnowledgeBase& kb() { return kb_; }
  const KnowledgeBase& kb() const { return kb_; }
  const std::deque<HistoryEntry>& history() const { return history_; }
  const std::map<std::pair<AgentId, std::uint16_t>, PendingAsk>& pending_asks() const { return pending_; }
  const std::map<std::uint32_t, Tick>& timers() const { return timers_; }
  const std::map<std::string, std::set<AgentId>>& subscriptions() const { return subscriptions_; }
  const std::vector<Retransmission>& retransmissions() const { return retransmit_; }
  const std::vector<Answer>& answers() const { return answers_; }
  const std::vector<ErrorNotice>& error_notices() const { return error_notices_; }
  std::uint64_t dropped_infeasible() const { return dropped_; }

 private:
  void remember(Direction d, AgentId peer, const wire::Message& m, Tick now);
  std::uint32_t arm(Tick deadline);
  void clear_acknowledged(AgentId peer, std::uint16_t acked_message_id);
  wire::Message error_reply(const wire::Message& request, std::uint8_t code);
  resources::ResourceVector step_cost(const wire::Message& m) const;
  bool try_charge(const wire::Message& m);

  AgentId id_;
  AgentConfig config_;
  resources::ResourceBudget budget_;
  KnowledgeBase kb_;
  std::deque<HistoryEntry> history_;
  std::map<std::uint32_t, Tick> timers_;
  std::map<std::pair<AgentId, std::uint16_t>, PendingAsk> pending_;
  std::vector<Retransmission> retransmit_;
  std::map<std::string, std::set<AgentId>> subscriptions_;
  std::vector<Answer> answers_;
  std::vector<ErrorNotice> error_notices_;
  std::uint16_t next_message_id_ = 1;
  std::uint16_t next_sequence_ = 1;
  std::uint16_t next_cid_ = 1;
  std::uint32_t next_timer_ = 1;
  std::uint64_t dropped_ = 0;
};

/// Message helpers shared by the translation and the agents.
wire::Message literal_message(wire::Verb verb, const std::string& literal, std::uint8_t content_type);
std::optional<std::string> topic_of(const wire::Message& m);

}  // namespace muacp::agent
