#include "muacp/agent.hpp"

#include <algorithm>

namespace muacp::agent {

using wire::flag::kError;
using wire::flag::kResponse;
using wire::Message;
using wire::OptionType;
using wire::Verb;

namespace {

bool at_least_once(const Message& m) {
  return m.header.qos == static_cast<std::uint8_t>(wire::QoS::kAtLeastOnce);
}

std::uint8_t content_type_of(const Message& m) {
  const auto* ct = m.find(OptionType::kContentType);
  return (ct != nullptr && ct->value.size() == 1) ? ct->value[0] : wire::content_type::kLiteral;
}

}  // namespace

wire::Message literal_message(Verb verb, const std::string& literal, std::uint8_t content_type) {
  Message m;
  m.header.verb = verb;
  m.payload = wire::to_bytes(literal);
  m.add(OptionType::kContentType, {content_type});
  return m;
}

std::optional<std::string> topic_of(const Message& m) {
  if (const auto* t = m.find(OptionType::kTopic); t != nullptr && !t->value.empty()) {
    return wire::to_string(t->value);
  }
  if (!m.payload.empty() && content_type_of(m) == wire::content_type::kTopic) {
    return wire::to_string(m.payload);
  }
  return std::nullopt;
}

Agent::Agent(AgentId id, resources::ResourceBudget budget, AgentConfig config)
    : id_(id), config_(std::move(config)), budget_(std::move(budget)) {
  if (config_.history_capacity == 0) {
    throw Error("history capacity must be positive");
  }
}

resources::ResourceVector Agent::step_cost(const Message& m) const {
  const std::size_t size = wire::validate(m).ok() ? wire::wire_size(m) : wire::kMinMessageBytes;
  return resources::consumption(config_.cost_model, size);
}

bool Agent::try_charge(const Message& m) {
  const auto cost = step_cost(m);
  if (!budget_.feasible(cost)) {
    return false;
  }
  // Buffer memory is held only for the duration of the step.
  budget_.charge(cost);
  budget_.refund_memory(cost.memory);
  return true;
}

SendResult Agent::send(const Message& m, AgentId to, Tick now) {
  if (to == id_ || !wire::validate(m).ok()) {
    return {StepStatus::kMalformed, std::nullopt};
  }
  if (!try_charge(m)) {
    return {StepStatus::kInfeasible, std::nullopt};
  }
  TransitionLabel label{id_, to, m, 0};
  record_send(label, now);
  return {StepStatus::kOk, std::move(label)};
}

ReceiveResult Agent::receive(const TransitionLabel& label, Tick now) {
  if (!try_charge(label.message)) {
    ++dropped_;
    return {StepStatus::kInfeasible, {}, false};
  }
  return apply(label, now);
}

TimerResult Agent::fire_timers(Tick now) {
  TimerResult r = expire_timers(now);
  std::vector<Outgoing> sent;
  for (auto& out : r.retransmissions) {
    if (try_charge(out.message)) {
      remember(Direction::kSent, out.to, out.message, now);
      sent.push_back(std::move(out));
    }
  }
  r.retransmissions = std::move(sent);
  return r;
}

void Agent::remember(Direction d, AgentId peer, const Message& m, Tick now) {
  if (history_.size() == config_.history_capacity) {
    history_.pop_front();
  }
  history_.push_back(HistoryEntry{d, peer, m, now});
}

std::uint32_t Agent::arm(Tick deadline) {
  const std::uint32_t id = next_timer_++;
  timers_[id] = deadline;
  return id;
}

void Agent::record_send(const TransitionLabel& label, Tick now) {
  const Message& m = label.message;
  remember(Direction::kSent, label.receiver, m, now);
  if (m.header.has_flag(kResponse)) {
    return;
  }
  if (m.header.verb == Verb::kAsk) {
    const auto key = std::make_pair(label.receiver, m.header.correlation_id);
    if (auto it = pending_.find(key); it != pending_.end()) {
      timers_.erase(it->second.timer);
      pending_.erase(it);
    }
    const Tick deadline = now + config_.ask_timeout;
    pending_.emplace(key, PendingAsk{label.receiver, wire::to_string(m.payload), deadline, arm(deadline)});
  }
  if (at_least_once(m)) {
    const Tick next = now + config_.retry_interval;
    const Tick give_up = config_.retry_limit > 0 ? now + config_.retry_limit : 0;
    retransmit_.push_back(Retransmission{label.receiver, m, next, give_up, arm(next)});
  }
}

void Agent::clear_acknowledged(AgentId peer, std::uint16_t acked_message_id) {
  auto it = std::remove_if(retransmit_.begin(), retransmit_.end(), [&](const Retransmission& r) {
    if (r.to == peer && r.message.header.message_id == acked_message_id) {
      timers_.erase(r.timer);
      return true;
    }
    return false;
  });
  retransmit_.erase(it, retransmit_.end());
}

Message Agent::make_message(Verb verb) {
  Message m;
  m.header.verb = verb;
  m.header.message_id = next_message_id_++;
  m.header.sequence = next_sequence_++;
  return m;
}

std::uint16_t Agent::next_correlation_id() {
  return next_cid_++;
}

Message Agent::make_reply(const Message& request, Verb verb) {
  Message m;
  m.header.verb = verb;
  m.header.flags = kResponse;
  m.header.message_id = next_message_id_++;
  m.header.sequence = request.header.message_id;
  m.header.correlation_id = request.header.correlation_id;
  return m;
}

Message Agent::error_reply(const Message& request, std::uint8_t code) {
  Message m = make_reply(request, Verb::kPing);
  m.header.flags |= kError;
  Bytes err{code};
  const auto id = wire::be16(request.header.message_id);
  err.insert(err.end(), id.begin(), id.end());
  m.add(OptionType::kErr, std::move(err));
  return m;
}

ReceiveResult Agent::apply(const TransitionLabel& label, Tick now) {
  const Message& m = label.message;
  const AgentId from = label.sender;
  remember(Direction::kReceived, from, m, now);

  ReceiveResult r;
  const bool is_response = m.header.has_flag(kResponse);
  if (!wire::validate(m).ok()) {
    r.status = StepStatus::kMalformed;
    if (!is_response) {
      r.replies.push_back({from, error_reply(m, err_code::kNotUnderstood)});
    }
    return r;
  }

  const auto* err = m.find(OptionType::kErr);
  const bool procedural = m.find(OptionType::kProc) != nullptr;

  if (is_response) {
    clear_acknowledged(from, m.header.sequence);
    if (m.header.verb == Verb::kTell) {
      const auto key = std::make_pair(from, m.header.correlation_id);
      if (auto it = pending_.find(key); it != pending_.end()) {
        timers_.erase(it->second.timer);
        pending_.erase(it);
        answers_.push_back(Answer{from, m.header.correlation_id, wire::to_string(m.payload), err != nullptr});
      }
      if (err == nullptr && !procedural) {
        if (auto lit = parse_literal(wire::to_string(m.payload))) {
          kb_.insert(*lit);
        }
      }
    } else if (m.header.verb == Verb::kPing && err != nullptr && err->value.size() >= 3) {
      error_notices_.push_back(ErrorNotice{from, static_cast<std::uint16_t>((err->value[1] << 8) | err->value[2]),
                                           err->value[0]});
    }
    r.procedural = procedural;
    return r;
  }

  switch (m.header.verb) {
    case Verb::kPing:
      if (err != nullptr) {
        const std::uint16_t orig =
            err->value.size() >= 3 ? static_cast<std::uint16_t>((err->value[1] << 8) | err->value[2]) : 0;
        error_notices_.push_back(ErrorNotice{from, orig, err->value.empty() ? std::uint8_t{0} : err->value[0]});
      } else {
        r.replies.push_back({from, make_reply(m, Verb::kPing)});
      }
      break;

    case Verb::kTell:
      if (procedural) {
        r.procedural = true;
      } else if (auto lit = parse_literal(wire::to_string(m.payload))) {
        kb_.insert(*lit);
      } else {
        r.replies.push_back({from, error_reply(m, err_code::kBadContent)});
      }
      break;

    case Verb::kAsk: {
      if (procedural) {
        r.procedural = true;
        break;
      }
      auto lit = parse_literal(wire::to_string(m.payload));
      if (!lit) {
        r.replies.push_back({from, error_reply(m, err_code::kBadContent)});
        break;
      }
      Message answer = make_reply(m, Verb::kTell);
      if (content_type_of(m) == wire::content_type::kAction) {
        // Requested actions always succeed in this model; the effect is the done() fact.
        const Literal done = done_of(*lit);
        kb_.insert(done);
        answer.payload = wire::to_bytes(done.to_string());
        answer.add(OptionType::kContentType, {wire::content_type::kLiteral});
      } else if (kb_.contains(*lit)) {
        answer.payload = wire::to_bytes(lit->to_string());
        answer.add(OptionType::kContentType, {wire::content_type::kLiteral});
      } else if (kb_.contains(lit->negation())) {
        answer.payload = wire::to_bytes(lit->negation().to_string());
        answer.add(OptionType::kContentType, {wire::content_type::kLiteral});
      } else {
        answer.payload = wire::to_bytes(lit->to_string());
        answer.add(OptionType::kErr, {err_code::kUnknown});
      }
      r.replies.push_back({from, std::move(answer)});
      break;
    }

    case Verb::kObserve: {
      const auto topic = topic_of(m);
      if (!topic) {
        r.replies.push_back({from, error_reply(m, err_code::kBadContent)});
        break;
      }
      subscriptions_[*topic].insert(from);
      break;
    }
  }

  if (at_least_once(m) && r.replies.empty()) {
    r.replies.push_back({from, make_reply(m, Verb::kPing)});
  }
  return r;
}

TimerResult Agent::expire_timers(Tick now) {
  TimerResult r;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second.deadline > now) {
      ++it;
      continue;
    }
    const auto [peer, cid] = it->first;
    Message notice;
    notice.header.verb = Verb::kTell;
    notice.header.flags = kResponse | kError;
    notice.header.correlation_id = cid;
    notice.payload = wire::to_bytes("unknown");
    notice.add(OptionType::kErr, {err_code::kTimeout});
    r.notices.push_back(std::move(notice));
    timers_.erase(it->second.timer);
    // An unanswered ASK is no longer worth retransmitting.
    auto rt = std::remove_if(retransmit_.begin(), retransmit_.end(), [&](const Retransmission& x) {
      if (x.to == peer && x.message.header.verb == Verb::kAsk && x.message.header.correlation_id == cid) {
        timers_.erase(x.timer);
        return true;
      }
      return false;
    });
    retransmit_.erase(rt, retransmit_.end());
    it = pending_.erase(it);
  }

  for (auto it = retransmit_.begin(); it != retransmit_.end();) {
    if (it->next_retry > now) {
      ++it;
      continue;
    }
    if (it->give_up != 0 && now >= it->give_up) {
      timers_.erase(it->timer);
      it = retransmit_.erase(it);
      continue;
    }
    r.retransmissions.push_back({it->to, it->message});
    it->next_retry = now + config_.retry_interval;
    timers_[it->timer] = it->next_retry;
    ++it;
  }
  return r;
}

std::vector<Outgoing> Agent::publish(const std::string& topic, const Literal& event) {
  std::vector<Outgoing> out;
  const auto it = subscriptions_.find(topic);
  if (it == subscriptions_.end()) {
    return out;
  }
  for (AgentId sub : it->second) {
    Message m = make_message(Verb::kTell);
    m.payload = wire::to_bytes(event.to_string());
    m.add(OptionType::kContentType, {wire::content_type::kLiteral});
    m.add(OptionType::kTopic, wire::to_bytes(topic));
    out.push_back({sub, std::move(m)});
  }
  return out;
}

}  // namespace muacp::agent
