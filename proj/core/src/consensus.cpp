#include "muacp/consensus.hpp"

#include <algorithm>
#include <limits>

#include "muacp/agent.hpp"

namespace muacp::consensus {

using wire::Message;
using wire::OptionType;
using wire::Verb;

std::string to_string(const Ballot& b) {
  return "(" + std::to_string(b.round) + "," + std::to_string(b.proposer) + ")";
}

Bytes encode_ballot(const Ballot& b) {
  Bytes out = wire::be32(b.round);
  const auto p = wire::be32(b.proposer);
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::optional<Ballot> decode_ballot(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kBallotBytes) {
    return std::nullopt;
  }
  return Ballot{*wire::read_be32(bytes.first(4)), *wire::read_be32(bytes.subspan(4))};
}

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::kPrepare:
      return "prepare";
    case Kind::kPromise:
      return "promise";
    case Kind::kAccept:
      return "accept";
    case Kind::kAccepted:
      return "accepted";
    case Kind::kNack:
      return "nack";
    case Kind::kDecide:
      return "decide";
  }
  return "?";
}

std::uint16_t prepare_cid(const Ballot& b) {
  return static_cast<std::uint16_t>(2U * b.round);
}

std::uint16_t accept_cid(const Ballot& b) {
  return static_cast<std::uint16_t>(2U * b.round + 1U);
}

Message encode(const PaxosMessage& p) {
  if (p.value.size() > kMaxValueBytes) {
    throw Malformed("value longer than " + std::to_string(kMaxValueBytes) + " bytes");
  }
  Message m;
  m.add(OptionType::kBallot, encode_ballot(p.ballot));
  switch (p.kind) {
    case Kind::kPrepare:
      m.header.verb = Verb::kAsk;
      m.header.correlation_id = prepare_cid(p.ballot);
      break;
    case Kind::kPromise:
      m.header.verb = Verb::kTell;
      m.header.flags = wire::flag::kResponse;
      m.header.correlation_id = prepare_cid(p.ballot);
      if (p.prior) {
        Bytes v = encode_ballot(p.prior->first);
        v.insert(v.end(), p.prior->second.begin(), p.prior->second.end());
        m.add(OptionType::kValue, std::move(v));
      }
      break;
    case Kind::kAccept:
      m.header.verb = Verb::kTell;
      m.header.correlation_id = accept_cid(p.ballot);
      m.add(OptionType::kValue, p.value);
      break;
    case Kind::kAccepted:
      m.header.verb = Verb::kTell;
      m.header.flags = wire::flag::kResponse;
      m.header.correlation_id = accept_cid(p.ballot);
      m.add(OptionType::kValue, p.value);
      break;
    case Kind::kNack:
      m.header.verb = Verb::kTell;
      m.header.flags = wire::flag::kResponse | wire::flag::kError;
      m.header.correlation_id = p.accept_phase ? accept_cid(p.rejected) : prepare_cid(p.rejected);
      m.add(OptionType::kErr, {agent::err_code::kNack});
      m.add(OptionType::kValue, encode_ballot(p.rejected));
      break;
    case Kind::kDecide:
      m.header.verb = Verb::kTell;
      m.header.correlation_id = accept_cid(p.ballot);
      m.add(OptionType::kProc, {0x01});
      m.add(OptionType::kValue, p.value);
      break;
  }
  m.add(OptionType::kConv, wire::be32(p.decree));
  return m;
}

PaxosMessage decode(const Message& m) {
  const auto* ballot = m.find(OptionType::kBallot);
  const auto* conv = m.find(OptionType::kConv);
  if (ballot == nullptr || conv == nullptr) {
    throw Malformed("missing BALLOT or CONV");
  }
  auto b = decode_ballot(ballot->value);
  auto decree = wire::read_be32(conv->value);
  if (!b || !decree || conv->value.size() != 4) {
    throw Malformed("bad BALLOT or CONV length");
  }
  PaxosMessage p;
  p.ballot = *b;
  p.decree = *decree;
  const auto* value = m.find(OptionType::kValue);
  const auto* proc = m.find(OptionType::kProc);
  const auto* err = m.find(OptionType::kErr);
  const bool response = m.header.has_flag(wire::flag::kResponse);
  const bool odd = (m.header.correlation_id & 1U) != 0;

  auto need_value = [&](std::size_t max) -> const Bytes& {
    if (value == nullptr || value->value.size() > max) {
      throw Malformed("missing or oversized VALUE");
    }
    return value->value;
  };

  if (m.header.verb == Verb::kAsk && !response && proc == nullptr && err == nullptr) {
    p.kind = Kind::kPrepare;
    return p;
  }
  if (m.header.verb != Verb::kTell) {
    throw Malformed("unexpected verb");
  }
  if (proc != nullptr) {
    if (proc->value != Bytes{0x01} || response) {
      throw Malformed("unexpected PROC");
    }
    p.kind = Kind::kDecide;
    p.value = need_value(kMaxValueBytes);
    return p;
  }
  if (!response) {
    p.kind = Kind::kAccept;
    p.value = need_value(kMaxValueBytes);
    return p;
  }
  if (err != nullptr) {
    if (err->value.empty() || err->value[0] != agent::err_code::kNack) {
      throw Malformed("unexpected ERR code");
    }
    auto rejected = decode_ballot(need_value(kBallotBytes));
    if (!rejected) {
      throw Malformed("bad refused ballot");
    }
    p.kind = Kind::kNack;
    p.rejected = *rejected;
    p.accept_phase = odd;
    return p;
  }
  if (odd) {
    p.kind = Kind::kAccepted;
    p.value = need_value(kMaxValueBytes);
    return p;
  }
  p.kind = Kind::kPromise;
  if (value != nullptr) {
    const auto& v = need_value(kBallotBytes + kMaxValueBytes);
    auto prior = decode_ballot(std::span(v).first(std::min(v.size(), kBallotBytes)));
    if (!prior) {
      throw Malformed("bad reported ballot");
    }
    p.prior = Accepted{*prior, Bytes(v.begin() + kBallotBytes, v.end())};
  }
  return p;
}

std::optional<PaxosMessage> try_decode(const Message& m) {
  try {
    return decode(m);
  } catch (const Malformed&) {
    return std::nullopt;
  }
}

Message encode_prepare(const Ballot& b, std::uint32_t decree) {
  PaxosMessage p;
  p.kind = Kind::kPrepare;
  p.ballot = b;
  p.decree = decree;
  return encode(p);
}

namespace {

Message reply_to(const Message& request, const PaxosMessage& p) {
  Message r = encode(p);
  r.header.sequence = request.header.message_id;
  return r;
}

void check_monotone(const AcceptorRecord& before, const AcceptorRecord& after) {
  if (before.promised && (!after.promised || *after.promised < *before.promised)) {
    throw Error("promised ballot decreased");
  }
}

}  // namespace

AcceptorStep on_prepare(const AcceptorRecord& acc, const Message& prepare) {
  const PaxosMessage req = decode(prepare);
  if (req.kind != Kind::kPrepare) {
    throw Malformed("not a Prepare");
  }
  AcceptorStep s{acc, {}};
  PaxosMessage out;
  out.decree = req.decree;
  if (!acc.promised || req.ballot >= *acc.promised) {
    s.next.promised = req.ballot;
    out.kind = Kind::kPromise;
    out.ballot = req.ballot;
    out.prior = acc.accepted;
  } else {
    out.kind = Kind::kNack;
    out.ballot = *acc.promised;
    out.rejected = req.ballot;
  }
  check_monotone(acc, s.next);
  s.reply = reply_to(prepare, out);
  return s;
}

AcceptorStep on_accept(const AcceptorRecord& acc, const Message& accept) {
  const PaxosMessage req = decode(accept);
  if (req.kind != Kind::kAccept) {
    throw Malformed("not an Accept");
  }
  AcceptorStep s{acc, {}};
  PaxosMessage out;
  out.decree = req.decree;
  if (!acc.promised || req.ballot >= *acc.promised) {
    s.next.promised = req.ballot;
    s.next.accepted = Accepted{req.ballot, req.value};
    out.kind = Kind::kAccepted;
    out.ballot = req.ballot;
    out.value = req.value;
  } else {
    out.kind = Kind::kNack;
    out.ballot = *acc.promised;
    out.rejected = req.ballot;
    out.accept_phase = true;
  }
  check_monotone(acc, s.next);
  s.reply = reply_to(accept, out);
  return s;
}

PaxosMessage start_ballot(ProposerRecord& p, std::uint32_t round, std::uint32_t self, std::uint32_t decree) {
  p.ballot = Ballot{round, self};
  p.max_round_seen = std::max(p.max_round_seen, round);
  p.promises.clear();
  p.accepts.clear();
  p.chosen.clear();
  p.phase = Phase::kPreparing;
  PaxosMessage m;
  m.kind = Kind::kPrepare;
  m.ballot = p.ballot;
  m.decree = decree;
  return m;
}

ProposerStep on_promise(ProposerRecord& p, std::uint32_t from, const PaxosMessage& m, std::size_t n,
                        std::uint32_t decree) {
  ProposerStep s;
  if (m.prior) {
    p.max_round_seen = std::max(p.max_round_seen, m.prior->first.round);
  }
  if (p.phase != Phase::kPreparing || m.ballot != p.ballot) {
    ++p.stale;
    return s;
  }
  p.promises[from] = m.prior;
  if (!is_quorum(p.promises.size(), n)) {
    return s;
  }
  // Adopt the value of the highest accepted ballot reported by the quorum.
  const Accepted* best = nullptr;
  for (const auto& [id, prior] : p.promises) {
    if (prior && (best == nullptr || prior->first > best->first)) {
      best = &*prior;
    }
  }
  p.chosen = best != nullptr ? best->second : p.proposal;
  p.phase = Phase::kAccepting;
  PaxosMessage a;
  a.kind = Kind::kAccept;
  a.ballot = p.ballot;
  a.decree = decree;
  a.value = p.chosen;
  s.broadcast.push_back(std::move(a));
  return s;
}

ProposerStep on_accepted(ProposerRecord& p, std::uint32_t from, const PaxosMessage& m, std::size_t n) {
  ProposerStep s;
  if (p.phase != Phase::kAccepting || m.ballot != p.ballot) {
    ++p.stale;
    return s;
  }
  p.accepts.insert(from);
  if (is_quorum(p.accepts.size(), n)) {
    p.phase = Phase::kDecided;
    s.decided = p.chosen;
  }
  return s;
}

bool on_nack(ProposerRecord& p, const PaxosMessage& m) {
  p.max_round_seen = std::max(p.max_round_seen, m.ballot.round);
  const bool live = p.phase == Phase::kPreparing || p.phase == Phase::kAccepting;
  if (!live || m.rejected != p.ballot || m.ballot <= p.ballot) {
    ++p.stale;
    return false;
  }
  p.phase = Phase::kIdle;
  return true;
}

// ---- failure detector ----

FailureDetector::FailureDetector(AgentId self, std::vector<AgentId> peers, FdConfig config)
    : self_(self), config_(config) {
  if (config_.initial_timeout < 1 || config_.max_timeout < config_.initial_timeout || config_.ping_interval < 0) {
    throw Error("failure detector timeouts must satisfy 1 <= initial <= max");
  }
  for (AgentId p : peers) {
    if (p != self) {
      peers_[p].timeout = config_.initial_timeout;
    }
  }
}

std::vector<AgentId> FailureDetector::peers() const {
  std::vector<AgentId> out;
  for (const auto& [id, p] : peers_) {
    out.push_back(id);
  }
  return out;
}

void FailureDetector::set(AgentId peer, Peer& p, bool suspected, Tick now) {
  if (p.suspected != suspected) {
    p.suspected = suspected;
    transitions_.push_back(Suspicion{now, peer, suspected});
  }
}

std::vector<AgentId> FailureDetector::step(Tick now) {
  std::vector<AgentId> due;
  for (auto& [id, p] : peers_) {
    if (p.outstanding && now - p.sent_at > p.timeout) {
      p.timed_out = p.outstanding;
      p.outstanding.reset();
      set(id, p, true, now);
      p.next_ping = now;
    }
    if (!p.outstanding && now >= p.next_ping) {
      due.push_back(id);
    }
  }
  return due;
}

void FailureDetector::sent(AgentId peer, std::uint16_t message_id, Tick now) {
  auto& p = peers_.at(peer);
  p.outstanding = message_id;
  p.sent_at = now;
}

bool FailureDetector::on_response(AgentId peer, std::uint16_t acked, Tick now) {
  auto it = peers_.find(peer);
  if (it == peers_.end()) {
    return false;
  }
  Peer& p = it->second;
  const bool current = p.outstanding && *p.outstanding == acked;
  const bool late = p.timed_out && *p.timed_out == acked;
  if (!current && !late) {
    return false;
  }
  if (current) {
    p.outstanding.reset();
    p.next_ping = now + config_.ping_interval;
  } else {
    p.timed_out.reset();
  }
  p.last_response = now;
  if (p.suspected) {
    // The suspicion was false: back off so it does not recur.
    p.timeout = std::min(2 * p.timeout, config_.max_timeout);
    set(peer, p, false, now);
  }
  return true;
}

bool FailureDetector::suspected(AgentId peer) const {
  auto it = peers_.find(peer);
  return it != peers_.end() && it->second.suspected;
}

Tick FailureDetector::timeout(AgentId peer) const {
  return peers_.at(peer).timeout;
}

void FailureDetector::reset(Tick now) {
  for (auto& [id, p] : peers_) {
    p.outstanding.reset();
    p.timed_out.reset();
    p.next_ping = now;
  }
}

}  // namespace muacp::consensus
