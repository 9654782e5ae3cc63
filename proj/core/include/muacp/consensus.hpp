#pragma once

// Single-decree Paxos carried entirely by the four verbs, and a PING-based failure detector.
//
// Message encoding (all carry CONV = 4-byte decree id):
//   Prepare   ASK                         BALLOT
//   Promise   TELL|RESPONSE               BALLOT [VALUE = accepted ballot (8) || accepted value]
//   Accept    TELL                        BALLOT VALUE
//   Accepted  TELL|RESPONSE               BALLOT VALUE
//   Nack      TELL|RESPONSE|ERROR ERR(nack) BALLOT = promised ballot, VALUE = refused ballot
//   Decide    TELL PROC(INFORM)           BALLOT VALUE
//
// Correlation ids pair the phases of one ballot: 2*round for Prepare/Promise and 2*round+1 for
// Accept/Accepted (mod 2^16), so a reply's phase is known without inspecting the payload.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "muacp/simnet.hpp"
#include "muacp/types.hpp"
#include "muacp/wire.hpp"

namespace muacp::consensus {

struct Ballot {
  std::uint32_t round = 0;
  std::uint32_t proposer = 0;

  friend auto operator<=>(const Ballot&, const Ballot&) = default;
};

std::string to_string(const Ballot& b);

inline constexpr std::size_t kBallotBytes = 8;
inline constexpr std::size_t kMaxValueBytes = 64;

Bytes encode_ballot(const Ballot& b);
std::optional<Ballot> decode_ballot(std::span<const std::uint8_t> bytes);

class Malformed : public Error {
 public:
  using Error::Error;
};

enum class Kind : std::uint8_t { kPrepare, kPromise, kAccept, kAccepted, kNack, kDecide };

std::string_view kind_name(Kind k);

using Accepted = std::pair<Ballot, Bytes>;

struct PaxosMessage {
  Kind kind = Kind::kPrepare;
  Ballot ballot;
  std::uint32_t decree = 0;
  /// Accept, Accepted, Decide.
  Bytes value;
  /// Promise: the acceptor's previously accepted pair, if any.
  std::optional<Accepted> prior;
  /// Nack: the ballot that was refused and whether it was an Accept (else a Prepare).
  Ballot rejected;
  bool accept_phase = false;

  friend bool operator==(const PaxosMessage&, const PaxosMessage&) = default;
};

std::uint16_t prepare_cid(const Ballot& b);
std::uint16_t accept_cid(const Ballot& b);

/// Wire form with message_id and sequence left at 0 for the sender to fill in.
wire::Message encode(const PaxosMessage& p);
/// Throws Malformed when `m` is not one of the six shapes above.
PaxosMessage decode(const wire::Message& m);
std::optional<PaxosMessage> try_decode(const wire::Message& m);

wire::Message encode_prepare(const Ballot& b, std::uint32_t decree);

// ---- acceptor ----

struct AcceptorRecord {
  std::optional<Ballot> promised;
  std::optional<Accepted> accepted;

  friend bool operator==(const AcceptorRecord&, const AcceptorRecord&) = default;
};

struct AcceptorStep {
  AcceptorRecord next;
  wire::Message reply;
};

/// Promise iff the ballot is at least the promised one (a repeated Prepare is re-promised, which
/// keeps duplicated messages harmless); nack with the promised ballot otherwise.
AcceptorStep on_prepare(const AcceptorRecord& acc, const wire::Message& prepare);
/// Accept iff the ballot is at least the promised one.
AcceptorStep on_accept(const AcceptorRecord& acc, const wire::Message& accept);

// ---- proposer ----

enum class Phase : std::uint8_t { kIdle, kPreparing, kAccepting, kDecided };

struct ProposerRecord {
  Ballot ballot;
  Bytes proposal;
  /// Value sent in Accept for the current ballot.
  Bytes chosen;
  std::map<std::uint32_t, std::optional<Accepted>> promises;
  std::set<std::uint32_t> accepts;
  Phase phase = Phase::kIdle;
  /// Highest round observed in any nack or promise.
  std::uint32_t max_round_seen = 0;
  std::uint64_t stale = 0;
};

/// Strict majority of n.
inline bool is_quorum(std::size_t count, std::size_t n) {
  return 2 * count > n;
}

struct ProposerStep {
  std::vector<PaxosMessage> broadcast;
  std::optional<Bytes> decided;
};

/// Starts the ballot (round, self) and returns the Prepare to broadcast.
PaxosMessage start_ballot(ProposerRecord& p, std::uint32_t round, std::uint32_t self, std::uint32_t decree);
ProposerStep on_promise(ProposerRecord& p, std::uint32_t from, const PaxosMessage& m, std::size_t n,
                        std::uint32_t decree);
ProposerStep on_accepted(ProposerRecord& p, std::uint32_t from, const PaxosMessage& m, std::size_t n);
/// Returns true when the nack supersedes the current ballot (the proposer goes idle).
bool on_nack(ProposerRecord& p, const PaxosMessage& m);

// ---- failure detector ----

struct FdConfig {
  Tick initial_timeout = 4;
  Tick max_timeout = 64;
  /// Minimum spacing between answered pings to one peer.
  Tick ping_interval = 0;
};

struct Suspicion {
  Tick tick;
  AgentId peer;
  bool suspected;
};

class FailureDetector {
 public:
  FailureDetector() = default;
  FailureDetector(AgentId self, std::vector<AgentId> peers, FdConfig config);

  /// Peers to ping now; marks peers whose outstanding ping has timed out as suspected.
  std::vector<AgentId> step(Tick now);
  /// Records the message id of the ping just sent to `peer`.
  void sent(AgentId peer, std::uint16_t message_id, Tick now);
  /// A PING reply echoing `acked_message_id`. Returns false when it matches no ping of ours.
  bool on_response(AgentId peer, std::uint16_t acked_message_id, Tick now);

  bool suspected(AgentId peer) const;
  Tick timeout(AgentId peer) const;
  const std::vector<Suspicion>& transitions() const { return transitions_; }
  std::vector<AgentId> peers() const;
  /// Forgets outstanding pings (after a restart).
  void reset(Tick now);

 private:
  struct Peer {
    Tick timeout = 0;
    bool suspected = false;
    std::optional<std::uint16_t> outstanding;
    Tick sent_at = 0;
    /// Id of the last ping that timed out; a late answer to it proves the suspicion false.
    std::optional<std::uint16_t> timed_out;
    Tick last_response = -1;
    Tick next_ping = 0;
  };

  void set(AgentId peer, Peer& p, bool suspected, Tick now);

  AgentId self_{0};
  FdConfig config_;
  std::map<AgentId, Peer> peers_;
  std::vector<Suspicion> transitions_;
};

/// Longest post-GST ping round trip: two channel hops of at most delta each.
inline Tick fd_round_trip_bound(const simnet::SimConfig& sim) {
  return 2 * sim.delta;
}

// ---- decree runs ----

struct DecreeConfig {
  std::uint32_t n = 3;
  /// Proposer ids with their values. Leader = lowest unsuspected proposer.
  std::vector<std::pair<AgentId, std::string>> proposers;
  simnet::SimConfig sim;
  FdConfig fd;
  std::uint32_t decree = 1;
  Tick max_ticks = 3000;
  /// A leader abandons an unfinished ballot after this many ticks.
  Tick retry_timeout = 24;
  /// Pause after a nack before the next ballot.
  Tick nack_backoff = 4;
  Tick decide_retry = 8;
  /// Acceptor state survives crash-recovery restarts.
  bool persist_acceptor = true;
  /// Stop as soon as every live participant has decided.
  bool stop_when_decided = true;
  resources::ResourceVector budget{1LL << 40, 1LL << 40, 1LL << 40, 1LL << 40};
};

struct DecreeOutcome {
  std::map<AgentId, std::optional<Bytes>> decided;
  std::map<AgentId, Tick> decided_at;
  std::set<AgentId> crashed;
  /// Messages by kind name: prepare, promise, accept, accepted, nack, decide, ping, pong, ack.
  std::map<std::string, std::uint64_t> messages;
  std::uint64_t paxos_messages = 0;
  std::uint64_t total_messages = 0;
  /// Values chosen by a majority of acceptors at one ballot, over the whole run.
  std::map<Ballot, Bytes> chosen;
  bool agreement = true;
  bool validity = true;
  bool all_survivors_decided = false;
  std::optional<Tick> last_decision;
  Tick ticks_run = 0;
  bool budget_ok = true;
  std::map<AgentId, std::vector<Suspicion>> suspicions;
  /// observer -> peer -> failure-detector timeout at the end of the run.
  std::map<AgentId, std::map<AgentId, Tick>> fd_timeouts;
  std::string log_jsonl;

  bool safe() const { return agreement && validity; }
};

/// Participants are AgentId 1..n. Set `keep_log` to retain the JSON-lines event log.
DecreeOutcome run_decree(const DecreeConfig& config, bool keep_log = false);

std::string outcome_to_json(const DecreeOutcome& o, std::uint64_t seed);

struct FdReport {
  /// (live observer, crashed peer) pairs checked.
  std::size_t crashed_pairs = 0;
  /// (live observer, nonfaulty peer) pairs checked.
  std::size_t correct_pairs = 0;
  /// Correct pairs whose timeout came to cover the round-trip bound during the run.
  std::size_t stabilized_pairs = 0;
  /// Latest per-pair stabilization horizon seen.
  Tick max_horizon = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Checks the detector histories of a run against its crash schedule.
///
/// Crashed peers (crash-stop, after GST): every live observer ends the run suspecting the peer,
/// and raised that final suspicion within timeout + delta of the crash. For crashes before
/// gst + delay_max the clock starts at gst + delay_max instead, when the last pre-GST answer
/// has landed.
///
/// Nonfaulty peers: no suspicion survives to the end of the run (one raised in the last round
/// trip is given the benefit of the doubt), and none is raised once the
/// pair has stabilized. A pair stabilizes at the tick S its timeout first reaches the round-trip
/// bound; its horizon is max(S, gst + timeout + 1), the second term covering pings sent before GST.
FdReport check_failure_detector(const DecreeConfig& config, const DecreeOutcome& o);

// ---- campaigns ----

struct CampaignConfig {
  std::uint32_t n = 3;
  /// Number of proposers (nodes 1..p); 0 means every node.
  std::uint32_t proposers = 0;
  std::vector<std::string> values;
  /// Crashes per run, victims and ticks drawn per seed unless `fault_schedule` is given.
  std::uint32_t crashes = 0;
  Tick crash_window_start = 0;
  Tick crash_window_end = 60;
  std::vector<simnet::CrashEvent> fault_schedule;
  double drop_rate = 0.0;
  double dup_rate = 0.0;
  Tick gst = 0;
  Tick delta = 5;
  Tick delay_min = 1;
  Tick delay_max = 1;
  std::vector<std::uint64_t> seeds{1};
  Tick max_ticks = 3000;
  /// Regression ceiling on decision time, in ticks after GST.
  Tick liveness_ceiling = 0;
  FdConfig fd;
  Tick retry_timeout = 24;
  /// False keeps every run going to max_ticks (failure-detector campaigns).
  bool stop_when_decided = true;

  /// Per-seed decree configuration, including the drawn crash schedule.
  DecreeConfig decree_for(std::uint64_t seed) const;
};

CampaignConfig campaign_from_json(std::string_view text);
CampaignConfig load_campaign(const std::filesystem::path& path);

struct CampaignRun {
  std::uint64_t seed = 0;
  DecreeOutcome outcome;
};

struct CampaignReport {
  std::uint32_t n = 0;
  std::size_t runs = 0;
  std::size_t agreement_violations = 0;
  std::size_t validity_violations = 0;
  std::size_t undecided_runs = 0;
  std::size_t ceiling_violations = 0;
  std::size_t budget_violations = 0;
  std::size_t fd_violations = 0;
  Tick max_ticks_after_gst = 0;
  std::vector<CampaignRun> details;

  bool safe() const { return agreement_violations == 0 && validity_violations == 0; }
  bool live() const { return undecided_runs == 0 && ceiling_violations == 0; }
};

/// `keep_details` retains every outcome (needed for per-run reports). `check_fd` runs
/// check_failure_detector on every run and counts failing runs in fd_violations.
CampaignReport run_campaign(const CampaignConfig& c, bool keep_details = false, bool check_fd = false);
/// One line per run: seed, decided, agreement, validity, decision tick, messages.
std::string campaign_csv(const CampaignReport& r);

// ---- exhaustive check ----

struct ExhaustiveConfig {
  std::size_t max_deliveries = 14;
  /// Each proposer may start one more ballot after a nack.
  std::uint32_t retries = 1;
};

struct ExhaustiveReport {
  std::uint64_t states = 0;
  std::uint64_t terminal_or_bounded = 0;
  std::uint64_t violations = 0;
  std::uint64_t decided_states = 0;
  std::optional<std::string> counterexample;
};

/// Three acceptors, proposers 1 and 2 with distinct values; every delivery order up to the bound.
ExhaustiveReport exhaustive_check(const ExhaustiveConfig& c = {});

}  // namespace muacp::consensus
