#pragma once

// FIPA performatives, their translation onto the four verbs, conversation automata with bounded
// nesting, and a checker that every automaton trace is reproduced (after projection) by agents
// running the translated messages over a lossless simulated network.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "muacp/types.hpp"
#include "muacp/wire.hpp"

namespace muacp::fipa {

/// One-byte codes; the same value is carried by the PROC option.
enum class Performative : std::uint8_t {
  kInform = 0x01,
  kRequest = 0x02,
  kQueryIf = 0x03,
  kSubscribe = 0x04,
  kNotUnderstood = 0x05,
  kAgree = 0x06,
  kRefuse = 0x07,
  kCfp = 0x08,
  kPropose = 0x09,
  kAcceptProposal = 0x0A,
  kRejectProposal = 0x0B,
  kForward = 0x0C,
  kProxy = 0x0D,
};

inline constexpr std::array<Performative, 13> kVocabulary = {
    Performative::kInform,         Performative::kRequest,        Performative::kQueryIf, Performative::kSubscribe,
    Performative::kNotUnderstood,  Performative::kAgree,          Performative::kRefuse,  Performative::kCfp,
    Performative::kPropose,        Performative::kAcceptProposal, Performative::kRejectProposal,
    Performative::kForward,        Performative::kProxy};

std::string_view performative_name(Performative p);
std::optional<Performative> performative_from_name(std::string_view name);
std::optional<Performative> performative_from_code(std::uint8_t code);
/// True for the performatives carried by a PROC option rather than a verb of their own.
bool is_procedural(Performative p);

/// A FIPA communication action between two protocol roles.
struct FipaAction {
  Performative performative = Performative::kInform;
  std::string sender;
  std::string receiver;
  /// Literal, action, topic or free-form procedural content.
  std::string content;
  std::uint32_t conversation = 0;

  friend bool operator==(const FipaAction&, const FipaAction&) = default;
};

using FipaTrace = std::vector<FipaAction>;

std::string to_string(const FipaAction& a);
std::string to_string(const FipaTrace& t);

/// One message produced by the translation. `from_receiver` marks the expected-reply template
/// that the receiving agent produces by itself (REQUEST's TELL(done(α))).
struct Emitted {
  wire::Message message;
  bool from_receiver = false;
};

/// Translation of one performative within conversation `cid`. Message ids are left at 0 for the
/// sending agent to fill in. `original_message_id` is what a NOT_UNDERSTOOD refers to.
std::vector<Emitted> translate(const FipaAction& a, std::uint16_t cid, std::uint16_t original_message_id = 0);

using Translator = std::function<std::vector<Emitted>(const FipaAction&, std::uint16_t, std::uint16_t)>;

/// Deliberately wrong translation (REQUEST becomes a PING) used to show the checker catches it.
std::vector<Emitted> translate_request_as_ping(const FipaAction& a, std::uint16_t cid, std::uint16_t original);

// ---- observable projection ----

struct ObservableAction {
  /// Performative name, or "UNKNOWN" for an unknown-answer TELL.
  std::string tag;
  AgentId sender{0};
  AgentId receiver{0};
  std::string content;
  std::uint16_t cid = 0;
};

using ObservableTrace = std::vector<ObservableAction>;

/// Semantic tag of a message, or nullopt for internal traffic (plain PING, acknowledgements).
std::optional<ObservableAction> project(AgentId from, AgentId to, const wire::Message& m);

// ---- automata ----

inline constexpr std::uint32_t kDefaultMaxNesting = 3;

struct Transition {
  std::uint32_t from = 0;
  Performative performative = Performative::kInform;
  std::string sender_role;
  std::string receiver_role;
  std::uint32_t to = 0;
  std::uint32_t conversation = 0;
  std::string content;
};

struct ConversationAutomaton {
  std::string name;
  std::vector<std::string> states;
  std::uint32_t initial = 0;
  std::set<std::uint32_t> accepting;
  std::vector<Transition> transitions;
  std::uint32_t nesting_depth = 1;

  std::size_t size() const { return states.size(); }
  /// Role names in sorted order; role i runs as AgentId{i + 1}.
  std::vector<std::string> roles() const;
  /// Throws Error on dangling state indices, nesting beyond `max_nesting` or an empty state set.
  void validate(std::uint32_t max_nesting = kDefaultMaxNesting) const;
  /// No two transitions leave one state with the same label.
  bool deterministic() const;
  /// States from which an accepting state is reachable.
  std::set<std::uint32_t> coreachable() const;
  FipaAction action_of(const Transition& t) const;
};

ConversationAutomaton automaton_from_json(std::string_view text);
ConversationAutomaton load_automaton(const std::filesystem::path& path);
std::string automaton_to_json(const ConversationAutomaton& a);

/// Free interleaving of two automata. Conversations of `b` are renumbered after those of `a`.
ConversationAutomaton product(const ConversationAutomaton& a, const ConversationAutomaton& b);

class TooLarge : public Error {
 public:
  using Error::Error;
};

struct EnumerationLimits {
  std::size_t max_len_cap = 12;
  /// Bound on |Q| * max_len.
  std::size_t explosion_cap = 4096;
  std::size_t max_traces = 1'000'000;
};

/// Every non-empty prefix, of length at most `max_len`, of some accepting run.
std::vector<FipaTrace> enumerate_traces(const ConversationAutomaton& a, std::size_t max_len,
                                        const EnumerationLimits& limits = {});

/// Complete accepting runs of length at most `max_len`.
std::vector<FipaTrace> accepting_runs(const ConversationAutomaton& a, std::size_t max_len,
                                      const EnumerationLimits& limits = {});

// ---- inclusion checking ----

struct TraceOutcome {
  bool covered = false;
  std::string reason;
  /// Every message the agents put on the wire, internal traffic included.
  std::size_t messages = 0;
  ObservableTrace projected;
};

/// Runs one FIPA trace through agents on a lossless network and checks it is reproduced.
TraceOutcome check_trace(const ConversationAutomaton& a, const FipaTrace& trace, const Translator& tau = translate);

struct UncoveredTrace {
  FipaTrace trace;
  std::string reason;
};

struct InclusionReport {
  std::string protocol;
  std::size_t max_len = 0;
  std::size_t traces_checked = 0;
  std::vector<UncoveredTrace> uncovered;
  bool ok() const { return uncovered.empty(); }
};

InclusionReport check_trace_inclusion(const ConversationAutomaton& a, std::size_t max_len,
                                      const Translator& tau = translate);

struct ProceduralBound {
  std::size_t k = 0;
  std::size_t max_messages_observed = 0;
  std::size_t runs = 0;
  std::optional<FipaTrace> offending_run;
  bool ok() const { return !offending_run.has_value(); }
};

/// Counts the messages of every accepting run of length at most |Q| and compares against |Q|.
ProceduralBound procedural_bound_check(const ConversationAutomaton& a);

}  // namespace muacp::fipa
