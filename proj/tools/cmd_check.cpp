#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"
#include "muacp/compression.hpp"
#include "muacp/fipa.hpp"

namespace muacp::cli {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw UsageError("cannot read " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace

int cmd_check_traces(RunContext& ctx, const TraceOptions& o) {
  const std::string path = o.protocol.empty() ? ctx.options().config : o.protocol;
  if (path.empty()) {
    throw UsageError("check-traces needs a protocol file");
  }
  if (o.max_len == 0) {
    throw UsageError("--max-len must be positive");
  }
  ctx.set_config(path);
  fipa::ConversationAutomaton a;
  try {
    a = fipa::load_automaton(path);
  } catch (const Error& e) {
    throw UsageError(std::string("ProtocolInvalid: ") + e.what());
  }

  const fipa::Translator tau = o.mutant ? fipa::Translator(fipa::translate_request_as_ping)
                                        : fipa::Translator(fipa::translate);
  fipa::InclusionReport inc;
  try {
    inc = fipa::check_trace_inclusion(a, o.max_len, tau);
  } catch (const fipa::TooLarge& e) {
    throw UsageError(e.what());
  }
  const auto bound = fipa::procedural_bound_check(a);

  nlohmann::json uncovered = nlohmann::json::array();
  for (const auto& u : inc.uncovered) {
    uncovered.push_back({{"trace", fipa::to_string(u.trace)}, {"reason", u.reason}});
  }
  const bool ok = inc.ok() && bound.ok();
  nlohmann::json report{{"protocol", a.name},
                        {"states", a.size()},
                        {"nesting_depth", a.nesting_depth},
                        {"translation", o.mutant ? "mutant" : "standard"},
                        {"max_len", o.max_len},
                        {"traces_checked", inc.traces_checked},
                        {"uncovered_count", inc.uncovered.size()},
                        {"uncovered", uncovered},
                        {"procedural_bound",
                         {{"k_states", bound.k},
                          {"max_messages_observed", bound.max_messages_observed},
                          {"runs", bound.runs},
                          {"ok", bound.ok()},
                          {"offending_run", bound.offending_run ? nlohmann::json(fipa::to_string(*bound.offending_run))
                                                                 : nlohmann::json(nullptr)}}},
                        {"ok", ok}};
  ctx.write("traces-" + stem_of(path) + (o.mutant ? "-mutant" : "") + ".json", report.dump(2) + "\n");

  std::cout << "check-traces: " << a.name << " (|Q|=" << a.size() << ", nesting " << a.nesting_depth << ") "
            << inc.traces_checked << " traces to length " << o.max_len << ", " << inc.uncovered.size()
            << " uncovered; procedural bound " << bound.max_messages_observed << " <= " << bound.k << " "
            << (bound.ok() ? "holds" : "VIOLATED") << "\n";
  for (std::size_t i = 0; i < inc.uncovered.size() && i < 5; ++i) {
    std::cout << "  uncovered: " << fipa::to_string(inc.uncovered[i].trace) << " -- " << inc.uncovered[i].reason
              << "\n";
  }
  std::cout << "  " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitPropertyFailure;
}

int cmd_check_bound(RunContext& ctx, const BoundOptions& o) {
  const std::string dist_path = o.dist.empty() ? ctx.options().config : o.dist;
  const int sources = (dist_path.empty() ? 0 : 1) + (o.from_log.empty() ? 0 : 1) + (o.random_seed ? 1 : 0);
  if (sources != 1) {
    throw UsageError("check-bound needs exactly one of a distribution file, --from-log or --random");
  }
  compression::MessageDistribution d;
  std::string label;
  try {
    if (!dist_path.empty()) {
      ctx.set_config(dist_path);
      d = compression::distribution_from_json(slurp(dist_path));
      label = stem_of(dist_path);
    } else if (!o.from_log.empty()) {
      ctx.set_config(o.from_log);
      d = compression::corpus_ingest_jsonl(slurp(o.from_log));
      d.name = "corpus:" + stem_of(o.from_log);
      label = "corpus-" + stem_of(o.from_log);
    } else {
      ctx.set_seeds({*o.random_seed});
      d = compression::random_distribution(*o.random_seed, o.random_support);
      label = "random-" + std::to_string(*o.random_seed);
    }
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(std::string("InputInvalid: ") + e.what());
  }

  const auto r = compression::check_bound(d);
  ctx.write("bound-" + label + ".json", compression::bound_report_to_json(r));

  const bool ok = r.holds();
  std::cout << std::fixed << std::setprecision(6) << "check-bound: " << (r.name.empty() ? label : r.name)
            << " (support " << r.support << ")\n"
            << "  H(V)        = " << r.entropy.h_v << " bits\n"
            << "  H(O|V)      = " << r.entropy.h_o_given_v << " bits\n"
            << "  H(P|V,O)    = " << r.entropy.h_p_given_vo << " bits\n"
            << "  H(D)        = " << r.entropy.h_total << " bits\n"
            << "  L(V)        = " << r.l_v << " bits\n"
            << "  L(O|V)      = " << r.l_o_given_v << " bits\n"
            << "  L(P|V,O)    = " << r.l_p_given_vo << " bits\n"
            << "  header      = " << r.h_hdr << " bits\n"
            << "  option idx  = " << r.index_bits << " bits\n"
            << "  slack       = " << r.slack_constant << " bits\n"
            << "  encoder     = " << r.encoder_bits << " bits\n"
            << "  bound       = " << r.bound_bits << " bits\n"
            << "  wire codec  = " << r.wire_bits << " bits (alignment slack " << r.alignment_slack_bits << ")\n"
            << "  huffman tables " << r.tables_built << " built, " << (r.tables_ok ? "all ok" : "FAILED") << "\n"
            << "  " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitPropertyFailure;
}

}  // namespace muacp::cli
