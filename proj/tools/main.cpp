#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace muacp::cli;

namespace {

double tick_ms_from_env() {
  const char* v = std::getenv("MUACP_TICK_MS");
  if (v == nullptr || *v == '\0') {
    return 1.0;
  }
  char* end = nullptr;
  const double ms = std::strtod(v, &end);
  if (end == v || *end != '\0' || !(ms > 0.0)) {
    throw UsageError(std::string("MUACP_TICK_MS must be a positive number, got \"") + v + "\"");
  }
  return ms;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Four-verb agent communication protocol: codec, simulations and checks"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Configuration or input file");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Run this single seed instead of the configured ones");
  app.add_option("--seeds", g.seeds_file, "File of seeds, whitespace separated, # comments");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench-codec", "Time encode/decode over seeded random messages");
  bench_cmd->add_option("--count", bench.count, "Messages (>= 1000)")->capture_default_str();
  bench_cmd->add_option("--mix", bench.mix, "empty | one-option | random")->capture_default_str();
  bench_cmd->add_option("--ceiling-us", bench.ceiling_us, "Fail when a mean exceeds this")->capture_default_str();

  ConsensusOptions cons;
  auto* cons_cmd = app.add_subcommand("sim-consensus", "Seeded single-decree consensus campaign");
  cons_cmd->add_flag("--check-fd", cons.check_fd, "Also check failure-detector properties per run");
  cons_cmd->add_flag("--logs", cons.all_logs, "Write the event log of every run");

  ScaleOptions scale;
  auto* scale_cmd = app.add_subcommand("sim-scale", "Request/response and contract-net traffic at several sizes");
  scale_cmd->add_flag("--logs", scale.logs, "Write the event log of every size");

  TraceOptions traces;
  auto* traces_cmd = app.add_subcommand("check-traces", "Trace inclusion and procedural bound for one protocol");
  traces_cmd->add_option("protocol", traces.protocol, "Protocol automaton JSON (or --config)");
  traces_cmd->add_option("--max-len", traces.max_len, "Longest trace")->capture_default_str();
  traces_cmd->add_flag("--mutant", traces.mutant, "Use the deliberately broken translation");

  BoundOptions bound;
  auto* bound_cmd = app.add_subcommand("check-bound", "Expected encoder length against the entropy bound");
  bound_cmd->add_option("dist", bound.dist, "Distribution JSON (or --config)");
  bound_cmd->add_option("--from-log", bound.from_log, "JSON-lines event log to take the empirical distribution from");
  bound_cmd->add_option("--random", bound.random_seed, "Seeded random distribution");
  bound_cmd->add_option("--support", bound.random_support, "Support size for --random")->capture_default_str();

  ValidateOptions val;
  auto* val_cmd = app.add_subcommand("validate", "Check wire vectors against their sidecar JSON");
  val_cmd->add_option("paths", val.paths, "Vector files or directories (default: vectors)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  std::unique_ptr<RunContext> ctx;
  try {
    g.tick_ms = tick_ms_from_env();
    CLI::App* chosen = app.get_subcommands().front();
    ctx = std::make_unique<RunContext>(chosen->get_name(), g);
    int rc = kExitOk;
    if (chosen == bench_cmd) {
      rc = cmd_bench_codec(*ctx, bench);
    } else if (chosen == cons_cmd) {
      rc = cmd_sim_consensus(*ctx, cons);
    } else if (chosen == scale_cmd) {
      rc = cmd_sim_scale(*ctx, scale);
    } else if (chosen == traces_cmd) {
      rc = cmd_check_traces(*ctx, traces);
    } else if (chosen == bound_cmd) {
      rc = cmd_check_bound(*ctx, bound);
    } else if (chosen == val_cmd) {
      rc = cmd_validate(*ctx, val);
    }
    ctx->finish(rc);
    return rc;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const muacp::Error& e) {
    // Library errors at this level come from loading configs and inputs.
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitPropertyFailure;
  }
}
