#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "muacp/types.hpp"

namespace muacp::cli {

/// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPropertyFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, unreadable or invalid input: exit 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct GlobalOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string seeds_file;
  /// Milliseconds per tick for report labels (MUACP_TICK_MS).
  double tick_ms = 1.0;
};

/// Output directory plus the manifest that lists everything written to it.
class RunContext {
 public:
  RunContext(std::string command, const GlobalOptions& g);

  const GlobalOptions& options() const { return g_; }
  double tick_ms() const { return g_.tick_ms; }

  /// Writes `name` (relative to the output directory) and records it in the manifest.
  void write(const std::string& name, const std::string& content);
  void set_config(const std::string& path) { config_ = path; }
  void set_seeds(std::vector<std::uint64_t> seeds) { seeds_ = std::move(seeds); }

  /// Seeds from --seed / --seeds, or nullopt when neither was given.
  std::optional<std::vector<std::uint64_t>> seed_override() const;

  /// Writes manifest.json; call once, last.
  void finish(int exit_code);

 private:
  std::string command_;
  GlobalOptions g_;
  std::filesystem::path out_;
  std::string config_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::string> outputs_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point started_steady_;
};

struct BenchOptions {
  std::size_t count = 5000;
  std::string mix = "random";
  double ceiling_us = 10.0;
};

struct ConsensusOptions {
  bool check_fd = false;
  bool all_logs = false;
};

struct ScaleOptions {
  bool logs = false;
};

struct TraceOptions {
  std::string protocol;
  std::size_t max_len = 8;
  bool mutant = false;
};

struct BoundOptions {
  std::string dist;
  std::string from_log;
  std::optional<std::uint64_t> random_seed;
  std::size_t random_support = 64;
};

struct ValidateOptions {
  std::vector<std::string> paths;
};

int cmd_bench_codec(RunContext& ctx, const BenchOptions& o);
int cmd_sim_consensus(RunContext& ctx, const ConsensusOptions& o);
int cmd_sim_scale(RunContext& ctx, const ScaleOptions& o);
int cmd_check_traces(RunContext& ctx, const TraceOptions& o);
int cmd_check_bound(RunContext& ctx, const BoundOptions& o);
int cmd_validate(RunContext& ctx, const ValidateOptions& o);

}  // namespace muacp::cli
