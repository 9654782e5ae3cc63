#include <algorithm>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"

namespace muacp::cli {

namespace {

std::string utc_iso(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::vector<std::uint64_t> read_seed_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot read seeds file " + path);
  }
  std::vector<std::uint64_t> seeds;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(tok, &used);
        if (used != tok.size() || tok.front() == '-') {
          throw std::invalid_argument(tok);
        }
        seeds.push_back(v);
      } catch (const std::exception&) {
        throw UsageError("seeds file " + path + ": bad seed \"" + tok + "\"");
      }
    }
  }
  if (seeds.empty()) {
    throw UsageError("seeds file " + path + " lists no seeds");
  }
  return seeds;
}

}  // namespace

RunContext::RunContext(std::string command, const GlobalOptions& g)
    : command_(std::move(command)),
      g_(g),
      out_(g.out),
      config_(g.config),
      started_(std::chrono::system_clock::now()),
      started_steady_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  std::filesystem::create_directories(out_, ec);
  if (ec) {
    throw UsageError("cannot create output directory " + out_.string() + ": " + ec.message());
  }
}

std::optional<std::vector<std::uint64_t>> RunContext::seed_override() const {
  if (g_.seed && !g_.seeds_file.empty()) {
    throw UsageError("--seed and --seeds are mutually exclusive");
  }
  if (g_.seed) {
    return std::vector<std::uint64_t>{*g_.seed};
  }
  if (!g_.seeds_file.empty()) {
    return read_seed_file(g_.seeds_file);
  }
  return std::nullopt;
}

void RunContext::write(const std::string& name, const std::string& content) {
  const auto path = out_ / name;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error("cannot write " + path.string());
  }
  f << content;
  if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) {
    outputs_.push_back(name);
  }
}

void RunContext::finish(int exit_code) {
  auto outputs = outputs_;
  std::sort(outputs.begin(), outputs.end());
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_steady_).count();
  nlohmann::json j{{"command", command_},
                   {"config", config_},
                   {"seeds", seeds_},
                   {"output_dir", out_.string()},
                   {"artifact_version", MUACP_VERSION},
                   {"tick_ms", g_.tick_ms},
                   {"exit_code", exit_code},
                   {"outputs", outputs},
                   {"wall_clock", {{"started_utc", utc_iso(started_)}, {"elapsed_s", elapsed}}}};
  std::ofstream f(out_ / "manifest.json", std::ios::trunc);
  f << j.dump(2) << "\n";
}

}  // namespace muacp::cli
