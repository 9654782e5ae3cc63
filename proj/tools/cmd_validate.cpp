#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"
#include "muacp/wire.hpp"

namespace muacp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw UsageError("cannot read " + p.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Empty when the decoded message matches every field the sidecar states.
std::vector<std::string> compare(const wire::Message& m, const Bytes& bytes, const json& want) {
  std::vector<std::string> diffs;
  auto check = [&](const char* key, auto got) {
    if (want.contains(key) && want.at(key) != json(got)) {
      diffs.push_back(std::string(key) + ": got " + json(got).dump() + ", want " + want.at(key).dump());
    }
  };
  check("version", m.header.version);
  check("verb", std::string(wire::verb_name(m.header.verb)));
  check("qos", m.header.qos);
  check("flags", m.header.flags);
  check("message_id", m.header.message_id);
  check("sequence", m.header.sequence);
  check("correlation_id", m.header.correlation_id);
  check("payload_hex", wire::to_hex(m.payload));
  check("size_bytes", bytes.size());
  if (want.contains("options")) {
    json opts = json::array();
    for (const auto& o : m.options) {
      opts.push_back({{"type", static_cast<int>(o.type)}, {"value_hex", wire::to_hex(o.value)}});
    }
    if (opts != want.at("options")) {
      diffs.push_back("options differ");
    }
  }
  if (wire::encode(m) != bytes) {
    diffs.push_back("re-encoding does not reproduce the vector");
  }
  if (wire::wire_size(m) != bytes.size()) {
    diffs.push_back("wire_size disagrees with the vector length");
  }
  return diffs;
}

}  // namespace

int cmd_validate(RunContext& ctx, const ValidateOptions& o) {
  std::vector<std::string> roots = o.paths;
  if (roots.empty()) {
    roots.push_back(ctx.options().config.empty() ? "vectors" : ctx.options().config);
  }
  std::vector<fs::path> files;
  for (const auto& r : roots) {
    if (fs::is_directory(r)) {
      for (const auto& e : fs::directory_iterator(r)) {
        if (e.path().extension() == ".hex") {
          files.push_back(e.path());
        }
      }
    } else if (fs::is_regular_file(r)) {
      files.push_back(r);
    } else {
      throw UsageError("no such vector file or directory: " + r);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw UsageError("no .hex vectors found");
  }
  ctx.set_config(roots.front());

  json results = json::array();
  std::size_t failures = 0;
  for (const auto& f : files) {
    Bytes bytes;
    try {
      bytes = wire::from_hex(slurp(f));
    } catch (const UsageError&) {
      throw;
    } catch (const Error& e) {
      throw UsageError(f.string() + ": " + e.what());
    }
    fs::path sidecar = f;
    sidecar.replace_extension(".json");
    std::optional<json> want;
    if (fs::exists(sidecar)) {
      try {
        want = json::parse(slurp(sidecar));
      } catch (const json::exception& e) {
        throw UsageError(sidecar.string() + ": " + e.what());
      }
    }

    wire::Errc err{};
    const auto m = wire::try_decode(bytes, &err);
    const auto report = wire::validate_wire(bytes);
    std::vector<std::string> diffs;
    if (want) {
      const bool valid = want->value("valid", true);
      if (valid && !m) {
        diffs.push_back(std::string("decode failed: ") + std::string(wire::errc_name(err)));
      } else if (valid) {
        diffs = compare(*m, bytes, *want);
      } else if (m) {
        diffs.push_back("decoded a vector expected to be rejected");
      } else if (want->contains("error") && want->at("error") != std::string(wire::errc_name(err))) {
        diffs.push_back("error " + std::string(wire::errc_name(err)) + ", want " + want->at("error").dump());
      }
    }
    json clauses = json::array();
    for (auto c : report.violated) {
      clauses.push_back(std::string(wire::clause_name(c)));
    }
    const bool pass = diffs.empty();
    failures += pass ? 0 : 1;
    results.push_back({{"file", f.filename().string()},
                       {"decoded", m.has_value()},
                       {"error", m ? json(nullptr) : json(std::string(wire::errc_name(err)))},
                       {"violated_clauses", clauses},
                       {"sidecar", want.has_value()},
                       {"pass", pass},
                       {"diffs", diffs}});
    std::cout << (pass ? "ok   " : "FAIL ") << f.filename().string();
    if (!m) {
      std::cout << " (rejected: " << wire::errc_name(err) << ")";
    }
    for (const auto& d : diffs) {
      std::cout << "\n     " << d;
    }
    std::cout << "\n";
  }
  ctx.write("validate.json", json{{"vectors", files.size()}, {"failures", failures}, {"results", results}}.dump(2) + "\n");
  std::cout << "validate: " << files.size() << " vectors, " << failures << " failures\n";
  return failures == 0 ? kExitOk : kExitPropertyFailure;
}

}  // namespace muacp::cli
