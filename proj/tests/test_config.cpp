#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "muacp/compression.hpp"
#include "muacp/consensus.hpp"
#include "muacp/fipa.hpp"
#include "muacp/resources.hpp"
#include "muacp/workload.hpp"

using namespace muacp;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot{MUACP_SOURCE_DIR};

std::vector<fs::path> json_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("every shipped campaign config loads and validates") {
  std::size_t n = 0;
  for (const auto& p : json_in(kRoot / "configs")) {
    const std::string stem = p.stem().string();
    CAPTURE(stem);
    if (stem == "scale") {
      CHECK_NOTHROW(workload::load_scale_config(p).validate());
    } else {
      const auto c = consensus::load_campaign(p);
      CHECK(c.n >= 3);
      CHECK_FALSE(c.seeds.empty());
      CHECK_NOTHROW(c.decree_for(c.seeds.front()).sim.validate());
    }
    ++n;
  }
  CHECK(n >= 8);
}

TEST_CASE("shipped scale config matches the built-in defaults") {
  const auto c = workload::load_scale_config(kRoot / "configs" / "scale.json");
  const workload::ScaleConfig d;
  CHECK(c.agent_counts == d.agent_counts);
  CHECK(c.conversations_per_agent == d.conversations_per_agent);
  CHECK(c.sim.gst == d.sim.gst);
  CHECK(c.sim.drop_rate == d.sim.drop_rate);
}

TEST_CASE("every protocol and distribution loads") {
  for (const auto& p : json_in(kRoot / "protocols")) {
    CAPTURE(p.string());
    CHECK_NOTHROW(fipa::load_automaton(p).validate());
  }
  for (const auto& p : json_in(kRoot / "configs" / "distributions")) {
    CAPTURE(p.string());
    CHECK_NOTHROW(compression::load_distribution(p).validate());
  }
}

TEST_CASE("missing and malformed files raise library errors") {
  CHECK_THROWS_AS(consensus::load_campaign(kRoot / "no-such-file.json"), Error);
  CHECK_THROWS_AS(fipa::load_automaton(kRoot / "no-such-file.json"), Error);
  const fs::path tmp = fs::temp_directory_path() / "muacp-malformed.json";
  std::ofstream(tmp) << "{ \"n\": 3, ";
  CHECK_THROWS_AS(consensus::load_campaign(tmp), Error);
  CHECK_THROWS_AS(workload::load_scale_config(tmp), Error);
  CHECK_THROWS_AS(compression::load_distribution(tmp), Error);
  CHECK_THROWS_AS(resources::load_cost_model(tmp), Error);
  fs::remove(tmp);
  CHECK_THROWS_AS(workload::scale_config_from_json(R"({"agent_counts": "many"})"), Error);
  CHECK_THROWS_AS(resources::cost_model_from_json(R"({"per_byte_cpu": -1})"), Error);
}
