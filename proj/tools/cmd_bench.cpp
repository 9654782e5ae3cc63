#include <algorithm>
#include <chrono>
#include <iostream>
#include <limits>
#include <random>

#include "commands.hpp"
#include "json.hpp"
#include "muacp/generate.hpp"
#include "muacp/wire.hpp"

namespace muacp::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct OpStats {
  double mean_ns = 0;
  double min_ns = std::numeric_limits<double>::infinity();
  double max_ns = 0;

  nlohmann::json to_json() const { return {{"mean_ns", mean_ns}, {"min_ns", min_ns}, {"max_ns", max_ns}}; }
};

double ns_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::nano>(b - a).count();
}

}  // namespace

int cmd_bench_codec(RunContext& ctx, const BenchOptions& o) {
  if (o.count < 1000) {
    throw UsageError("--count must be at least 1000");
  }
  const auto mix = wire::mix_from_name(o.mix);
  if (!mix) {
    throw UsageError("BadMix: unknown mix \"" + o.mix + "\" (empty, one-option, random)");
  }
  const auto seeds = ctx.seed_override().value_or(std::vector<std::uint64_t>{1});
  const std::uint64_t seed = seeds.front();
  ctx.set_seeds({seed});

  std::mt19937_64 rng(seed);
  std::vector<wire::Message> messages;
  messages.reserve(o.count);
  for (std::size_t i = 0; i < o.count; ++i) {
    messages.push_back(wire::random_message(rng, *mix));
  }

  // Cost of reading the clock, subtracted from single-operation samples.
  double clock_ns = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const auto a = Clock::now();
    const auto b = Clock::now();
    clock_ns = std::min(clock_ns, ns_between(a, b));
  }

  // Pass 1: per-operation timing for min and max.
  std::vector<Bytes> encoded(o.count);
  OpStats enc;
  OpStats dec;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < o.count; ++i) {
    const auto t0 = Clock::now();
    encoded[i] = wire::encode(messages[i]);
    const auto t1 = Clock::now();
    const wire::Message back = wire::decode(encoded[i]);
    const auto t2 = Clock::now();
    const double e = std::max(0.0, ns_between(t0, t1) - clock_ns);
    const double d = std::max(0.0, ns_between(t1, t2) - clock_ns);
    enc.min_ns = std::min(enc.min_ns, e);
    enc.max_ns = std::max(enc.max_ns, e);
    dec.min_ns = std::min(dec.min_ns, d);
    dec.max_ns = std::max(dec.max_ns, d);
    if (!(back == messages[i])) {
      ++mismatches;
    }
  }

  // Pass 2: batch timing for the means, free of per-call clock overhead.
  std::size_t sink = 0;
  auto t0 = Clock::now();
  for (const auto& m : messages) {
    sink += wire::encode(m).size();
  }
  auto t1 = Clock::now();
  enc.mean_ns = ns_between(t0, t1) / static_cast<double>(o.count);
  t0 = Clock::now();
  for (const auto& b : encoded) {
    sink += wire::decode(b).payload.size();
  }
  t1 = Clock::now();
  dec.mean_ns = ns_between(t0, t1) / static_cast<double>(o.count);

  double total_bytes = 0;
  double with_options_bytes = 0;
  double without_options_bytes = 0;
  std::size_t with_options = 0;
  for (std::size_t i = 0; i < o.count; ++i) {
    total_bytes += static_cast<double>(encoded[i].size());
    if (messages[i].options.empty()) {
      without_options_bytes += static_cast<double>(encoded[i].size());
    } else {
      with_options_bytes += static_cast<double>(encoded[i].size());
      ++with_options;
    }
  }
  const std::size_t without_options = o.count - with_options;
  auto mean_or_null = [](double sum, std::size_t n) {
    return n == 0 ? nlohmann::json(nullptr) : nlohmann::json(sum / static_cast<double>(n));
  };

  const double ceiling_ns = o.ceiling_us * 1000.0;
  const bool fast = enc.mean_ns < ceiling_ns && dec.mean_ns < ceiling_ns;
  const bool ok = fast && mismatches == 0;
  nlohmann::json report{{"count", o.count},
                        {"mix", o.mix},
                        {"seed", seed},
                        {"mean_size_bytes", total_bytes / static_cast<double>(o.count)},
                        {"mean_size_without_options_bytes", mean_or_null(without_options_bytes, without_options)},
                        {"mean_size_with_options_bytes", mean_or_null(with_options_bytes, with_options)},
                        {"messages_with_options", with_options},
                        {"roundtrip_mismatches", mismatches},
                        {"ceiling_us", o.ceiling_us},
                        {"within_ceiling", fast},
                        {"timing", {{"encode", enc.to_json()}, {"decode", dec.to_json()}, {"clock_overhead_ns", clock_ns}}},
                        {"checksum", sink}};
  ctx.write("bench.json", report.dump(2) + "\n");

  std::cout << "bench-codec: " << o.count << " messages, mix " << o.mix << ", mean size "
            << total_bytes / static_cast<double>(o.count) << " bytes\n"
            << "  encode mean " << enc.mean_ns / 1000.0 << " us (min " << enc.min_ns / 1000.0 << ", max "
            << enc.max_ns / 1000.0 << ")\n"
            << "  decode mean " << dec.mean_ns / 1000.0 << " us (min " << dec.min_ns / 1000.0 << ", max "
            << dec.max_ns / 1000.0 << ")\n"
            << "  roundtrip mismatches " << mismatches << ", " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitPropertyFailure;
}

}  // namespace muacp::cli
