#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "muacp/generate.hpp"
#include "muacp/wire.hpp"

namespace {

using muacp::wire::Mix;

std::vector<muacp::wire::Message> corpus(Mix mix) {
  std::mt19937_64 rng(42);
  std::vector<muacp::wire::Message> v;
  for (int i = 0; i < 1024; ++i) {
    v.push_back(muacp::wire::random_message(rng, mix));
  }
  return v;
}

void BM_Encode(benchmark::State& state) {
  const auto msgs = corpus(static_cast<Mix>(state.range(0)));
  muacp::Bytes out;
  std::size_t i = 0;
  for (auto _ : state) {
    muacp::wire::encode_into(msgs[i++ & 1023], out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}

void BM_Decode(benchmark::State& state) {
  std::vector<muacp::Bytes> bytes;
  for (const auto& m : corpus(static_cast<Mix>(state.range(0)))) {
    bytes.push_back(muacp::wire::encode(m));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    auto m = muacp::wire::decode(bytes[i++ & 1023]);
    benchmark::DoNotOptimize(m.payload.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}

void BM_WireSize(benchmark::State& state) {
  const auto msgs = corpus(static_cast<Mix>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(muacp::wire::wire_size(msgs[i++ & 1023]));
  }
}

// 0 = empty, 1 = one 9-byte option, 2 = random shapes.
BENCHMARK(BM_Encode)->Arg(0)->Arg(1)->Arg(2);
BENCHMARK(BM_Decode)->Arg(0)->Arg(1)->Arg(2);
BENCHMARK(BM_WireSize)->Arg(0)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
