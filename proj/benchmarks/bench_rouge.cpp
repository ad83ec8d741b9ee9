#include <benchmark/benchmark.h>

#include "matchlab/rouge.hpp"
#include "matchlab/util.hpp"

namespace {

matchlab::TokenList tokens(std::size_t n, uint64_t seed) {
    matchlab::SplitMix64 rng(seed);
    matchlab::TokenList out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng.next() % 200));
    return out;
}

void BM_MeanRouge(benchmark::State& state) {
    const auto cand = tokens(static_cast<std::size_t>(state.range(0)), 1);
    const auto ref = tokens(64, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matchlab::mean_rouge(cand, ref).mean_f1);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MeanRouge)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_RougeL(benchmark::State& state) {
    const auto cand = tokens(static_cast<std::size_t>(state.range(0)), 3);
    const auto ref = tokens(static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matchlab::rouge_l(cand, ref).f1);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RougeL)->RangeMultiplier(2)->Range(32, 512)->Complexity();

}  // namespace

BENCHMARK_MAIN();
