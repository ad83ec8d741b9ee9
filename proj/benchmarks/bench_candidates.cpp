#include <benchmark/benchmark.h>

#include "matchlab/candidates.hpp"
#include "matchlab/util.hpp"

namespace {

matchlab::Document make_doc(std::size_t sentences, uint64_t seed) {
    matchlab::SplitMix64 rng(seed);
    matchlab::Document doc;
    doc.id = "bench";
    for (std::size_t i = 0; i < sentences; ++i) {
        matchlab::Sentence s;
        for (int w = 0; w < 8; ++w) s.tokens.push_back("w" + std::to_string(rng.next() % 100));
        doc.sentences.push_back(std::move(s));
    }
    matchlab::Sentence gold;
    for (int w = 0; w < 12; ++w) gold.tokens.push_back("w" + std::to_string(rng.next() % 100));
    doc.gold.push_back(std::move(gold));
    return doc;
}

void BM_GenerateCandidates(benchmark::State& state) {
    const auto doc = make_doc(static_cast<std::size_t>(state.range(0)), 1);
    const std::vector<double> scores(doc.sentences.size(), 1.0);
    const auto pruned = matchlab::prune(doc, scores, doc.sentences.size());
    const std::vector<std::size_t> sel = {2, 3};
    for (auto _ : state) {
        benchmark::DoNotOptimize(matchlab::generate_candidates(pruned, sel).size());
    }
}
BENCHMARK(BM_GenerateCandidates)->Arg(5)->Arg(8)->Arg(10);

void BM_OracleScores(benchmark::State& state) {
    const auto doc = make_doc(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            matchlab::score_sentences(doc, {matchlab::SelectorKind::oracle}).size());
    }
}
BENCHMARK(BM_OracleScores)->Arg(8)->Arg(32);

void BM_GreedyOracle(benchmark::State& state) {
    const auto doc = make_doc(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matchlab::greedy_oracle(doc, 3).indices.size());
    }
}
BENCHMARK(BM_GreedyOracle)->Arg(8)->Arg(16);

}  // namespace
