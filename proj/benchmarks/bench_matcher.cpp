#include <benchmark/benchmark.h>

#include "matchlab/matcher.hpp"
#include "matchlab/util.hpp"

namespace {

matchlab::TokenList tokens(std::size_t n, uint64_t seed) {
    matchlab::SplitMix64 rng(seed);
    matchlab::TokenList out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng.next() % 500));
    return out;
}

matchlab::EmbedderConfig config() {
    matchlab::EmbedderConfig cfg;
    cfg.feature_dim = 4096;
    cfg.embed_dim = 128;
    return cfg;
}

void BM_Featurize(benchmark::State& state) {
    const auto cfg = config();
    const auto toks = tokens(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matchlab::featurize(toks, cfg).entries.size());
    }
}
BENCHMARK(BM_Featurize)->Arg(64)->Arg(256)->Arg(512);

void BM_Score(benchmark::State& state) {
    const auto cfg = config();
    const auto model = matchlab::init_model(cfg, 1);
    const auto doc = matchlab::featurize(tokens(256, 2), cfg);
    const auto cand = matchlab::featurize(tokens(48, 3), cfg);
    for (auto _ : state) {
        const auto d = matchlab::embed(doc, model);
        const auto c = matchlab::embed(cand, model);
        double dot = 0;
        for (std::size_t i = 0; i < d.size(); ++i) dot += d[i] * c[i];
        benchmark::DoNotOptimize(dot);
    }
}
BENCHMARK(BM_Score);

void BM_LossGradient(benchmark::State& state) {
    const auto cfg = config();
    const auto model = matchlab::init_model(cfg, 2);
    matchlab::TrainingExample ex;
    ex.doc = matchlab::featurize(tokens(256, 4), cfg);
    ex.gold = matchlab::featurize(tokens(32, 5), cfg);
    for (uint64_t c = 0; c < static_cast<uint64_t>(state.range(0)); ++c)
        ex.candidates.push_back(matchlab::featurize(tokens(40, 10 + c), cfg));
    const matchlab::LossConfig lc{0.0, 0.01};
    for (auto _ : state) {
        benchmark::DoNotOptimize(matchlab::loss_gradient(ex, model, lc).size());
    }
}
BENCHMARK(BM_LossGradient)->Arg(5)->Arg(20);

}  // namespace
