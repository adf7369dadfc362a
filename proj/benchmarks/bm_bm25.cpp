#include "shiftlab/bm25_index.hpp"
#include "shiftlab/random.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

using namespace shiftlab;

namespace {

std::string word(Rng& rng, std::size_t vocab) {
    return "w" + std::to_string(std::min(rng.below(vocab), rng.below(vocab)));
}

std::vector<Passage> make_passages(std::size_t n) {
    Rng rng(11);
    std::vector<Passage> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Passage p;
        p.id = "d" + std::to_string(i);
        p.corpus_id = "bench";
        const std::size_t len = 20 + rng.below(100);
        for (std::size_t t = 0; t < len; ++t) {
            p.text += (t ? " " : "") + word(rng, 5000);
        }
        out.push_back(std::move(p));
    }
    return out;
}

void BM_BuildIndex(benchmark::State& state) {
    const auto passages = make_passages(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bm25::build_index(passages));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SearchTop100(benchmark::State& state) {
    const auto index = bm25::build_index(make_passages(static_cast<std::size_t>(state.range(0))));
    Rng rng(5);
    std::vector<std::vector<std::string>> queries(64);
    for (auto& q : queries) {
        for (int t = 0; t < 6; ++t) {
            q.push_back(word(rng, 5000));
        }
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bm25::search_tokens(index, queries[i++ % queries.size()], 100));
    }
}
BENCHMARK(BM_SearchTop100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

} // namespace
