#include "shiftlab/random.hpp"
#include "shiftlab/shift_diagnostics.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

using namespace shiftlab;

namespace {

std::vector<double> simplex(Rng& rng, std::size_t k) {
    std::vector<double> p(k);
    double total = 0.0;
    for (auto& x : p) {
        x = rng.unit() + 1e-9;
        total += x;
    }
    for (auto& x : p) {
        x /= total;
    }
    return p;
}

void BM_Distance(benchmark::State& state) {
    Rng rng(3);
    const auto k = static_cast<std::size_t>(state.range(0));
    const auto p = simplex(rng, k);
    const auto q = simplex(rng, k);
    for (auto _ : state) {
        benchmark::DoNotOptimize(diagnostics::distance(p, q));
    }
}
BENCHMARK(BM_Distance)->Arg(20)->Arg(100)->Arg(1000);

void BM_Wasserstein1(benchmark::State& state) {
    Rng rng(4);
    const auto k = static_cast<std::size_t>(state.range(0));
    const auto p = simplex(rng, k);
    const auto q = simplex(rng, k);
    const auto cost = diagnostics::discrete_cost(k);
    for (auto _ : state) {
        benchmark::DoNotOptimize(diagnostics::wasserstein1(p, q, cost));
    }
}
BENCHMARK(BM_Wasserstein1)->Arg(20)->Arg(100);

void BM_RetrieverStats(benchmark::State& state) {
    Rng rng(5);
    std::vector<ScoreMatrix> batch(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto& sm = batch[i];
        sm.question_id = "q" + std::to_string(i);
        sm.gold_index = rng.below(100);
        for (int c = 0; c < 100; ++c) {
            sm.candidate_ids.push_back("c" + std::to_string(c));
            sm.energies.push_back(10.0 * rng.unit());
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(diagnostics::retriever_stats(batch, diagnostics::NormalizationMode::Exponentiated));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RetrieverStats)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace
