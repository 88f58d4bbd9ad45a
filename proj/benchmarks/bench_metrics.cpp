#include <benchmark/benchmark.h>

#include "presda/metrics.hpp"
#include "presda/rng.hpp"

using namespace presda;

static void AucConcat(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    Rng rng(1);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = rng.uniform();
        labels[i] = rng.uniform() < 0.2 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::auc_concat(scores, labels));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(AucConcat)->Arg(1 << 10)->Arg(1 << 16);
