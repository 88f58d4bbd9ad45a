#include <benchmark/benchmark.h>

#include "presda/dsp.hpp"
#include "presda/rng.hpp"

using namespace presda;

static void FirFilter(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto lp = dsp::design_fir(dsp::FilterKind::Lowpass, 12.8, 256.0, 129);
    std::vector<double> x(n);
    Rng rng(1);
    for (auto& v : x) v = rng.uniform(-100.0, 100.0);
    for (auto _ : state) {
        auto y = dsp::filter_signal(lp, x);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(FirFilter)->Arg(1 << 14)->Arg(1 << 18);

static void Resample(benchmark::State& state) {
    eeg::EegRecord rec;
    rec.record_id = "bench";
    rec.ga_weeks = 27.0;
    rec.fs_hz = 256.0;
    rec.n_samples = 256 * 600;  // ten minutes
    for (int c = 0; c < 8; ++c) rec.channel_names.push_back("c" + std::to_string(c));
    rec.samples.resize(8 * rec.n_samples);
    Rng rng(2);
    for (auto& v : rec.samples) v = static_cast<float>(rng.uniform(-100.0, 100.0));

    for (auto _ : state) {
        auto out = dsp::resample_to_32hz(rec);
        benchmark::DoNotOptimize(out.samples.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rec.n_samples) * 8);
}
BENCHMARK(Resample);
