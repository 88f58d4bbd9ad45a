#include <benchmark/benchmark.h>

#include "presda/net.hpp"
#include "presda/rng.hpp"

using namespace presda;

namespace {

net::Tensor3 random_batch(int windows, int channels, std::uint64_t seed) {
    net::Tensor3 x(windows * channels, net::kInputLen, 1);
    Rng rng(seed);
    for (auto& v : x.d) v = rng.uniform(-2.0, 2.0);
    return x;
}

}  // namespace

static void ConvForward(benchmark::State& state) {
    const int rows = static_cast<int>(state.range(0));
    net::Tensor3 x(rows, net::kInputLen, 32);
    Rng rng(1);
    for (auto& v : x.d) v = rng.uniform(-1.0, 1.0);
    net::ConvLayer c;
    c.maps_in = c.maps_out = 32;
    c.w.resize(3 * 32 * 32);
    c.b.assign(32, 0.0);
    for (auto& v : c.w) v = rng.uniform(-0.2, 0.2);

    for (auto _ : state) {
        auto y = net::conv1d_forward(x, c);
        benchmark::DoNotOptimize(y.d.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows) *
                            net::kInputLen * 3 * 32 * 32);
}
BENCHMARK(ConvForward)->Arg(64)->Arg(256)->Arg(512);

static void ModelForwardInfer(benchmark::State& state) {
    const int windows = static_cast<int>(state.range(0));
    auto params = net::init_params(3);
    params.bn_batches_seen = 1;
    const auto x = random_batch(windows, 8, 2);
    for (auto _ : state) {
        auto out = net::model_forward_batch(params, x, 8, net::Mode::Infer);
        benchmark::DoNotOptimize(out.seizure_probs.data());
    }
    state.SetItemsProcessed(state.iterations() * windows);
}
BENCHMARK(ModelForwardInfer)->Arg(16)->Arg(64);

static void ModelTrainStep(benchmark::State& state) {
    const int windows = static_cast<int>(state.range(0));
    auto params = net::init_params(4);
    const auto x = random_batch(windows, 8, 5);
    std::vector<int> labels(windows, 0);
    std::vector<double> weights(windows, 1.0);
    for (int i = 0; i < windows; i += 3) labels[i] = 1;

    for (auto _ : state) {
        net::ForwardCache cache;
        auto out = net::model_forward_batch(params, x, 8, net::Mode::Train, &cache);
        auto grads = net::model_backward_batch(params, cache, labels, weights);
        benchmark::DoNotOptimize(grads.convs[0].w.data());
    }
    state.SetItemsProcessed(state.iterations() * windows);
}
BENCHMARK(ModelTrainStep)->Arg(16)->Arg(64);
