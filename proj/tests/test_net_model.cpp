#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "presda/net.hpp"
#include "presda/rng.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace presda;
using net::Tensor3;

namespace {

Tensor3 random_window(int n_channels, std::uint64_t seed) {
    Tensor3 x(n_channels, net::kInputLen, 1);
    Rng rng(seed);
    for (auto& v : x.d) v = rng.uniform(-2.0, 2.0);
    return x;
}

}  // namespace

TEST_CASE("model forward shape plan and output range") {
    auto params = net::init_params(1);
    params.bn_batches_seen = 1;  // running stats usable at their init values
    const auto x = random_window(8, 2);

    const auto out = net::model_forward_batch(params, x, 8, net::Mode::Infer);
    CHECK(out.seizure_probs.size() == 1);
    CHECK(out.seizure_probs[0] > 0.0);
    CHECK(out.seizure_probs[0] < 1.0);

    // the pooling plan is exactly 256 -> 85 -> 28 -> 9
    CHECK(net::pooled_len(net::kInputLen) == 85);
    CHECK(net::pooled_len(85) == 28);
    CHECK(net::pooled_len(28) == 9);
}

TEST_CASE("channel permutation and duplication invariance") {
    auto params = net::init_params(3);
    params.bn_batches_seen = 1;
    const auto x = random_window(8, 4);
    const double base =
        net::model_forward_batch(params, x, 8, net::Mode::Infer).seizure_probs[0];

    SUBCASE("permutation") {
        Tensor3 perm(8, net::kInputLen, 1);
        const int order[8] = {5, 2, 7, 0, 3, 6, 1, 4};
        for (int n = 0; n < 8; ++n)
            for (int t = 0; t < net::kInputLen; ++t)
                perm.at(n, t, 0) = x.at(order[n], t, 0);
        const double p =
            net::model_forward_batch(params, perm, 8, net::Mode::Infer).seizure_probs[0];
        CHECK(p == doctest::Approx(base).epsilon(1e-12));
    }
    SUBCASE("duplication of every channel") {
        Tensor3 dup(16, net::kInputLen, 1);
        for (int n = 0; n < 16; ++n)
            for (int t = 0; t < net::kInputLen; ++t)
                dup.at(n, t, 0) = x.at(n / 2, t, 0);
        const double p =
            net::model_forward_batch(params, dup, 16, net::Mode::Infer).seizure_probs[0];
        CHECK(p == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("batched inference equals single-window inference") {
    auto params = net::init_params(5);
    params.bn_batches_seen = 1;
    const auto w0 = random_window(4, 10);
    const auto w1 = random_window(4, 11);

    Tensor3 stacked(8, net::kInputLen, 1);
    std::copy(w0.d.begin(), w0.d.end(), stacked.d.begin());
    std::copy(w1.d.begin(), w1.d.end(), stacked.d.begin() + w0.d.size());

    const auto batch_out =
        net::model_forward_batch(params, stacked, 4, net::Mode::Infer);
    const double p0 =
        net::model_forward_batch(params, w0, 4, net::Mode::Infer).seizure_probs[0];
    const double p1 =
        net::model_forward_batch(params, w1, 4, net::Mode::Infer).seizure_probs[0];
    CHECK(batch_out.seizure_probs[0] == p0);
    CHECK(batch_out.seizure_probs[1] == p1);
}

TEST_CASE("inference is deterministic and needs running stats") {
    auto params = net::init_params(6);
    const auto x = random_window(3, 12);
    CHECK_THROWS(net::model_forward_batch(params, x, 3, net::Mode::Infer));
    params.bn_batches_seen = 1;
    const double a =
        net::model_forward_batch(params, x, 3, net::Mode::Infer).seizure_probs[0];
    const double b =
        net::model_forward_batch(params, x, 3, net::Mode::Infer).seizure_probs[0];
    CHECK(a == b);
}

TEST_CASE("model backward") {
    auto params = net::init_params(7, 2);  // tiny variant: 2 maps per layer
    const auto x = random_window(2, 13);

    net::ForwardCache cache;
    net::model_forward_batch(params, x, 2, net::Mode::Train, &cache);
    const std::vector<int> labels = {1};

    SUBCASE("zero weight gives all-zero gradients") {
        const std::vector<double> w0 = {0.0};
        auto grads = net::model_backward_batch(params, cache, labels, w0);
        grads.for_each_tensor([&](const std::string&, std::vector<double>& v) {
            for (double g : v) CHECK(g == 0.0);
        });
    }
    SUBCASE("doubling the weight doubles every gradient") {
        const std::vector<double> w1 = {1.0}, w2 = {2.0};
        auto g1 = net::model_backward_batch(params, cache, labels, w1);
        auto g2 = net::model_backward_batch(params, cache, labels, w2);
        for (std::size_t i = 0; i < g1.convs.size(); ++i)
            for (std::size_t j = 0; j < g1.convs[i].w.size(); ++j)
                CHECK(g2.convs[i].w[j] == doctest::Approx(2.0 * g1.convs[i].w[j]));
    }
    SUBCASE("missing cache is an error") {
        net::ForwardCache empty;
        const std::vector<double> w = {1.0};
        CHECK_THROWS(net::model_backward_batch(params, empty, labels, w));
    }
}

TEST_CASE("full tiny-network gradient check against finite differences") {
    // 2 channels, 256 samples, 2 maps per layer; every trainable tensor.
    // ReLU nets are only piecewise smooth, so each coordinate is checked at
    // a base point whose +/-eps stencil stays inside one linear region.
    const auto report = gradcheck::check_full_network(2, 8);
    MESSAGE("coordinates checked: ", report.coordinates_checked,
            ", worst rel err: ", report.worst_rel_err);
    CHECK(report.coordinates_unresolved == 0);
    CHECK(report.coordinates_checked >= 146);
    CHECK(report.worst_rel_err < 1e-3);
}

TEST_CASE("update_running_stats blends with momentum 0.9") {
    auto params = net::init_params(9, 2);
    std::array<net::BnStats, net::kNumBlocks> stats;
    for (auto& s : stats) {
        s.mean = {2.0, 2.0};
        s.var = {4.0, 4.0};
    }
    net::update_running_stats(params, stats);
    CHECK(params.bn_batches_seen == 1);
    CHECK(params.bns[0].running_mean[0] == doctest::Approx(0.2));
    CHECK(params.bns[0].running_var[0] == doctest::Approx(0.9 + 0.4));
}
