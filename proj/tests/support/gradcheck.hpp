#pragma once

// Whole-network finite-difference checking. The loss of a ReLU network is
// piecewise smooth; a central-difference stencil is a valid derivative
// estimate only when both evaluation points stay in the same linear region
// (no ReLU mask or channel-argmax change). Each coordinate is checked at the
// first of several seeded base points whose stencil is clean.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "presda/net.hpp"
#include "presda/rng.hpp"

namespace gradcheck {

inline presda::net::Tensor3 random_window(int n_channels, std::uint64_t seed) {
    presda::net::Tensor3 x(n_channels, presda::net::kInputLen, 1);
    presda::Rng rng(seed);
    for (auto& v : x.d) v = rng.uniform(-2.0, 2.0);
    return x;
}

// ReLU masks and argmax choices that pin down the current linear region
inline std::vector<char> region_signature(const presda::net::NetworkParams& p,
                                          const presda::net::Tensor3& x) {
    presda::net::ForwardCache cache;
    presda::net::model_forward_batch(p, x, x.rows, presda::net::Mode::Train, &cache);
    std::vector<char> sig;
    auto add_mask = [&](const presda::net::Tensor3& t) {
        for (double v : t.d) sig.push_back(v > 0.0 ? 1 : 0);
    };
    for (int ci = 1; ci < presda::net::kNumConvLayers; ++ci)
        if (ci % presda::net::kConvsPerBlock != 0) add_mask(cache.conv_in[ci]);
    for (int b = 0; b < presda::net::kNumBlocks; ++b) add_mask(cache.bn_in[b]);
    add_mask(cache.head_in);
    for (const auto& a : cache.head_argmax) {
        sig.push_back(static_cast<char>(a[0]));
        sig.push_back(static_cast<char>(a[1]));
    }
    return sig;
}

struct FullNetReport {
    double worst_rel_err = 0.0;
    int coordinates_checked = 0;
    int coordinates_unresolved = 0;  // no clean stencil found at any base point
};

// weighted cross-entropy of one window against every trainable coordinate
inline FullNetReport check_full_network(int feature_maps, std::uint64_t seed,
                                        double eps = 1e-3, int n_base_points = 12) {
    using namespace presda;
    FullNetReport report;

    const int label = 1;
    const double weight = 1.3;

    // coordinates (by tensor) still lacking a kink-free stencil
    std::vector<std::vector<char>> pending;

    for (int base = 0; base < n_base_points; ++base) {
        auto params = net::init_params(seed + 17 * base, feature_maps);
        const auto x = random_window(2, seed + 1000 + base);

        net::ForwardCache cache;
        net::model_forward_batch(params, x, 2, net::Mode::Train, &cache);
        const std::vector<int> labels = {label};
        const std::vector<double> weights = {weight};
        const auto grads = net::model_backward_batch(params, cache, labels, weights);

        auto loss = [&] {
            const auto out = net::model_forward_batch(params, x, 2, net::Mode::Train);
            return -weight * std::log(out.probs[0][label] + 1e-12);
        };

        std::size_t tensor_idx = 0;
        bool any_pending = false;
        auto check_tensor = [&](std::vector<double>& values,
                                const std::vector<double>& analytic) {
            if (pending.size() <= tensor_idx)
                pending.emplace_back(values.size(), 1);
            auto& mask = pending[tensor_idx++];
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (!mask[i]) continue;
                const double keep = values[i];
                values[i] = keep + eps;
                const auto sig_p = region_signature(params, x);
                const double fp = loss();
                values[i] = keep - eps;
                const auto sig_m = region_signature(params, x);
                const double fm = loss();
                values[i] = keep;
                if (sig_p != sig_m) {
                    any_pending = true;
                    continue;  // stencil crosses a kink here; retry elsewhere
                }
                mask[i] = 0;
                ++report.coordinates_checked;
                const double fd = (fp - fm) / (2.0 * eps);
                const double denom =
                    std::max({std::abs(fd), std::abs(analytic[i]), 1e-5});
                report.worst_rel_err =
                    std::max(report.worst_rel_err, std::abs(fd - analytic[i]) / denom);
            }
        };
        for (std::size_t i = 0; i < params.convs.size(); ++i) {
            check_tensor(params.convs[i].w, grads.convs[i].w);
            check_tensor(params.convs[i].b, grads.convs[i].b);
        }
        for (std::size_t i = 0; i < params.bns.size(); ++i) {
            check_tensor(params.bns[i].gamma, grads.bns[i].gamma);
            check_tensor(params.bns[i].beta, grads.bns[i].beta);
        }
        if (!any_pending) return report;

        if (base == n_base_points - 1)
            for (const auto& mask : pending)
                for (char m : mask) report.coordinates_unresolved += m;
    }
    return report;
}

}  // namespace gradcheck
